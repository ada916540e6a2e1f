"""
Validation of experiment config sections.

Each TOML section is checked by a Django form. Fields with an ``initial``
value are optional in the file; the resolved config carries every value
the run used.
"""
import math

from django import forms
from django.core.exceptions import ValidationError

from drift.conditions import SampleSpec
from noise.spec import SIGMA2_FAMILIES
from rare_events.events import EVENT_KINDS
from rate.problem import METHODS, MODES

EXPERIMENT_KINDS = (
    'simulate', 'skeleton', 'rate', 'mc', 'sweep',
    'tails', 'weak_convergence', 'moments', 'solution_map', 'check',
)
LAB_KINDS = ('tails', 'weak_convergence', 'moments', 'solution_map')


def choices(values):
    return [(value, value) for value in values]


class ListField(forms.Field):
    """Array of numbers, or a comma separated string of them"""

    item_type = float

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if isinstance(value, str):
            value = [item for item in value.split(',') if item.strip()]
        if not isinstance(value, (list, tuple)):
            raise ValidationError("expected a list of numbers", code='invalid')
        try:
            items = [self.item_type(item) for item in value]
        except (TypeError, ValueError):
            raise ValidationError("expected a list of numbers", code='invalid')
        if self.item_type is float and not all(math.isfinite(item) for item in items):
            raise ValidationError("list entries must be finite", code='invalid')
        return items


class FloatListField(ListField):
    item_type = float


class IntegerListField(ListField):
    item_type = int


class SectionForm(forms.Form):
    """Form for one config section; missing keys fall back to field initials"""

    @classmethod
    def from_section(cls, section):
        data = {name: field.initial for name, field in cls.base_fields.items() if field.initial is not None}
        data.update(section)
        return cls(data=data)


class GridForm(SectionForm):
    dim = forms.IntegerField(min_value=1, max_value=3, initial=1, required=False)
    half_width = forms.FloatField(min_value=0.0, initial=math.pi, required=False)
    points = forms.IntegerField(min_value=4)

    def clean_half_width(self):
        value = self.cleaned_data['half_width']
        if value is not None and value <= 0:
            raise ValidationError("half_width must be positive")
        return value

    def clean_points(self):
        value = self.cleaned_data['points']
        if value & (value - 1):
            raise ValidationError("points must be a power of two")
        return value


DRIFT_CONSTANTS = (
    'lambda1', 'psi1_bound', 'lambda2', 'psi2_bound', 'psi3_bound',
    'lambda3', 'psi4_bound', 'lambda4', 'psi5_bound',
)


class DriftForm(SectionForm):
    p = forms.FloatField(min_value=2.0, initial=4.0, required=False)
    a = forms.FloatField(initial=1.0, required=False)
    b = forms.FloatField(initial=0.0, required=False)
    taming = forms.ChoiceField(choices=choices(('auto', 'on', 'off')), initial='auto', required=False)
    lambda1 = forms.FloatField(required=False)
    psi1_bound = forms.FloatField(required=False)
    lambda2 = forms.FloatField(required=False)
    psi2_bound = forms.FloatField(required=False)
    psi3_bound = forms.FloatField(required=False)
    lambda3 = forms.FloatField(required=False)
    psi4_bound = forms.FloatField(required=False)
    lambda4 = forms.FloatField(required=False)
    psi5_bound = forms.FloatField(required=False)


class NoiseForm(SectionForm):
    K = forms.IntegerField(min_value=1, initial=4, required=False)
    profile = forms.ChoiceField(choices=choices(('gaussian', 'fourier')), initial='gaussian', required=False)
    amplitude = forms.FloatField(initial=1.0, required=False)
    decay = forms.FloatField(min_value=0.0, initial=1.0, required=False)
    width = forms.FloatField(min_value=0.0, initial=1.0, required=False)
    kappa_shape = forms.ChoiceField(
        choices=choices(('gaussian', 'constant', 'zero')), initial='gaussian', required=False,
    )
    kappa_amplitude = forms.FloatField(initial=0.5, required=False)
    kappa_width = forms.FloatField(min_value=0.0, initial=1.0, required=False)
    sigma2 = forms.ChoiceField(choices=choices(SIGMA2_FAMILIES), initial='linear', required=False)
    coupling = forms.FloatField(initial=1.0, required=False)
    envelope_amplitude = forms.FloatField(initial=0.0, required=False)
    envelope_frequency = forms.FloatField(initial=1.0, required=False)


class SolverForm(SectionForm):
    alpha = forms.FloatField(initial=0.75, required=False)
    dt = forms.FloatField(min_value=0.0, initial=0.01, required=False)
    steps = forms.IntegerField(min_value=1, initial=100, required=False)
    initial = forms.ChoiceField(choices=choices(('zero', 'bump', 'mode')), initial='zero', required=False)
    initial_amplitude = forms.FloatField(initial=1.0, required=False)
    initial_width = forms.FloatField(min_value=0.0, initial=1.0, required=False)
    forcing_amplitude = forms.FloatField(initial=0.0, required=False)
    forcing_width = forms.FloatField(min_value=0.0, initial=1.0, required=False)

    def clean_alpha(self):
        value = self.cleaned_data['alpha']
        if value is not None and not 0.0 < value <= 1.0:
            raise ValidationError("alpha must lie in (0, 1]")
        return value

    def clean_dt(self):
        value = self.cleaned_data['dt']
        if value is not None and value <= 0:
            raise ValidationError("dt must be positive")
        return value


class ExperimentForm(SectionForm):
    kind = forms.ChoiceField(choices=choices(EXPERIMENT_KINDS))
    seed = forms.IntegerField(min_value=0, initial=0, required=False)


class ControlFieldsForm(forms.Form):
    control = forms.ChoiceField(choices=choices(('zero', 'constant')), initial='zero', required=False)
    control_amplitude = forms.FloatField(initial=0.0, required=False)


class EventFieldsForm(forms.Form):
    event = forms.ChoiceField(choices=choices(EVENT_KINDS), initial='terminal_threshold', required=False)
    threshold = forms.FloatField(initial=1.0, required=False)
    radius = forms.FloatField(min_value=0.0, initial=0.5, required=False)
    observable_mode = forms.IntegerField(min_value=0, initial=0, required=False)


class OptimizerFieldsForm(forms.Form):
    beta = forms.FloatField(min_value=0.0, initial=20.0, required=False)
    method = forms.ChoiceField(choices=choices(METHODS), initial='lbfgs', required=False)
    max_iterations = forms.IntegerField(min_value=1, initial=500, required=False)
    gradient_tolerance = forms.FloatField(min_value=0.0, initial=1e-6, required=False)
    residual_tolerance = forms.FloatField(min_value=0.0, initial=1e-2, required=False)
    continuation = FloatListField(initial=[1.0, 10.0, 100.0], required=False)
    multistart = forms.IntegerField(min_value=1, initial=1, required=False)
    perturbation = forms.FloatField(min_value=0.0, initial=0.1, required=False)
    expected_action = forms.FloatField(required=False)
    action_tolerance = forms.FloatField(min_value=0.0, initial=0.02, required=False)


class SimulateForm(ExperimentForm, ControlFieldsForm):
    epsilon = forms.FloatField(min_value=0.0, initial=0.1, required=False)
    residual_tolerance = forms.FloatField(min_value=0.0, required=False)


class SkeletonForm(ExperimentForm, ControlFieldsForm):
    pass


class RateForm(ExperimentForm, OptimizerFieldsForm):
    target_mode = forms.ChoiceField(choices=choices(MODES), initial='endpoint', required=False)
    target_amplitude = forms.FloatField(initial=1.0, required=False)
    observable_mode = forms.IntegerField(min_value=0, initial=0, required=False)
    warm_start = forms.BooleanField(initial=False, required=False)


class SamplingFieldsForm(forms.Form):
    samples = forms.IntegerField(min_value=100, initial=10000, required=False)
    estimator = forms.ChoiceField(choices=choices(('naive', 'is')), initial='naive', required=False)
    tilt = forms.ChoiceField(choices=choices(('zero', 'warm_start', 'dominating')), initial='dominating', required=False)


class McForm(ExperimentForm, EventFieldsForm, SamplingFieldsForm, OptimizerFieldsForm):
    epsilon = forms.FloatField(min_value=0.0, initial=0.1, required=False)
    expected_probability = forms.FloatField(min_value=0.0, max_value=1.0, required=False)


class SweepForm(ExperimentForm, EventFieldsForm, SamplingFieldsForm, OptimizerFieldsForm):
    epsilons = FloatListField(initial=[0.2, 0.1, 0.05, 0.02], required=False)
    is_below = forms.FloatField(min_value=0.0, required=False)
    rate = forms.FloatField(min_value=0.0, required=False)
    gap_tolerance = forms.FloatField(min_value=0.0, initial=0.1, required=False)


class TailsForm(ExperimentForm):
    energy_radius = forms.FloatField(min_value=0.0, initial=1.0, required=False)
    m_list = FloatListField()
    n_controls = forms.IntegerField(min_value=1, initial=50, required=False)
    tail_tolerance = forms.FloatField(min_value=0.0, initial=1e-6, required=False)


class WeakConvergenceForm(ExperimentForm, ControlFieldsForm):
    mode = forms.IntegerField(min_value=0, initial=0, required=False)
    amplitude = forms.FloatField(initial=1.0, required=False)
    n_list = IntegerListField(initial=[1, 2, 4, 8, 16, 32], required=False)


class MomentsForm(ExperimentForm):
    energy_radius = forms.FloatField(min_value=0.0, initial=1.0, required=False)
    samples = forms.IntegerField(min_value=1, initial=200, required=False)
    epsilons = FloatListField(initial=[0.01, 0.1, 0.5], required=False)
    ratio_threshold = forms.FloatField(min_value=1.0, initial=2.0, required=False)


class SolutionMapForm(ExperimentForm, ControlFieldsForm):
    deltas = FloatListField(initial=[0.1, 0.01, 0.001], required=False)
    spread_threshold = forms.FloatField(min_value=1.0, initial=2.0, required=False)


class CheckForm(ExperimentForm):
    u_min = forms.FloatField(initial=SampleSpec.u_range[0], required=False)
    u_max = forms.FloatField(initial=SampleSpec.u_range[1], required=False)
    t_min = forms.FloatField(initial=0.0, required=False)
    t_max = forms.FloatField(initial=1.0, required=False)
    u_samples = forms.IntegerField(min_value=1, initial=SampleSpec.u_samples, required=False)
    t_samples = forms.IntegerField(min_value=1, initial=SampleSpec.t_samples, required=False)
    pairs = forms.IntegerField(min_value=1, initial=SampleSpec.pairs, required=False)
    field_samples = forms.IntegerField(min_value=1, initial=32, required=False)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('u_min') is not None and cleaned_data.get('u_max') is not None:
            if cleaned_data['u_min'] >= cleaned_data['u_max']:
                self.add_error('u_max', "u_max must exceed u_min")
        return cleaned_data


SECTION_FORMS = {
    'grid': GridForm,
    'drift': DriftForm,
    'noise': NoiseForm,
    'solver': SolverForm,
}

EXPERIMENT_FORMS = {
    'simulate': SimulateForm,
    'skeleton': SkeletonForm,
    'rate': RateForm,
    'mc': McForm,
    'sweep': SweepForm,
    'tails': TailsForm,
    'weak_convergence': WeakConvergenceForm,
    'moments': MomentsForm,
    'solution_map': SolutionMapForm,
    'check': CheckForm,
}
