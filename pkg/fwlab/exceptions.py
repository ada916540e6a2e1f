"""Exceptions shared by the fwlab apps."""


class FWLabError(Exception):
    """Base class for every error raised by the toolkit"""


class GridMismatchError(FWLabError, ValueError):
    """Two fields (or a field and a spec) live on different grids"""


class NonFiniteError(FWLabError, ValueError):
    """An array that must be finite contains inf or nan"""


class BlowUpError(FWLabError):
    """A time integration produced a non-finite state"""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


class ConditionSampleError(FWLabError, ValueError):
    """A condition check was asked to run on an empty sample cloud"""


class WeightDegeneracyError(FWLabError):
    """Importance weights collapsed onto too few samples"""


class ConfigError(FWLabError):
    """An experiment config could not be parsed or validated"""

    def __init__(self, message, path=None, line=None, key=None):
        self.path = path
        self.line = line
        self.key = key
        location = ''
        if path is not None:
            location = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(f"{location}{message}")
