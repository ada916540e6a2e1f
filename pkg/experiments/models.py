from django.db import models


class ExperimentRun(models.Model):
    """
    Registry entry for one command-line experiment run
    """
    class Status(models.TextChoices):
        OK = 'OK', 'Passed'
        FAIL = 'FAIL', 'Verdict failed'
        ERROR = 'ERROR', 'Error'

    command = models.CharField(max_length=32)
    experiment = models.CharField(max_length=32)
    config_path = models.CharField(max_length=500, blank=True)
    config_hash = models.CharField(max_length=64, db_index=True)
    seed = models.BigIntegerField(null=True, blank=True)
    threads = models.PositiveIntegerField(default=1)
    status = models.CharField(max_length=10, choices=Status.choices, default=Status.OK)
    output_dir = models.CharField(max_length=500, blank=True)
    summary = models.JSONField(default=dict, blank=True)
    message = models.TextField(blank=True)
    duration_seconds = models.FloatField(null=True, blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = 'experiment_runs'
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.experiment} [{self.config_hash[:12]}] seed={self.seed} {self.status}"

    @property
    def passed(self):
        return self.status == self.Status.OK
