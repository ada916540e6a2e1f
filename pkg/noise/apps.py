from django.apps import AppConfig


class NoiseConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'noise'
