from django.apps import AppConfig


class RateConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'rate'
