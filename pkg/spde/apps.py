from django.apps import AppConfig


class SpdeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'spde'
