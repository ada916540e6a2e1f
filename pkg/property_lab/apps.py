from django.apps import AppConfig


class PropertyLabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'property_lab'
