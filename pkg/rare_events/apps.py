from django.apps import AppConfig


class RareEventsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'rare_events'
