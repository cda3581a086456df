from django.apps import AppConfig


class RateLabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'rate_lab'
