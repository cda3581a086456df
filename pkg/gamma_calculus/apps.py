from django.apps import AppConfig


class GammaCalculusConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gamma_calculus'
