from django.apps import AppConfig


class SpectralModelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'spectral_model'
