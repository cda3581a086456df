from django.apps import AppConfig


class CounterexampleConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'counterexample'
