from django.apps import AppConfig


class NormsStatsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'norms_stats'
