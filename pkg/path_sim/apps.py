from django.apps import AppConfig


class PathSimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'path_sim'
