from django.apps import AppConfig


class TextsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.texts'
    label = 'apps_texts'
