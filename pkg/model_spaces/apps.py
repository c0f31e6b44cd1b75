from django.apps import AppConfig


class ModelSpacesConfig(AppConfig):
    name = 'model_spaces'
    verbose_name = 'Cone and suspension model spaces'
