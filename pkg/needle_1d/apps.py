from django.apps import AppConfig


class Needle1dConfig(AppConfig):
    name = 'needle_1d'
    verbose_name = 'One-dimensional needle densities'
