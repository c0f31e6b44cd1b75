from django.apps import AppConfig


class DiscreteNeedlesConfig(AppConfig):
    name = 'discrete_needles'
    verbose_name = 'Transport rays of signed distance functions on finite spaces'
