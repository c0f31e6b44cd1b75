from django.apps import AppConfig


class ComparisonKernelConfig(AppConfig):
    name = 'comparison_kernel'
    verbose_name = 'Comparison functions and the sharp inradius root'
