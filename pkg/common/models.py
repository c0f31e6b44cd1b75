from django.db import models


class OutputFormat(models.TextChoices):
    JSON = 'json', 'JSON'
    CSV = 'csv', 'CSV'
    TEXT = 'text', 'Text'
