import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'NEEDLECOMP.settings')
django.setup()
