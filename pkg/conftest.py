import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "hermitia.settings")
django.setup()
