import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "splitflow.settings")
django.setup()
