from django.apps import AppConfig


class HermitiaConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'hermitia'
    verbose_name = 'Hermitian curvature toolkit'
