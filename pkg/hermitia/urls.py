"""hermitia URL Configuration

Only a read-only JSON api is exposed; every route is a GET.
"""
from django.urls import include, path

from hermitia.views import check, curvature, hopf_self_similar

api_urls = [
    path('curvature', curvature),
    path('check', check),
    path('hopf/self-similar', hopf_self_similar),
]

urlpatterns = [
    path('api/', include(api_urls)),
]
