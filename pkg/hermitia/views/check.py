from rest_framework.decorators import api_view
from rest_framework.response import Response

from hermitia.commands import ConfigError, build_config, cmd_check
from hermitia.geometry.errors import HermitiaError
from hermitia.views.params import query_options


@api_view(['GET'])
def check(request, **kwargs):
    options = query_options(request.query_params)
    if 'metric' not in options:
        return Response({"errors": ["missing metric parameter"]}, status=400)
    try:
        cfg = build_config('check', options)
        result = cmd_check(cfg)
    except (ConfigError, HermitiaError) as exc:
        return Response({"errors": [str(exc)]}, status=400)
    return Response(result.payload())
