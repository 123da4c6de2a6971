from rest_framework.decorators import api_view
from rest_framework.response import Response

from hermitia.commands import ConfigError, build_config, hopf_series
from hermitia.commands.report import stamp
from hermitia.geometry.errors import HermitiaError
from hermitia.serializers import HopfSelfSimilarSerializer
from hermitia.views.params import query_options


@api_view(['GET'])
def hopf_self_similar(request, **kwargs):
    """c(t) of the self-similar Hopf solution with its extinction time."""
    options = query_options(request.query_params)
    options['hopf_ode'] = True
    try:
        cfg = build_config('flow', options)
        data = stamp(cfg, hopf_series(cfg))
    except (ConfigError, HermitiaError) as exc:
        return Response({"errors": [str(exc)]}, status=400)
    return Response(HopfSelfSimilarSerializer(data).data)
