from rest_framework import serializers

from hermitia.serializers.fields import ComplexArrayField


class FlowDiagnosticSerializer(serializers.Serializer):
    step = serializers.IntegerField()
    t = serializers.FloatField()
    kahler_defect = serializers.FloatField()
    min_eig = serializers.FloatField()
    max_eig = serializers.FloatField()
    einstein_residual = serializers.FloatField()
    wall_time = serializers.FloatField()


class FinalStateSerializer(serializers.Serializer):
    t = serializers.FloatField()
    steps = serializers.IntegerField()
    h_origin = ComplexArrayField()
    site_spread = serializers.FloatField()


class FlowReportSerializer(serializers.Serializer):
    version = serializers.CharField()
    config = serializers.DictField()
    seed = serializers.IntegerField(allow_null=True)
    metric = serializers.DictField()
    completed = serializers.BooleanField()
    halted = serializers.DictField(allow_null=True)
    diagnostics = FlowDiagnosticSerializer(many=True)
    final = FinalStateSerializer()


class HopfSelfSimilarSerializer(serializers.Serializer):
    version = serializers.CharField()
    config = serializers.DictField()
    n = serializers.IntegerField()
    c0 = serializers.FloatField()
    mu = serializers.FloatField()
    extinction_time = serializers.FloatField(allow_null=True)
    t = serializers.ListField(child=serializers.FloatField())
    c = serializers.ListField(child=serializers.FloatField())
    ode_c = serializers.ListField(child=serializers.FloatField(), required=False)
