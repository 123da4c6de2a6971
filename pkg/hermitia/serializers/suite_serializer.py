from rest_framework import serializers


class SuiteRowSerializer(serializers.Serializer):
    family = serializers.CharField()
    check = serializers.CharField()
    residual = serializers.FloatField()
    tol = serializers.FloatField()
    passed = serializers.BooleanField()
    asserted = serializers.BooleanField()


class SuiteReportSerializer(serializers.Serializer):
    version = serializers.CharField()
    config = serializers.DictField()
    suite = serializers.CharField()
    seed = serializers.IntegerField()
    tol = serializers.FloatField()
    passed = serializers.BooleanField()
    max_residual = serializers.FloatField()
    rows = SuiteRowSerializer(many=True)
    notes = serializers.ListField(child=serializers.CharField())
