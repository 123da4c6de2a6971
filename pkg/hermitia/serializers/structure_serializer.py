from rest_framework import serializers

from hermitia.serializers.fields import ComplexArrayField, RealArrayField


class StructureSerializer(serializers.Serializer):
    point = RealArrayField()
    kahler_defect = serializers.FloatField()
    balanced_defect = serializers.FloatField()
    skt_defect = serializers.FloatField()
    skt_traced_defect = serializers.FloatField()
    kahler = serializers.BooleanField()
    balanced = serializers.BooleanField()
    skt = serializers.BooleanField()
    torsion = ComplexArrayField()


class ChecklistEntrySerializer(serializers.Serializer):
    holds = serializers.BooleanField()
    expected = serializers.BooleanField(required=False)
    witness = serializers.ListField(child=serializers.FloatField(), allow_null=True)


class CheckReportSerializer(serializers.Serializer):
    version = serializers.CharField()
    config = serializers.DictField()
    seed = serializers.IntegerField(allow_null=True)
    metric = serializers.DictField()
    sampler = serializers.CharField()
    tol = serializers.FloatField()
    verdicts = serializers.DictField(child=serializers.BooleanField())
    worst = serializers.DictField(child=serializers.FloatField())
    points = StructureSerializer(many=True)
    checklist = serializers.DictField(child=ChecklistEntrySerializer(), required=False)
    clauses = serializers.ListField(child=serializers.DictField(), required=False)
    notes = serializers.ListField(child=serializers.CharField())
