from rest_framework import serializers

from hermitia.serializers.fields import ComplexArrayField, ComplexField, RealArrayField


class TensorSerializer(serializers.Serializer):
    kind = serializers.CharField()
    components = ComplexArrayField()


class PointCurvatureSerializer(serializers.Serializer):
    """
    Everything computed at one point. Only the requested quantities are
    present in the source dict; the others are skipped.
    """
    point = RealArrayField()
    christoffel = ComplexArrayField(required=False)
    tensor = TensorSerializer(required=False)
    ricci = serializers.DictField(child=ComplexArrayField(), required=False)
    scalars = serializers.DictField(child=ComplexField(), required=False)


class CurvatureReportSerializer(serializers.Serializer):
    version = serializers.CharField()
    config = serializers.DictField()
    seed = serializers.IntegerField(allow_null=True)
    metric = serializers.DictField()
    connection = serializers.CharField()
    what = serializers.CharField()
    points = PointCurvatureSerializer(many=True)
