import numpy as np
from rest_framework import serializers


def _complex_pair(value):
    value = complex(value)
    return {"re": float(value.real), "im": float(value.imag)}


class ComplexField(serializers.Field):
    """A complex number as {"re": ..., "im": ...}."""

    default_error_messages = {
        'invalid': 'Expected an object with numeric "re" and "im" entries.',
    }

    def to_representation(self, value):
        return _complex_pair(value)

    def to_internal_value(self, data):
        try:
            return complex(float(data["re"]), float(data["im"]))
        except (KeyError, TypeError, ValueError):
            self.fail('invalid')


class ComplexArrayField(serializers.Field):
    """Nested lists of {re, im} pairs mirroring the array's shape."""

    def to_representation(self, value):
        array = np.asarray(value, dtype=complex)
        if array.ndim == 0:
            return _complex_pair(array)
        return [self.to_representation(sub) for sub in array]

    def to_internal_value(self, data):
        if isinstance(data, dict):
            return ComplexField().to_internal_value(data)
        return np.array([self.to_internal_value(item) for item in data], dtype=complex)


class RealArrayField(serializers.ListField):
    child = serializers.FloatField()

    def to_representation(self, data):
        return [float(v) for v in np.asarray(data, dtype=float).reshape(-1)]
