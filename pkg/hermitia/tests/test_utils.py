import numpy as np
from django.test import SimpleTestCase

from hermitia.serializers.fields import ComplexArrayField, ComplexField
from hermitia.utils import chunks, report_counts, worker_map


class UtilsTests(SimpleTestCase):
    def test_report_counts(self):
        line = report_counts({"success": 3, "fail": 1, "skipped": 2})
        self.assertEqual(line, "75.0% success. Count: 3, Total fail: 1. Total skipped: 2")
        self.assertTrue(report_counts({}).startswith("N/A% success"))

    def test_chunks(self):
        self.assertEqual(list(chunks([1, 2, 3, 4, 5], 2)), [[1, 2], [3, 4], [5]])

    def test_worker_map_keeps_order(self):
        with worker_map(threads=1) as mapper:
            self.assertIs(mapper, map)
        with worker_map(threads=3) as mapper:
            self.assertEqual(mapper(lambda x: x * x, range(10)), [x * x for x in range(10)])


class ComplexFieldTests(SimpleTestCase):
    def test_scalar(self):
        field = ComplexField()
        self.assertEqual(field.to_representation(1 - 2j), {"re": 1.0, "im": -2.0})
        self.assertEqual(field.to_internal_value({"re": 1, "im": -2}), 1 - 2j)

    def test_array(self):
        field = ComplexArrayField()
        out = field.to_representation(np.array([[1j, 2]]))
        self.assertEqual(out, [[{"re": 0.0, "im": 1.0}, {"re": 2.0, "im": 0.0}]])
        np.testing.assert_array_equal(field.to_internal_value(out), np.array([[1j, 2]]))
