import numpy as np
from django.test import SimpleTestCase

from hermitia.geometry.errors import StructuralError
from hermitia.geometry.metric import Flat
from hermitia.geometry.suites import (
    APPENDIX,
    HOPF_ORACLE,
    NORMAL_FORM,
    ROW_COLUMNS,
    SuiteReport,
    appendix,
    hopf_oracle,
    normal_form,
    run_suite,
)
from hermitia.utils import worker_map


class SuiteReportTests(SimpleTestCase):
    def test_only_asserted_rows_decide(self):
        report = SuiteReport("demo", seed=0, tol=1e-9)
        report.add("a", "exact", 0.0)
        report.add("a", "reported", 1.0, asserted=False)
        self.assertTrue(report.passed)
        self.assertEqual(report.max_residual, 0.0)
        report.add("b", "broken", 1e-3)
        self.assertFalse(report.passed)
        self.assertEqual([r["check"] for r in report.failures()], ["broken"])

    def test_frame(self):
        report = SuiteReport("demo", seed=0, tol=1e-9)
        report.merge("a", {"x": 0.0, "y": 2e-10})
        frame = report.as_frame()
        self.assertEqual(list(frame.columns), ROW_COLUMNS)
        self.assertEqual(len(frame), 2)


class SuiteRunTests(SimpleTestCase):
    def test_appendix_on_flat(self):
        report = appendix(metrics=[("flat-2", Flat(2), np.zeros(2))], trials=2, seed=1)
        self.assertEqual(report.suite, APPENDIX)
        self.assertTrue(report.passed, report.failures())
        families = {r["family"] for r in report.rows}
        self.assertEqual(families, {"flat-2", "flat-2/bundle-2", "flat-2/kahler"})

    def test_hopf_oracle(self):
        report = hopf_oracle(dims=(2,), points=3)
        self.assertEqual(report.suite, HOPF_ORACLE)
        self.assertTrue(report.passed, report.failures())
        self.assertIn("self_similar_fixed_point", {r["check"] for r in report.rows})
        self.assertTrue(any("closed form matched as both" in note for note in report.notes))

    def test_normal_form(self):
        report = normal_form(dims=(2,), count=2, kahler_points=3)
        self.assertEqual(report.suite, NORMAL_FORM)
        self.assertTrue(report.passed, report.failures())
        reported = [r for r in report.rows if not r["asserted"]]
        self.assertIn("bismut_second_without_trace_term", {r["check"] for r in reported})

    def test_normal_form_needs_dimension_two(self):
        with self.assertRaises(StructuralError):
            normal_form(dims=(1, 2), count=1)

    def test_threaded_mapper_gives_the_same_rows(self):
        serial = hopf_oracle(dims=(2,), points=2)
        with worker_map(threads=2) as mapper:
            threaded = hopf_oracle(dims=(2,), points=2, mapper=mapper)
        self.assertEqual(serial.rows, threaded.rows)

    def test_dispatch(self):
        self.assertEqual(run_suite(HOPF_ORACLE, dims=(2,), points=1).suite, HOPF_ORACLE)
        with self.assertRaises(StructuralError):
            run_suite("everything")
        with self.assertRaises(StructuralError):
            run_suite(APPENDIX, trials=0)
