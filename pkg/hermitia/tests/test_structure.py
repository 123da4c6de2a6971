import os

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from hermitia.geometry.errors import StructuralError
from hermitia.geometry.jets import Jet
from hermitia.geometry.metric import Flat, Hopf, kahler_torus, metric_jet
from hermitia.geometry.metric_io import ingest_torus_metric
from hermitia.geometry.normal_forms import balanced_normal_form, random_normal_form
from hermitia.geometry.structure import (
    balanced_skt_check,
    halton_points,
    kahler_defect,
    laplacian_compare,
    sampled_structure,
    skt_defect,
    skt_traced_residual,
    structure_report,
    torsion_routes,
)


class ClassificationTests(SimpleTestCase):
    def test_flat_is_everything(self):
        sampled = sampled_structure(Flat(2))
        self.assertEqual(sampled.sampler, "halton")
        self.assertEqual(len(sampled.reports), 3**4)
        self.assertTrue(sampled.kahler)
        self.assertTrue(sampled.balanced)
        self.assertTrue(sampled.skt)

    def test_hopf_surface_is_skt_only(self):
        field = Hopf(2)
        sampled = sampled_structure(field, field.sample(10, seed=0))
        self.assertEqual(sampled.sampler, "explicit")
        self.assertTrue(sampled.skt)
        self.assertFalse(sampled.balanced)
        self.assertFalse(sampled.kahler)

    def test_hopf_threefold_is_not_skt(self):
        field = Hopf(3)
        sampled = sampled_structure(field, field.sample(5, seed=0))
        self.assertFalse(sampled.skt)
        self.assertFalse(sampled.balanced)

    def test_hopf_torsion_is_radial(self):
        z = np.array([1.0, 0.0])
        report = structure_report(metric_jet(Hopf(2), z, 2))
        eta = report.torsion
        self.assertAlmostEqual(abs(eta[0]), 0.5, places=10)
        self.assertAlmostEqual(abs(eta[1]), 0.0, places=10)
        self.assertIn("for n = 2 the Gauduchon condition coincides with SKT", report.notes)

    def test_nonkahler_sample_file(self):
        field = ingest_torus_metric(os.path.join(settings.BASE_DIR, "data", "metrics", "nonkahler.txt"))
        report = structure_report(metric_jet(field, np.array([0.1, 0.0]), 2))
        self.assertFalse(report.kahler)

    def test_kahler_torus(self):
        field = kahler_torus(2, seed=4)
        sampled = sampled_structure(field, field.sample(6, seed=2))
        self.assertTrue(sampled.kahler)
        self.assertTrue(sampled.balanced)
        self.assertTrue(sampled.skt)

    def test_skt_defect_is_the_chart_residual(self):
        mj = metric_jet(Hopf(3), np.array([1.0, 0.0, 0.0]), 2)
        defect, residual = skt_defect(mj)
        self.assertAlmostEqual(residual[0, 0], 0, places=10)
        self.assertAlmostEqual(residual[1, 1], -8, places=10)
        self.assertAlmostEqual(residual[2, 2], -8, places=10)
        self.assertAlmostEqual(defect, 8, places=10)
        report = structure_report(mj)
        self.assertAlmostEqual(report.skt_defect, 8, places=10)
        self.assertAlmostEqual(report.skt_traced_defect, 2, places=10)
        self.assertFalse(report.skt)

    def test_worst_point(self):
        field = Hopf(3)
        sampled = sampled_structure(field, field.sample(4, seed=1))
        worst = sampled.worst("skt_defect")
        self.assertEqual(worst.skt_defect, max(r.skt_defect for r in sampled.reports))

    def test_halton_points_are_seeded(self):
        a = halton_points(Flat(2), count=8, seed=5)
        b = halton_points(Flat(2), count=8, seed=5)
        self.assertEqual(len(a), 8)
        np.testing.assert_allclose(np.array(a), np.array(b))


class TorsionTests(SimpleTestCase):
    def setUp(self):
        field = random_normal_form(3, seed=7).metric
        self.mj = metric_jet(field, field.sample(1, seed=3)[0], 2)

    def test_routes_agree(self):
        routes = torsion_routes(self.mj)
        self.assertEqual(set(routes), {"definition", "swapped", "conjugate", "trace"})
        for name, value in routes.items():
            np.testing.assert_allclose(value, routes["definition"], atol=1e-12, err_msg=name)

    def test_traced_skt_residual_vanishes_on_kahler(self):
        mj = metric_jet(kahler_torus(2, seed=1), np.array([0.2 - 0.1j, 0.3 + 0.05j]), 2)
        self.assertLess(np.abs(skt_traced_residual(mj)).max(), 1e-10)
        self.assertLess(kahler_defect(mj)[0], 1e-12)


class LaplacianTests(SimpleTestCase):
    def _bump(self, n):
        v = Jet.variables(n, 2)
        return v[0] * v[n] + v[1] * v[n + 1]

    def _tilted(self, n):
        v = Jet.variables(n, 2)
        return self._bump(n) + v[0] + v[n] + 2 * (v[1] + v[n + 1])

    def test_flat_laplacians(self):
        mj = metric_jet(Flat(2), np.zeros(2), 2)
        values = laplacian_compare(mj, self._bump(2))
        self.assertAlmostEqual(values.canonical, -2)
        self.assertAlmostEqual(values.spread(), 0)

    def test_kahler_laplacians_agree(self):
        mj = metric_jet(kahler_torus(2, seed=3), np.array([0.3 + 0.1j, -0.2 + 0.4j]), 2)
        self.assertLess(laplacian_compare(mj, self._tilted(2)).spread(), 1e-10)

    def test_non_kahler_laplacians_differ(self):
        mj = metric_jet(Hopf(2), np.array([1.0, 0.5]), 2)
        self.assertGreater(laplacian_compare(mj, self._tilted(2)).spread(), 1e-6)

    def test_balanced_laplacians_agree(self):
        field = balanced_normal_form(3, seed=2).metric
        mj = metric_jet(field, np.zeros(3), 2)
        report = structure_report(mj)
        self.assertTrue(report.balanced)
        self.assertGreater(report.kahler_defect, 1e-6)
        self.assertLess(laplacian_compare(mj, self._tilted(3)).spread(), 1e-10)
        self.assertAlmostEqual(laplacian_compare(mj, self._bump(3)).canonical, -2, places=10)

    def test_needs_scalar_jet(self):
        mj = metric_jet(Flat(2), np.zeros(2), 2)
        with self.assertRaises(StructuralError):
            laplacian_compare(mj, mj.h)


class BalancedSktTests(SimpleTestCase):
    def test_not_applicable_on_hopf(self):
        check = balanced_skt_check(metric_jet(Hopf(2), np.array([1.0, 0.0]), 2))
        self.assertFalse(check.applicable)
        self.assertIn("not balanced and SKT", check.reason)

    def test_flat(self):
        check = balanced_skt_check(metric_jet(Flat(3), np.zeros(3), 2))
        self.assertTrue(check.applicable)
        self.assertEqual(check.norm, 0)
