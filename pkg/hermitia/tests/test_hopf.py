import numpy as np
from django.test import SimpleTestCase

from hermitia.geometry.errors import DomainError, StructuralError
from hermitia.geometry.hopf import (
    BISMUT_RICCI_QUANTITIES,
    QUANTITIES,
    HopfPoint,
    oracle,
    oracle_vs_pipeline,
    pipeline,
    random_points,
    unitary_transform,
)


class HopfPointTests(SimpleTestCase):
    def test_domain(self):
        with self.assertRaises(DomainError):
            HopfPoint(1, [1.0])
        with self.assertRaises(DomainError):
            HopfPoint(2, [0.0, 0.0])
        with self.assertRaises(DomainError):
            HopfPoint(3, [1.0, 0.0])

    def test_random_points_lie_in_the_shell(self):
        points = random_points(3, 20, seed=1)
        radii = np.array([np.sqrt(p.r2) for p in points])
        self.assertTrue(np.all((radii >= 1.0) & (radii <= 2.0)))
        again = random_points(3, 20, seed=1)
        np.testing.assert_allclose(points[7].z, again[7].z)


class OracleTests(SimpleTestCase):
    def test_surface_matches_pipeline(self):
        for p in random_points(2, 5, seed=0):
            result = oracle_vs_pipeline(p, tol=1e-10)
            self.assertEqual(set(result["residuals"]), set(QUANTITIES))
            for q, residual in result["residuals"].items():
                self.assertLessEqual(residual, 1e-10, q)
            for q in BISMUT_RICCI_QUANTITIES:
                self.assertEqual(result["bismut_ricci_denominator"][q]["matched"], "both")

    def test_threefold_matches_quartic_denominator(self):
        for p in random_points(3, 3, seed=2):
            result = oracle_vs_pipeline(p, tol=1e-10)
            self.assertLessEqual(max(result["residuals"].values()), 1e-10)
            for q in BISMUT_RICCI_QUANTITIES:
                info = result["bismut_ricci_denominator"][q]
                self.assertEqual(info["matched"], "quartic")
                self.assertGreater(info["quadratic"], 1e-6)

    def test_forcing_the_quadratic_denominator(self):
        p = random_points(3, 1, seed=4)[0]
        result = oracle_vs_pipeline(p, tol=1e-10, quadratic_denominator=True)
        self.assertGreater(result["residuals"]["bismut_ricci1"], 1e-6)

    def test_canonical_values(self):
        p = HopfPoint(2, [1.0, 0.0])
        np.testing.assert_allclose(oracle(p, "metric"), 4 * np.eye(2))
        np.testing.assert_allclose(oracle(p, "chern_ricci2"), np.eye(2))
        np.testing.assert_allclose(np.linalg.eigvalsh(oracle(p, "chern_ricci1")), [0.0, 2.0], atol=1e-14)

    def test_unknown_quantity(self):
        with self.assertRaises(StructuralError):
            oracle(HopfPoint(2, [1.0, 0.0]), "weyl_tensor")

    def test_unitary_equivariance(self):
        p = random_points(3, 1, seed=6)[0]
        q, _ = np.linalg.qr(np.random.default_rng(6).normal(size=(3, 3)) + 0j)
        moved = HopfPoint(3, q @ p.z)
        np.testing.assert_allclose(
            unitary_transform(pipeline(p, "chern_ricci1"), q),
            pipeline(moved, "chern_ricci1"),
            atol=1e-10,
        )
