import numpy as np
from django.test import SimpleTestCase

from hermitia.geometry import connection
from hermitia.geometry.curvature import (
    COMPLEXIFIED,
    SECOND,
    CurvatureSet,
    complexified_ricci_bianchi,
    difference_tensor,
    exterior_power_ricci,
    ricci,
    ricci_first_chern_logdet,
)
from hermitia.geometry.errors import OrderExhaustedError, StructuralError
from hermitia.geometry.metric import Flat, Hopf, kahler_torus, metric_jet
from hermitia.geometry.normal_forms import random_normal_form


class ConnectionTests(SimpleTestCase):
    def setUp(self):
        field = random_normal_form(2, seed=3).metric
        self.mj = metric_jet(field, field.sample(1, seed=1)[0], 3)

    def test_levi_civita_symmetries(self):
        table = connection.levi_civita(self.mj)
        self.assertLess(connection.conjugation_defect(table), 1e-12)
        self.assertLess(connection.torsion_free_defect(table), 1e-12)
        self.assertLess(connection.block_defect(table), 1e-12)

    def test_chern_has_no_barred_directions(self):
        table = connection.chern(self.mj)
        n = self.mj.n
        self.assertEqual(np.abs(table.value[n:]).max(), 0)

    def test_kinds(self):
        with self.assertRaises(StructuralError):
            connection.build(self.mj, "weyl")
        self.assertEqual(connection.build(self.mj, connection.INDUCED).kind, connection.LEVI_CIVITA)

    def test_flat_tables_vanish(self):
        mj = metric_jet(Flat(2), np.zeros(2), 2)
        for kind in connection.KINDS:
            self.assertEqual(np.abs(connection.build(mj, kind).value).max(), 0)


class CurvatureTests(SimpleTestCase):
    def test_flat_is_flat(self):
        curv = CurvatureSet(metric_jet(Flat(3), np.zeros(3), 2))
        for kind in connection.KINDS:
            self.assertEqual(np.abs(curv.tensor(kind).components).max(), 0)
        for r in curv.riccis.values():
            self.assertEqual(np.abs(r.matrix).max(), 0)
        self.assertEqual(curv.scalars.S_ch, 0)

    def test_needs_second_order(self):
        with self.assertRaises(OrderExhaustedError):
            CurvatureSet(metric_jet(Flat(2), np.zeros(2), 1))

    def test_ricci_flavors(self):
        curv = CurvatureSet(metric_jet(Hopf(2), np.array([1.0, 0.0]), 2))
        self.assertEqual(
            sorted(curv.riccis),
            sorted(
                [
                    "hermitian", "complexified", "induced-first", "induced-second",
                    "chern-first", "chern-second", "bismut-first", "bismut-second",
                ]
            ),
        )
        with self.assertRaises(StructuralError):
            ricci(curv.chern, curv.mj, COMPLEXIFIED)

    def test_hopf_chern_ricci(self):
        z = np.array([1.0, 0.0])
        mj = metric_jet(Hopf(2), z, 3)
        curv = CurvatureSet(mj)
        np.testing.assert_allclose(curv.riccis["chern-second"].matrix, np.eye(2), atol=1e-12)
        eigs = np.linalg.eigvalsh(curv.riccis["chern-first"].matrix)
        np.testing.assert_allclose(eigs, [0.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(
            ricci_first_chern_logdet(mj).matrix, curv.riccis["chern-first"].matrix, atol=1e-12
        )

    def test_hermitian_symmetries(self):
        field = random_normal_form(3, seed=1).metric
        curv = CurvatureSet(metric_jet(field, field.sample(1, seed=2)[0], 2))
        for kind in connection.KINDS:
            self.assertLess(curv.tensor(kind).hermitian_defect(), 1e-10)
        self.assertLess(curv.lc.pair_symmetry_defect(), 1e-10)
        for label in ("hermitian", "chern-first", "chern-second", "induced-second"):
            self.assertLess(curv.riccis[label].hermitian_defect(), 1e-10)

    def test_bianchi_route(self):
        field = random_normal_form(2, seed=5).metric
        mj = metric_jet(field, np.zeros(2), 3)
        curv = CurvatureSet(mj)
        np.testing.assert_allclose(
            complexified_ricci_bianchi(curv.lc, mj).matrix, curv.riccis[COMPLEXIFIED].matrix, atol=1e-10
        )

    def test_kahler_coincidence(self):
        field = kahler_torus(2, seed=6)
        for z in field.sample(3, seed=0):
            spreads = CurvatureSet(metric_jet(field, z, 2)).kahler_coincidence()
            for key, value in spreads.items():
                self.assertLess(value, 1e-10, key)

    def test_scalars_are_real(self):
        field = random_normal_form(2, seed=2).metric
        curv = CurvatureSet(metric_jet(field, field.sample(1, seed=0)[0], 2))
        self.assertLess(curv.scalars.max_imag(), 1e-10)
        self.assertEqual(set(curv.scalars.as_dict()), {"s_h", "S", "S_lc", "S_ch", "S_bm"})

    def test_difference_tensor(self):
        field = random_normal_form(2, seed=8).metric
        mj = metric_jet(field, np.zeros(2), 2)
        curv = CurvatureSet(mj)
        T = difference_tensor(mj, curv.lc_table)
        rng = np.random.default_rng(0)
        for _ in range(10):
            u = rng.normal(size=2) + 1j * rng.normal(size=2)
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            via_t = np.einsum("ijkl,i,j,k,l->", T, u, u.conj(), v, v.conj())
            direct = curv.lc.contract(u, v) - curv.induced.contract(u, v)
            self.assertAlmostEqual(abs(direct - via_t), 0.0, places=10)
            self.assertLessEqual(via_t.real, 1e-12)

    def test_exterior_power(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = a + a.conj().T
        eigs = np.linalg.eigvalsh(m)
        for q in (1, 2, 3):
            self.assertAlmostEqual(exterior_power_ricci(m, q), eigs[:q].sum(), places=10)

    def test_second_ricci_of_lc_is_not_hermitian_flavor(self):
        curv = CurvatureSet(metric_jet(Flat(2), np.zeros(2), 2))
        r = ricci(curv.lc, curv.mj, SECOND)
        self.assertEqual(r.label, "levi-civita-second")
