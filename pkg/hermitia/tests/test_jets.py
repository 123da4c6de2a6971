import numpy as np
from django.test import SimpleTestCase

from hermitia.geometry.errors import OrderExhaustedError, SingularSeriesError, StructuralError
from hermitia.geometry.jets import Jet, contract, jet_matrix_inverse, monomial_count


class JetArithmeticTests(SimpleTestCase):
    def setUp(self):
        self.z, self.w, self.zb, self.wb = Jet.variables(2, 3)

    def test_monomial_count(self):
        self.assertEqual(Jet.zeros(2, 3).coeffs.shape[-1], monomial_count(2, 3))
        self.assertEqual(monomial_count(2, 3), 35)

    def test_product_truncates(self):
        cube = self.z * self.z * self.z
        self.assertEqual(cube.coefficient((3, 0), (0, 0)), 1)
        fourth = cube * self.w
        self.assertEqual(np.abs(fourth.coeffs).max(), 0)

    def test_derivatives(self):
        f = self.z * self.z * self.wb + self.w
        fz = f.d(0)
        self.assertEqual(fz.order, 2)
        self.assertEqual(fz.coefficient((1, 0), (0, 1)), 2)
        self.assertEqual(f.d(1).value, 1)
        self.assertEqual(f.wirtinger("zbar", 1).coefficient((2, 0), (0, 0)), 1)

    def test_order_exhausted(self):
        with self.assertRaises(OrderExhaustedError):
            Jet.constant(2, 0, 1.0).d(0)

    def test_conj_swaps_variables(self):
        f = self.z * 1j + self.w * self.zb
        g = f.conj()
        self.assertEqual(g.coefficient((0, 0), (1, 0)), -1j)
        self.assertEqual(g.coefficient((1, 0), (0, 1)), 1)

    def test_inverse_exp_log(self):
        f = 2.0 + self.z + 0.5 * self.wb * self.w
        one = f * f.inverse()
        np.testing.assert_allclose(one.coeffs[0], 1.0)
        np.testing.assert_allclose(one.coeffs[1:], 0.0, atol=1e-14)
        back = f.log().exp()
        np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-13)

    def test_singular_inverse(self):
        with self.assertRaises(SingularSeriesError):
            self.z.inverse()
        with self.assertRaises(SingularSeriesError):
            self.z.log()

    def test_mismatched_orders(self):
        with self.assertRaises(StructuralError):
            self.z + Jet.variables(2, 2)[0]

    def test_matrix_inverse_and_determinant(self):
        m = Jet.constant(2, 3, np.array([[2.0, 1.0], [1.0, 3.0]]))
        bump = Jet(m.space, np.zeros_like(m.coeffs))
        bump.coeffs[0, 1] = (self.z * 0.3).coeffs
        bump.coeffs[1, 0] = (self.zb * 0.3).coeffs
        m = m + bump
        inv, det = jet_matrix_inverse(m)
        product = contract("ij,jk->ik", m, inv)
        np.testing.assert_allclose(product.value, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(product.coeffs[..., 1:], 0.0, atol=1e-13)
        direct = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        np.testing.assert_allclose(det.coeffs, direct.coeffs, atol=1e-13)

    def test_constant_inverse_values(self):
        m = Jet.constant(2, 3, np.array([[2.0, 1.0], [1.0, 3.0]]))
        inv, det = jet_matrix_inverse(m)
        np.testing.assert_allclose(inv.value, [[0.6, -0.2], [-0.2, 0.4]], atol=1e-15)
        self.assertAlmostEqual(det.value, 5.0)

    def test_inverse_needs_pivoting(self):
        a = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, 1.0]])
        inv, _ = jet_matrix_inverse(Jet.constant(2, 2, a))
        np.testing.assert_allclose(inv.value, np.linalg.inv(a), atol=1e-14)

    def test_reserved_subscript(self):
        with self.assertRaises(StructuralError):
            contract("Zi,i->Z", np.eye(2), np.ones(2))
