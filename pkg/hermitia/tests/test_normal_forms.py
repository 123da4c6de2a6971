import numpy as np
from django.test import SimpleTestCase

from hermitia.geometry import expansions
from hermitia.geometry.curvature import CurvatureSet
from hermitia.geometry.errors import StructuralError
from hermitia.geometry.metric import Hopf, metric_jet
from hermitia.geometry.normal_forms import (
    FAMILIES,
    balanced_normal_form,
    balanced_skt_normal_form,
    random_normal_form,
    skt_normal_form,
)
from hermitia.geometry.structure import structure_report


def at_origin(constrained, order=3):
    mj = metric_jet(constrained.metric, np.zeros(constrained.metric.n), order)
    return mj, expansions.unit_frame(mj), CurvatureSet(mj)


def worst_ricci(table, curv):
    return max(float(np.abs(m - curv.riccis[label].matrix).max()) for label, m in table.items())


class ConstrainedFamilyTests(SimpleTestCase):
    def test_residuals_are_small(self):
        for make in FAMILIES.values():
            self.assertLess(make(3, seed=1).max_residual, 1e-10)

    def test_classification_at_the_origin(self):
        self.assertTrue(structure_report(at_origin(balanced_normal_form(3, seed=2), 2)[0]).balanced)
        self.assertTrue(structure_report(at_origin(skt_normal_form(3, seed=2), 2)[0]).skt)
        both = structure_report(at_origin(balanced_skt_normal_form(2, seed=2), 2)[0])
        self.assertTrue(both.balanced and both.skt)
        self.assertFalse(structure_report(at_origin(random_normal_form(3, seed=2), 2)[0]).balanced)

    def test_balanced_needs_two_dimensions(self):
        with self.assertRaises(StructuralError):
            balanced_normal_form(1)

    def test_seeded(self):
        a = random_normal_form(2, seed=9).metric
        b = random_normal_form(2, seed=9).metric
        np.testing.assert_allclose(a.torsion, b.torsion)


class NormalPointTests(SimpleTestCase):
    def test_origin_is_a_normal_point(self):
        _, frame, _ = at_origin(random_normal_form(3, seed=4))
        self.assertLess(frame.normal_defect(), 1e-12)
        self.assertLess(expansions.torsion_antisymmetry_defect(frame), 1e-12)

    def test_general_ricci_table(self):
        _, frame, curv = at_origin(random_normal_form(3, seed=5))
        self.assertLess(worst_ricci(expansions.normal_point_ricci(frame), curv), 1e-9)

    def test_tensors(self):
        _, frame, curv = at_origin(random_normal_form(2, seed=6))
        self.assertLess(np.abs(expansions.normal_point_lc(frame) - curv.lc.components).max(), 1e-9)
        self.assertLess(np.abs(expansions.normal_point_bismut(frame) - curv.bismut.components).max(), 1e-9)
        self.assertLess(np.abs(expansions.chern_tensor_unit(frame) - curv.chern.components).max(), 1e-9)

    def test_balanced_table(self):
        _, frame, curv = at_origin(balanced_normal_form(3, seed=7))
        self.assertLess(worst_ricci(expansions.balanced_ricci(frame), curv), 1e-9)
        self.assertLess(expansions.balanced_second_derivative_defect(frame), 1e-9)
        variant = expansions.balanced_ricci_without_trace_term(frame)["bismut-second"]
        self.assertGreater(np.abs(variant - curv.riccis["bismut-second"].matrix).max(), 1e-6)

    def test_skt_table_and_sum_rule(self):
        _, frame, curv = at_origin(skt_normal_form(3, seed=8))
        self.assertLess(worst_ricci(expansions.skt_ricci(frame), curv), 1e-9)
        sums = expansions.skt_sum_identities({label: r.matrix for label, r in curv.riccis.items()})
        self.assertLess(sums["bismut_form"], 1e-9)
        self.assertGreater(sums["induced_reading"], 1e-6)

    def test_unit_frame_tensors_off_the_origin(self):
        field = random_normal_form(3, seed=11).metric
        mj = metric_jet(field, field.sample(1, seed=4)[0], 2)
        frame = expansions.unit_frame(mj)
        curv = CurvatureSet(mj)
        self.assertGreater(frame.normal_defect(), 1e-6)
        np.testing.assert_allclose(expansions.lc_tensor_unit(frame), frame.tensor(curv.lc.components), atol=1e-9)
        np.testing.assert_allclose(
            expansions.chern_tensor_unit(frame), frame.tensor(curv.chern.components), atol=1e-9
        )

    def test_non_normal_point(self):
        mj = metric_jet(Hopf(2), np.array([1.0, 0.0]), 2)
        with self.assertRaises(StructuralError):
            expansions.require_normal(expansions.unit_frame(mj))
