import numpy as np
from django.test import SimpleTestCase

from hermitia.geometry.curvature import CurvatureSet
from hermitia.geometry.errors import StructuralError
from hermitia.geometry.hopf import random_points
from hermitia.geometry.metric import Flat, Hopf, metric_jet
from hermitia.geometry.positivity import (
    CLAUSES,
    HYPOTHESES_ONLY,
    INDEFINITE,
    NEGATIVE,
    NONNEGATIVE,
    POSITIVE,
    griffiths_sample,
    hopf_oracle_chern_second,
    hopf_positivity_checklist,
    p_positivity,
    subset_minimum,
    vanishing_hypothesis_report,
)


class PositivityTests(SimpleTestCase):
    def test_p_positive_but_not_positive(self):
        report = p_positivity(np.diag([-1.0, 2.0, 3.0]))
        self.assertEqual(report.verdict(1), INDEFINITE)
        self.assertTrue(report.is_positive(2))
        self.assertEqual(report.verdicts, {1: INDEFINITE, 2: POSITIVE, 3: POSITIVE})

    def test_semidefinite(self):
        report = p_positivity(np.diag([0.0, 1.0]))
        self.assertEqual(report.verdict(1), NONNEGATIVE)
        self.assertEqual(report.verdict(2), POSITIVE)
        self.assertEqual(p_positivity(-np.eye(3)).verdict(2), NEGATIVE)

    def test_invariant_under_unitary_conjugation(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = a + a.conj().T
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        rotated = q @ m @ q.conj().T
        np.testing.assert_allclose(p_positivity(m).eigenvalues, p_positivity(rotated).eigenvalues, atol=1e-12)
        for p in range(1, 5):
            self.assertAlmostEqual(p_positivity(m).lowest_sum(p), subset_minimum(p_positivity(m).eigenvalues, p))

    def test_rejects_non_hermitian(self):
        with self.assertRaises(StructuralError):
            p_positivity(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_p_out_of_range(self):
        with self.assertRaises(StructuralError):
            p_positivity(np.eye(2)).is_positive(3)

    def test_as_dict(self):
        out = p_positivity(np.eye(2)).as_dict()
        self.assertEqual(out["verdicts"], {"1": POSITIVE, "2": POSITIVE})


class GriffithsTests(SimpleTestCase):
    def test_hopf_chern_is_semipositive(self):
        mj = metric_jet(Hopf(2), np.array([1.0, 0.3j]), 2)
        report = griffiths_sample(CurvatureSet(mj).chern, trials=100, seed=2)
        self.assertTrue(report.semipositive)
        self.assertEqual(report.trials, 100)

    def test_negative_tensor(self):
        t = -np.einsum("ij,kl->ijkl", np.eye(2), np.eye(2))
        report = griffiths_sample(t, trials=20, seed=0)
        self.assertFalse(report.semipositive)
        self.assertEqual(report.verdict, NEGATIVE)

    def test_seeded(self):
        t = np.random.default_rng(1).normal(size=(2, 2, 2, 2))
        self.assertEqual(griffiths_sample(t, seed=4).minimum, griffiths_sample(t, seed=4).minimum)


class HopfChecklistTests(SimpleTestCase):
    def test_surface(self):
        checklist = hopf_positivity_checklist(2, Hopf(2).sample(8, seed=0), trials=50)
        for key, entry in checklist.items():
            self.assertTrue(entry["holds"], key)
            self.assertIsNone(entry["witness"])
        self.assertTrue(checklist["skt"]["expected"])

    def test_threefold_is_not_skt(self):
        checklist = hopf_positivity_checklist(3, Hopf(3).sample(5, seed=1), trials=50)
        self.assertFalse(checklist["skt"]["expected"])
        self.assertTrue(all(entry["holds"] for entry in checklist.values()))

    def test_oracle_chern_second(self):
        for p in random_points(3, 4, seed=5):
            mj = metric_jet(Hopf(3), p.z, 2)
            np.testing.assert_allclose(
                CurvatureSet(mj).riccis["chern-second"].matrix, hopf_oracle_chern_second(3, p.z), atol=1e-10
            )


class ClauseTests(SimpleTestCase):
    def test_flat_clauses(self):
        points = Flat(2).sample(4, seed=0)
        weak = vanishing_hypothesis_report(Flat(2), points, "chern-no-forms")
        self.assertTrue(weak.weak_everywhere)
        self.assertFalse(weak.strict_somewhere)
        self.assertFalse(weak.holds)
        self.assertEqual(weak.note, HYPOTHESES_ONLY)

        parallel = vanishing_hypothesis_report(Flat(2), points, "bundle-parallel")
        self.assertTrue(parallel.holds)

    def test_hopf_chern_scalar(self):
        field = Hopf(2)
        report = vanishing_hypothesis_report(field, field.sample(4, seed=3), "chern-scalar-plurigenera")
        self.assertTrue(report.holds)
        self.assertIsNotNone(report.strict_witness)

    def test_precondition_is_reported(self):
        field = Hopf(3)
        report = vanishing_hypothesis_report(field, field.sample(3, seed=0), "bismut-no-forms")
        self.assertEqual(report.precondition, {"requires": "skt", "satisfied_at_samples": False})

    def test_p_only_for_clauses_that_use_it(self):
        points = Flat(2).sample(2, seed=0)
        self.assertEqual(vanishing_hypothesis_report(Flat(2), points, "chern-no-forms", p=2).p, 1)
        self.assertEqual(vanishing_hypothesis_report(Flat(2), points, "chern-no-q-forms", p=2).p, 2)

    def test_unknown_clause(self):
        with self.assertRaises(StructuralError):
            vanishing_hypothesis_report(Flat(2), Flat(2).sample(1), "ricci-flat")

    def test_catalogue(self):
        self.assertIn("chern-no-vector-fields", CLAUSES)
        self.assertEqual(CLAUSES["hermitian-no-forms"].requires, "balanced")
