import os
import tempfile
from unittest import mock

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from hermitia.geometry import flow
from hermitia.geometry.errors import DomainError, FlowHalted, StructuralError
from hermitia.geometry.hopf import HopfPoint, oracle
from hermitia.geometry.metric import Flat, Hopf, Scaled
from hermitia.geometry.metric_io import ingest_torus_metric

METRICS = os.path.join(settings.BASE_DIR, "data", "metrics")


class FlowRunTests(SimpleTestCase):
    def test_flat_grows_exponentially(self):
        state = flow.FlowState.from_field(Flat(2), mu=1.0, config=flow.FlowConfig(grid=8, dt=0.001))
        result = flow.run(state, 0.01)
        self.assertTrue(result.completed)
        self.assertEqual(result.state.steps, 10)
        np.testing.assert_allclose(result.state.h[0, 0, 0, 0], np.exp(0.01) * np.eye(2), rtol=1e-12)
        self.assertEqual(list(result.diagnostics.columns), flow.DIAGNOSTIC_COLUMNS)
        self.assertEqual(len(result.diagnostics), 11)

    def test_kahler_file_stays_kahler(self):
        field = ingest_torus_metric(os.path.join(METRICS, "kahler.txt"))
        state = flow.FlowState.from_field(field, mu=0.0, config=flow.FlowConfig(grid=8, cadence=2))
        result = flow.run(state, 0.002)
        self.assertTrue(result.completed)
        defects = result.diagnostics["kahler_defect"]
        self.assertLess(defects.iloc[0], 1e-12)
        self.assertLess(defects.max(), 1e-5)

    def test_flat_flow_at_the_default_step(self):
        state = flow.FlowState.from_field(Flat(2), mu=0.1, config=flow.FlowConfig(grid=8, cadence=16))
        result = flow.run(state, 0.1)
        self.assertTrue(result.completed)
        self.assertAlmostEqual(result.state.t, 0.1, places=12)
        exact = np.exp(0.01) * np.eye(2)
        error = np.abs(result.state.h[0, 0, 0, 0] - exact).max() / np.abs(exact).max()
        self.assertLessEqual(error, 1e-8)

    def test_kahler_file_stays_kahler_on_a_finer_grid(self):
        field = ingest_torus_metric(os.path.join(METRICS, "kahler.txt"))
        state = flow.FlowState.from_field(field, mu=0.0, config=flow.FlowConfig(grid=12, cadence=1000))
        result = flow.run(state, 0.01)
        self.assertTrue(result.completed)
        self.assertLessEqual(result.diagnostics["kahler_defect"].max(), 1e-6)

    def test_scaled_flat_is_periodic(self):
        state = flow.FlowState.from_field(Scaled(Flat(2), 2.0), mu=0.0)
        self.assertEqual(state.N, flow.MIN_GRID)
        np.testing.assert_allclose(state.h[1, 2, 3, 4], 2.0 * np.eye(2))

    def test_progress_callback(self):
        seen = []
        state = flow.FlowState.from_field(Flat(2), mu=0.5, config=flow.FlowConfig(dt=0.01))
        flow.run(state, 0.03, progress=seen.append)
        self.assertEqual([row["step"] for row in seen], [1, 2, 3])

    def test_zero_horizon(self):
        state = flow.FlowState.from_field(Flat(2), mu=0.0)
        result = flow.run(state, 0.0)
        self.assertEqual(result.state.steps, 0)
        self.assertEqual(len(result.diagnostics), 1)

    def test_negative_horizon(self):
        with self.assertRaises(StructuralError):
            flow.run(flow.FlowState.from_field(Flat(2), mu=0.0), -1.0)

    def test_halt_is_reported(self):
        real_step = flow.step

        def failing(state, *args):
            if state.steps >= 1:
                raise FlowHalted("metric lost positivity at site [0, 0, 0, 0]", site=[0, 0, 0, 0], t=state.t)
            return real_step(state, *args)

        state = flow.FlowState.from_field(Flat(2), mu=0.0, config=flow.FlowConfig(dt=0.01))
        with mock.patch.object(flow, "step", side_effect=failing):
            result = flow.run(state, 0.05)
        self.assertFalse(result.completed)
        self.assertEqual(result.halted.site, [0, 0, 0, 0])
        self.assertEqual(result.state.steps, 1)
        self.assertEqual(len(result.diagnostics), 2)

    def test_positivity_is_enforced(self):
        state = flow.FlowState.from_field(Flat(2), mu=0.0)
        state.h[1, 0, 0, 0] = np.diag([-1.0, 1.0])
        with self.assertRaises(FlowHalted) as ctx:
            state.require_positive()
        self.assertEqual(ctx.exception.site, [1, 0, 0, 0])

    def test_grid_too_small(self):
        with self.assertRaises(StructuralError):
            flow.FlowConfig(grid=6)

    def test_hopf_cannot_be_gridded(self):
        with self.assertRaises(DomainError):
            flow.FlowState.from_field(Hopf(2), mu=0.25)


class GridOutputTests(SimpleTestCase):
    def setUp(self):
        field = ingest_torus_metric(os.path.join(METRICS, "kahler.txt"))
        self.state = flow.FlowState.from_field(field, mu=0.5)

    def test_csv_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "grid.csv")
            flow.write_grid_csv(self.state, path)
            loaded = flow.read_grid_csv(path)
        np.testing.assert_allclose(loaded.h, self.state.h, atol=1e-15)
        self.assertEqual(loaded.mu, 0.5)
        self.assertEqual(loaded.N, self.state.N)

    def test_npz(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "grid.npz")
            flow.write_grid_npz(self.state, path)
            with np.load(path) as data:
                np.testing.assert_allclose(data["h"], self.state.h)
                self.assertEqual(int(data["N"]), self.state.N)

    def test_fit_reproduces_the_lattice(self):
        fitted = flow.fit_torus_metric(self.state)
        self.assertEqual(len(fitted.freqs), 5)
        resampled = flow.sample_field(fitted, flow.lattice(2, self.state.N))
        np.testing.assert_allclose(resampled, self.state.h, atol=1e-12)


class DiscreteCurvatureTests(SimpleTestCase):
    def test_fourth_order_convergence(self):
        z = np.array([1.0, 0.5j])
        exact = oracle(HopfPoint(2, z), "chern_ricci2")
        spacings = [0.04, 0.02, 0.01]
        errors = [np.abs(flow.theta2_at_point(Hopf(2), z, s) - exact).max() for s in spacings]
        orders = flow.convergence_order(errors, [1 / s for s in spacings])
        self.assertTrue(np.all((orders > 3.5) & (orders < 4.5)), orders)

    def test_convergence_order_needs_two_levels(self):
        with self.assertRaises(StructuralError):
            flow.convergence_order([1.0], [8])

    def test_flat_lattice_has_no_curvature(self):
        h = flow.sample_field(Flat(2), flow.lattice(2, 8))
        self.assertLess(np.abs(flow.theta2_discrete(h, 1 / 8)).max(), 1e-10)


class HopfReductionTests(SimpleTestCase):
    def test_fixed_point(self):
        series = flow.hopf_self_similar(3, 1.0, 0.5, np.linspace(0, 2, 5))
        np.testing.assert_allclose(series.c, 1.0)
        self.assertIsNone(series.extinction_time)

    def test_extinction(self):
        self.assertAlmostEqual(flow.hopf_extinction_time(3, 1.0, 0.0), 2.0)
        self.assertAlmostEqual(flow.hopf_extinction_time(2, 1.0, -1.0), np.log(5.0))
        self.assertIsNone(flow.hopf_extinction_time(2, 1.0, 1.0))

    def test_rk4_matches_closed_form(self):
        t, c = flow.hopf_ode_rk4(4, 2.0, 0.3, 1.0, 20)
        closed = flow.hopf_self_similar(4, 2.0, 0.3, t)
        np.testing.assert_allclose(c, closed.c, atol=1e-10)
        self.assertEqual(len(closed.as_frame()), 21)

    def test_positive_scale_required(self):
        with self.assertRaises(DomainError):
            flow.hopf_self_similar(2, 0.0, 0.0, [0.0])
