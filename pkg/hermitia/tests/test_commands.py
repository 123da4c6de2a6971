import json
import logging
import os
import shutil
import tempfile
from io import StringIO

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from hermitia import __version__
from hermitia.commands import ConfigError, build_config, resolve_metric, resolve_points
from hermitia.views.params import query_options


def as_complex(value):
    if isinstance(value, dict):
        return complex(value["re"], value["im"])
    return np.array([as_complex(v) for v in value])


class CommandTestCase(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.log_dir = tempfile.mkdtemp()

    @classmethod
    def tearDownClass(cls):
        for name in ("output", "data_issues"):
            logger = logging.getLogger(name)
            for handler in list(logger.handlers):
                if getattr(handler, "baseFilename", "").startswith(cls.log_dir):
                    logger.removeHandler(handler)
                    handler.close()
        shutil.rmtree(cls.log_dir, ignore_errors=True)
        super().tearDownClass()

    def hermitia(self, *args, **options):
        out = StringIO()
        call_command("hermitia", *args, stdout=out, log_dir=self.log_dir, **options)
        return out.getvalue()

    def hermitia_json(self, *args, **options):
        return json.loads(self.hermitia(*args, **options))

    def returncode(self, *args, **options):
        with self.assertRaises(CommandError) as ctx:
            self.hermitia(*args, **options)
        return ctx.exception.returncode


class CurvatureCommandTests(CommandTestCase):
    def test_hopf_at_a_point(self):
        report = self.hermitia_json("curvature", metric="hopf", point=["1,0,0,0"])
        self.assertEqual(report["version"], __version__)
        self.assertEqual(report["seed"], 0)
        self.assertEqual(report["config"]["metric"], "hopf")
        self.assertEqual(report["metric"]["kind"], "hopf")
        self.assertEqual(len(report["points"]), 1)
        point = report["points"][0]
        np.testing.assert_allclose(as_complex(point["ricci"]["chern-second"]), np.eye(2), atol=1e-10)
        self.assertEqual(set(point["scalars"]), {"s_h", "S", "S_lc", "S_ch", "S_bm"})
        self.assertIn("christoffel", point)
        self.assertEqual(point["tensor"]["kind"], "chern")

    def test_single_ricci(self):
        report = self.hermitia_json("curvature", metric="flat", what="ricci1", connection="bismut")
        point = report["points"][0]
        self.assertEqual(list(point["ricci"]), ["bismut-first"])
        self.assertNotIn("tensor", point)

    def test_csv_scalars(self):
        text = self.hermitia("curvature", metric="normal-form", what="scalars", sample=20, seed=3, format="csv")
        lines = text.splitlines()
        self.assertEqual(lines[0], f"# hermitia {__version__}")
        self.assertIn("# seed 3", lines)
        frame = pd.read_csv(StringIO(text), comment="#")
        self.assertEqual(len(frame), 20)
        self.assertIn("S_ch.re", frame.columns)
        self.assertIn("x3", frame.columns)

    def test_output_file(self):
        path = os.path.join(self.log_dir, "report.json")
        stdout = self.hermitia("curvature", metric="flat", what="scalars", output=path)
        self.assertEqual(stdout, "")
        with open(path, encoding="utf-8") as handle:
            self.assertEqual(json.load(handle)["what"], "scalars")

    def test_logs_are_written(self):
        self.hermitia("curvature", metric="flat", what="scalars")
        self.assertTrue(os.path.exists(os.path.join(self.log_dir, "output.log")))
        self.assertTrue(os.path.exists(os.path.join(self.log_dir, "data_issues.log")))


class CheckCommandTests(CommandTestCase):
    def test_hopf_surface(self):
        report = self.hermitia_json("check", metric="hopf", sample=4)
        self.assertEqual(report["verdicts"], {"kahler": False, "balanced": False, "skt": True})
        self.assertEqual(report["sampler"], "explicit")
        self.assertTrue(all(entry["holds"] for entry in report["checklist"].values()))
        self.assertNotIn("clauses", report)

    def test_flat_with_clauses(self):
        report = self.hermitia_json("check", metric="flat", sample=3, clause=["chern-no-forms", "bundle-parallel"])
        self.assertTrue(all(report["verdicts"].values()))
        self.assertEqual([c["clause"] for c in report["clauses"]], ["chern-no-forms", "bundle-parallel"])
        self.assertEqual(report["worst"]["kahler_defect"], 0)

    def test_halton_sampler_by_default(self):
        text = self.hermitia("check", metric="flat", format="csv")
        frame = pd.read_csv(StringIO(text), comment="#")
        self.assertEqual(len(frame), 3**4)

    def test_unknown_clause(self):
        self.assertEqual(self.returncode("check", metric="flat", clause=["ricci-flat"]), 2)


class VerifyCommandTests(CommandTestCase):
    def test_hopf_oracle(self):
        report = self.hermitia_json("verify", suite="hopf-oracle", dim=2, points=2)
        self.assertTrue(report["passed"])
        self.assertLessEqual(report["max_residual"], 1e-10)
        self.assertEqual(report["suite"], "hopf-oracle")

    def test_failing_suite_exits_one(self):
        self.assertEqual(self.returncode("verify", suite="hopf-oracle", dim=2, points=1, tol=1e-300), 1)

    def test_suite_required(self):
        self.assertEqual(self.returncode("verify"), 2)

    def test_normal_form_needs_dimension_two(self):
        self.assertEqual(self.returncode("verify", suite="normal-form", dim=1), 2)


class FlowCommandTests(CommandTestCase):
    def test_hopf_reduction(self):
        report = self.hermitia_json("flow", hopf_ode=True, dim=2, T=1.0, steps=4)
        self.assertEqual(len(report["c"]), 5)
        self.assertAlmostEqual(report["extinction_time"], 4.0)
        np.testing.assert_allclose(report["c"], report["ode_c"], atol=1e-12)

    def test_flat_grid_flow_with_outputs(self):
        dump = os.path.join(self.log_dir, "final.npz")
        fit = os.path.join(self.log_dir, "fit.txt")
        report = self.hermitia_json("flow", metric="flat", mu=1.0, T=0.01, dt=0.005, dump=dump, fit=fit)
        self.assertTrue(report["completed"])
        self.assertIsNone(report["halted"])
        self.assertEqual(report["final"]["steps"], 2)
        np.testing.assert_allclose(as_complex(report["final"]["h_origin"]), np.exp(0.01) * np.eye(2), rtol=1e-10)
        self.assertTrue(os.path.exists(dump))
        self.assertTrue(os.path.exists(fit))

    def test_hopf_grid_flow_is_a_runtime_error(self):
        self.assertEqual(self.returncode("flow", metric="hopf"), 3)


class ExitCodeTests(CommandTestCase):
    def test_missing_metric(self):
        self.assertEqual(self.returncode("curvature"), 2)

    def test_metric_and_file(self):
        self.assertEqual(self.returncode("curvature", metric="flat", metric_file="metric.txt"), 2)

    def test_wrong_point_length(self):
        self.assertEqual(self.returncode("curvature", metric="flat", point=["1,0,0"]), 2)

    def test_domain_error(self):
        self.assertEqual(self.returncode("curvature", metric="hopf", point=["0,0,0,0"]), 3)

    def test_missing_metric_file(self):
        self.assertEqual(self.returncode("curvature", metric_file=os.path.join(self.log_dir, "absent.txt")), 3)

    def test_flow_grid_too_small(self):
        self.assertEqual(self.returncode("flow", metric="flat", grid=6), 2)


class ConfigTests(SimpleTestCase):
    def test_defaults_come_from_settings(self):
        cfg = build_config("curvature", {"metric": "flat"})
        self.assertEqual(cfg.order, 3)
        self.assertEqual(cfg.positivity_tol, 1e-10)
        self.assertEqual(cfg.echo()["metric"], "flat")

    def test_string_options(self):
        cfg = build_config("flow", {"metric": "flat", "grid": "10", "mu": "0.5", "point": "0.1,0,0,0"})
        self.assertEqual(cfg.grid, 10)
        self.assertEqual(cfg.mu, 0.5)
        self.assertEqual(cfg.points, [[0.1, 0.0, 0.0, 0.0]])

    def test_bad_number(self):
        with self.assertRaises(ConfigError):
            build_config("flow", {"metric": "flat", "grid": "many"})

    def test_flow_grid_is_validated(self):
        with self.assertRaises(ConfigError):
            build_config("flow", {"metric": "flat", "grid": "6"})
        with self.assertRaises(ConfigError):
            build_config("flow", {"metric": "flat", "cadence": "0"})
        build_config("flow", {"hopf_ode": True, "grid": "6"})

    def test_points(self):
        cfg = build_config("curvature", {"metric": "hopf", "dim": 3})
        field = resolve_metric(cfg)
        self.assertEqual(field.n, 3)
        points = resolve_points(cfg, field)
        self.assertEqual(len(points), 1)
        self.assertGreater(np.abs(points[0]).max(), 0)
        flat = build_config("curvature", {"metric": "flat"})
        np.testing.assert_array_equal(resolve_points(flat, resolve_metric(flat))[0], np.zeros(2))

    def test_query_options(self):
        class Query(dict):
            def getlist(self, key):
                return self[key]

        options = query_options(Query({"metric": "hopf", "point": ["1,0,0,0"], "metric-file": "x", "positivity-tol": "1e-8"}))
        self.assertEqual(options, {"metric": "hopf", "point": ["1,0,0,0"], "positivity_tol": "1e-8"})
