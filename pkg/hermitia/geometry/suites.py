"""
Verification suites: each runs a family of checks and collects one row per
(family, check) with the worst residual over its samples.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import expansions, normal_forms
from .curvature import COMPLEXIFIED, CurvatureSet, complexified_ricci_bianchi, difference_tensor
from .errors import StructuralError
from .flow import hopf_self_similar
from .forms import ConnectionJet, bundle_identity_suite, identity_suite, kahler_degeneration
from .hopf import oracle_vs_pipeline, random_points
from .metric import Flat, Hopf, kahler_torus, metric_jet

logger = logging.getLogger(__name__)

APPENDIX = "appendix"
HOPF_ORACLE = "hopf-oracle"
NORMAL_FORM = "normal-form"
SUITES = (APPENDIX, HOPF_ORACLE, NORMAL_FORM)

ROW_COLUMNS = ["family", "check", "residual", "tol", "passed", "asserted"]


@dataclass
class SuiteReport:
    suite: str
    seed: int
    tol: float
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, family, check, residual, tol=None, asserted=True):
        tol = self.tol if tol is None else tol
        residual = float(residual)
        self.rows.append(
            {
                "family": family,
                "check": check,
                "residual": residual,
                "tol": tol,
                "passed": bool(residual <= tol),
                "asserted": asserted,
            }
        )

    def merge(self, family, residuals, tol=None, asserted=True):
        for check, value in residuals.items():
            self.add(family, check, value, tol, asserted)

    @property
    def passed(self):
        return all(r["passed"] for r in self.rows if r["asserted"])

    def failures(self):
        return [r for r in self.rows if r["asserted"] and not r["passed"]]

    @property
    def max_residual(self):
        return max((r["residual"] for r in self.rows if r["asserted"]), default=0.0)

    def as_frame(self):
        return pd.DataFrame(self.rows, columns=ROW_COLUMNS)

    def as_dict(self):
        return {
            "suite": self.suite,
            "seed": self.seed,
            "tol": self.tol,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "rows": list(self.rows),
            "notes": list(self.notes),
        }


# appendix: the operator identities of the torsion calculus


def appendix_metrics(seed=0):
    """The default metric set: flat, Hopf n = 2 and 3, one random normal form."""
    return [
        ("flat-2", Flat(2), np.zeros(2)),
        ("hopf-2", Hopf(2), random_points(2, 1, seed)[0].z),
        ("hopf-3", Hopf(3), random_points(3, 1, seed)[0].z),
        ("normal-form-2", normal_forms.random_normal_form(2, seed).metric, np.zeros(2)),
    ]


def appendix(metrics=None, trials=20, seed=0, tol=1e-9, order=3, bundle_rank=2, mapper=map):
    """Scalar and bundle identity suites on every (label, field, point) triple."""
    if trials < 1:
        raise StructuralError("the identity suite needs at least one trial")
    report = SuiteReport(APPENDIX, seed, tol)
    for label, field_, point in metrics or appendix_metrics(seed):
        mj = metric_jet(field_, point, order)
        scalar = identity_suite(mj, trials=trials, seed=seed, tol=tol, mapper=mapper)
        report.merge(label, scalar.residuals)
        if bundle_rank:
            conn = ConnectionJet.random(mj.n, bundle_rank, order, seed=seed)
            bundle = bundle_identity_suite(mj, conn, trials=trials, seed=seed, tol=tol, mapper=mapper)
            report.merge(f"{label}/bundle-{bundle_rank}", bundle.residuals)
        if field_.kind == Flat.kind:
            report.merge(f"{label}/kahler", kahler_degeneration(mj, trials=min(trials, 5), seed=seed, mapper=mapper))
        logger.debug("appendix suite on %s: worst %.3g", label, scalar.max_residual)
    return report


# hopf-oracle: closed forms of the Hopf metric against the jet pipeline


def hopf_oracle(dims=(2, 3, 4), points=50, seed=0, tol=1e-10, order=3, mapper=map):
    report = SuiteReport(HOPF_ORACLE, seed, tol)
    for n in dims:
        pts = random_points(n, points, seed)
        results = list(mapper(lambda p: oracle_vs_pipeline(p, order, tol), pts))
        worst = {}
        matched = {}
        for r in results:
            for q, value in r["residuals"].items():
                worst[q] = max(worst.get(q, 0.0), value)
            for q, info in r["bismut_ricci_denominator"].items():
                matched.setdefault(q, set()).add(info["matched"])
        report.merge(f"hopf-{n}", worst)
        for q, labels in sorted(matched.items()):
            report.notes.append(f"hopf-{n} {q}: closed form matched as {', '.join(sorted(labels))}")
        fixed = hopf_self_similar(n, 1.0, (n - 1) / 4.0, np.linspace(0.0, 1.0, 11))
        report.add(f"hopf-{n}", "self_similar_fixed_point", np.abs(fixed.c - 1.0).max())
    return report


# normal-form: closed-form Ricci tables at normal points against the pipeline


def _frame_and_curvature(field_, order=3):
    mj = metric_jet(field_, np.zeros(field_.n), order)
    frame = expansions.unit_frame(mj)
    expansions.require_normal(frame)
    return mj, frame, CurvatureSet(mj)


def _ricci_residuals(table, riccis):
    return {f"ricci_{label}": float(np.abs(m - riccis[label].matrix).max()) for label, m in table.items()}


def _off_origin(field_, seed):
    """Unit-frame tensors at a sample point where h is not the identity and Gamma does not vanish."""
    mj = metric_jet(field_, field_.sample(1, seed=seed)[0], 2)
    frame = expansions.unit_frame(mj)
    curv = CurvatureSet(mj)
    return {
        "lc_tensor_off_origin": float(np.abs(expansions.lc_tensor_unit(frame) - frame.tensor(curv.lc.components)).max()),
        "chern_tensor_off_origin": float(
            np.abs(expansions.chern_tensor_unit(frame) - frame.tensor(curv.chern.components)).max()
        ),
    }


def normal_form(dims=(2, 3), count=10, seed=0, tol=1e-9, kahler_points=20, mapper=map):
    if min(dims) < 2:
        raise StructuralError(f"the normal-form suite covers balanced metrics and needs n >= 2, got dims {tuple(dims)}")
    report = SuiteReport(NORMAL_FORM, seed, tol)
    for n in dims:
        seeds = [seed + k for k in range(count)]

        def general(s):
            field_ = normal_forms.random_normal_form(n, s).metric
            mj, frame, curv = _frame_and_curvature(field_)
            out = {
                "lc_tensor": float(np.abs(expansions.normal_point_lc(frame) - curv.lc.components).max()),
                "induced_tensor": float(np.abs(expansions.normal_point_induced(frame) - curv.induced.components).max()),
                "bismut_tensor": float(np.abs(expansions.normal_point_bismut(frame) - curv.bismut.components).max()),
                "chern_tensor": float(np.abs(expansions.chern_tensor_unit(frame) - curv.chern.components).max()),
                "bianchi_route": float(
                    np.abs(complexified_ricci_bianchi(curv.lc, mj).matrix - curv.riccis[COMPLEXIFIED].matrix).max()
                ),
            }
            out.update(_ricci_residuals(expansions.normal_point_ricci(frame), curv.riccis))
            out.update(_off_origin(field_, s))
            return out

        report.merge(f"random-{n}", _worst(mapper(general, seeds)))

        def balanced(s):
            _, frame, curv = _frame_and_curvature(normal_forms.balanced_normal_form(n, s).metric)
            out = _ricci_residuals(expansions.balanced_ricci(frame), curv.riccis)
            out["second_derivative_symmetry"] = expansions.balanced_second_derivative_defect(frame)
            variant = expansions.balanced_ricci_without_trace_term(frame)["bismut-second"]
            out["bismut_second_without_trace_term"] = float(np.abs(variant - curv.riccis["bismut-second"].matrix).max())
            return out

        rows = _worst(mapper(balanced, seeds))
        variant = rows.pop("bismut_second_without_trace_term")
        report.merge(f"balanced-{n}", rows)
        report.add(f"balanced-{n}", "bismut_second_without_trace_term", variant, asserted=False)

        def skt(s):
            _, frame, curv = _frame_and_curvature(normal_forms.skt_normal_form(n, s).metric)
            riccis = {label: r.matrix for label, r in curv.riccis.items()}
            out = _ricci_residuals(expansions.skt_ricci(frame), curv.riccis)
            sums = expansions.skt_sum_identities(riccis)
            out["sum_rule_bismut_form"] = sums["bismut_form"]
            out["sum_rule_induced_reading"] = sums["induced_reading"]
            out["sum_rule_hermitian_reading"] = sums["hermitian_reading"]
            variant = expansions.skt_ricci_alternate_bismut_first(frame)["bismut-first"]
            out["alternate_bismut_first"] = float(np.abs(variant - curv.riccis["bismut-first"].matrix).max())
            return out

        rows = _worst(mapper(skt, seeds))
        reported = {k: rows.pop(k) for k in ("sum_rule_induced_reading", "sum_rule_hermitian_reading", "alternate_bismut_first")}
        report.merge(f"skt-{n}", rows)
        report.merge(f"skt-{n}", reported, asserted=False)

        def kahler(s):
            field_ = kahler_torus(n, seed=s)
            worst = {}
            for z in field_.sample(kahler_points, seed=s):
                curv = CurvatureSet(metric_jet(field_, z, 2))
                for key, value in curv.kahler_coincidence().items():
                    worst[key] = max(worst.get(key, 0.0), value)
            return worst

        report.merge(f"kahler-torus-{n}", _worst(mapper(kahler, seeds[:5])))

        def difference(s):
            field_ = normal_forms.random_normal_form(n, s).metric
            mj = metric_jet(field_, np.zeros(n), 2)
            curv = CurvatureSet(mj)
            T = difference_tensor(mj, curv.lc_table)
            rng = np.random.default_rng(s)
            worst_route, worst_sign = 0.0, 0.0
            for _ in range(20):
                u = rng.normal(size=n) + 1j * rng.normal(size=n)
                v = rng.normal(size=n) + 1j * rng.normal(size=n)
                direct = curv.lc.contract(u, v) - curv.induced.contract(u, v)
                via_t = np.einsum("ijkl,i,j,k,l->", T, u, u.conj(), v, v.conj())
                worst_route = max(worst_route, abs(direct - via_t))
                worst_sign = max(worst_sign, float(via_t.real))
            return {"difference_tensor_route": worst_route, "difference_contraction_sign": max(worst_sign, 0.0)}

        rows = _worst(mapper(difference, seeds))
        report.add(f"difference-{n}", "difference_tensor_route", rows["difference_tensor_route"], tol=1e-10)
        report.add(f"difference-{n}", "difference_contraction_sign", rows["difference_contraction_sign"], tol=1e-12)
    return report


def _worst(results):
    worst = {}
    for result in results:
        for key, value in result.items():
            worst[key] = max(worst.get(key, 0.0), float(value))
    return worst


def run_suite(name, **kwargs):
    if name == APPENDIX:
        return appendix(**kwargs)
    if name == HOPF_ORACLE:
        return hopf_oracle(**kwargs)
    if name == NORMAL_FORM:
        return normal_form(**kwargs)
    raise StructuralError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
