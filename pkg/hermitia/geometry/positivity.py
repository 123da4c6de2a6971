"""
Eigenvalue verdicts for Hermitian matrices, Griffiths sampling of curvature
tensors, and sampled reports on the curvature hypotheses of the vanishing
theorems.

A Hermitian r x r matrix is p-nonnegative when every sum of p of its
eigenvalues is >= 0. The smallest such sum is the sum of the p smallest
eigenvalues, so every verdict here reads off sorted prefix sums.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .curvature import CurvatureSet
from .errors import StructuralError
from .hopf import HopfPoint, oracle
from .metric import Hopf, metric_jet
from .structure import structure_report

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-10
HERMITIAN_TOL = 1e-12

POSITIVE = "positive"
NONNEGATIVE = "nonnegative"
INDEFINITE = "indefinite"
NONPOSITIVE = "nonpositive"
NEGATIVE = "negative"

HYPOTHESES_ONLY = (
    "only the curvature hypotheses are checked, at the sampled points; "
    "no cohomology is computed and nothing is certified off the samples"
)


def _as_hermitian(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL * scale:
        raise StructuralError("matrix is not Hermitian")
    return 0.5 * (m + m.conj().T)


@dataclass
class PositivityReport:
    eigenvalues: np.ndarray
    tol: float = POSITIVITY_TOL
    point: np.ndarray = None

    @property
    def rank(self):
        return len(self.eigenvalues)

    def lowest_sum(self, p):
        self._check_p(p)
        return float(np.sum(self.eigenvalues[:p]))

    def highest_sum(self, p):
        self._check_p(p)
        return float(np.sum(self.eigenvalues[-p:]))

    def _check_p(self, p):
        if not 1 <= p <= self.rank:
            raise StructuralError(f"p must lie in 1..{self.rank}, got {p}")

    def is_positive(self, p=1):
        return self.lowest_sum(p) > self.tol

    def is_nonnegative(self, p=1):
        return self.lowest_sum(p) >= -self.tol

    def is_negative(self, p=1):
        return self.highest_sum(p) < -self.tol

    def is_nonpositive(self, p=1):
        return self.highest_sum(p) <= self.tol

    def verdict(self, p=1):
        if self.is_positive(p):
            return POSITIVE
        if self.is_negative(p):
            return NEGATIVE
        if self.is_nonnegative(p):
            return NONNEGATIVE
        if self.is_nonpositive(p):
            return NONPOSITIVE
        return INDEFINITE

    @property
    def verdicts(self):
        return {p: self.verdict(p) for p in range(1, self.rank + 1)}

    def as_dict(self):
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "verdicts": {str(p): v for p, v in self.verdicts.items()},
            "tol": self.tol,
        }


def p_positivity(m, tol=POSITIVITY_TOL, point=None):
    eigs = np.linalg.eigvalsh(_as_hermitian(m))
    return PositivityReport(eigenvalues=eigs, tol=tol, point=point)


def subset_minimum(eigenvalues, p):
    """Minimum over all p-subsets of the eigenvalue sum, by enumeration."""
    return min(float(sum(c)) for c in combinations(eigenvalues, p))


@dataclass
class GriffithsReport:
    minimum: float
    witness_u: np.ndarray
    witness_v: np.ndarray
    trials: int
    seed: int
    tol: float

    @property
    def semipositive(self):
        return self.minimum >= -self.tol

    @property
    def verdict(self):
        return NONNEGATIVE if self.semipositive else NEGATIVE

    def as_dict(self):
        return {
            "minimum": self.minimum,
            "semipositive": self.semipositive,
            "witness_u": self.witness_u,
            "witness_v": self.witness_v,
            "trials": self.trials,
            "seed": self.seed,
        }


def _unit_vectors(rng, count, n):
    g = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def griffiths_sample(t, trials=200, seed=0, tol=1e-12):
    """min R_{i jbar k lbar} u^i conj(u^j) v^k conj(v^l) over random unit u, v."""
    components = t.components if hasattr(t, "components") else np.asarray(t)
    n = components.shape[0]
    rng = np.random.default_rng(seed)
    u = _unit_vectors(rng, trials, n)
    v = _unit_vectors(rng, trials, n)
    values = np.einsum("ijkl,ti,tj,tk,tl->t", components, u, u.conj(), v, v.conj()).real
    worst = int(np.argmin(values))
    return GriffithsReport(
        minimum=float(values[worst]),
        witness_u=u[worst],
        witness_v=v[worst],
        trials=trials,
        seed=seed,
        tol=tol,
    )


# Curvature quantities a clause can constrain. Each maps a CurvatureSet (and
# an optional bundle Ricci matrix) to a matrix or a scalar.
def _bundle(curv, bundle):
    if bundle is None:
        return curv.riccis["chern-second"].matrix
    return bundle


QUANTITIES = {
    "bundle-trace": _bundle,
    "chern-second": lambda curv, bundle: curv.riccis["chern-second"].matrix,
    "hermitian": lambda curv, bundle: curv.riccis["hermitian"].matrix,
    "induced-gap": lambda curv, bundle: 2 * curv.riccis["induced-second"].matrix - curv.riccis["hermitian"].matrix,
    "bismut-first": lambda curv, bundle: curv.riccis["bismut-first"].matrix,
    "chern-scalar": lambda curv, bundle: curv.scalars.S_ch,
    "hermitian-scalar": lambda curv, bundle: curv.scalars.S,
    "bismut-scalar": lambda curv, bundle: curv.scalars.S_bm,
}


@dataclass(frozen=True)
class Clause:
    key: str
    quantity: str
    sign: str
    strict_somewhere: bool
    conclusion: str
    requires: str = None
    uses_p: bool = False


CLAUSES = {
    c.key: c
    for c in (
        Clause("bundle-parallel", "bundle-trace", NONPOSITIVE, False, "every dbar_E-closed section of E is parallel"),
        Clause("bundle-no-sections", "bundle-trace", NONPOSITIVE, True, "E has no dbar_E-harmonic section"),
        Clause(
            "bundle-exterior-no-sections", "bundle-trace", NONPOSITIVE, True,
            "Lambda^q E has no dbar_E-harmonic section for p <= q <= rank E", uses_p=True,
        ),
        Clause("chern-no-vector-fields", "chern-second", NONPOSITIVE, True, "no holomorphic vector field"),
        Clause("chern-no-forms", "chern-second", NONNEGATIVE, True, "no holomorphic (p,0)-form for 1 <= p <= n"),
        Clause(
            "chern-no-q-forms", "chern-second", NONNEGATIVE, True,
            "no holomorphic (q,0)-form for p <= q <= n", uses_p=True,
        ),
        Clause("chern-scalar-plurigenera", "chern-scalar", NONNEGATIVE, True, "H^0(M, mK_M) = 0 for m >= 1"),
        Clause(
            "hermitian-harmonic-forms", "hermitian", NONNEGATIVE, False,
            "holomorphic (q,0)-forms (q >= p) are d-harmonic", requires="balanced", uses_p=True,
        ),
        Clause(
            "hermitian-no-q-forms", "hermitian", NONNEGATIVE, True,
            "no holomorphic (q,0)-form for p <= q <= n", requires="balanced", uses_p=True,
        ),
        Clause(
            "hermitian-no-forms", "hermitian", NONNEGATIVE, True,
            "no holomorphic (p,0)-form for 1 <= p <= n", requires="balanced",
        ),
        Clause(
            "hermitian-scalar-plurigenera", "hermitian-scalar", NONNEGATIVE, True,
            "H^0(M, mK_M) = 0 for m >= 1", requires="balanced",
        ),
        Clause(
            "induced-vector-fields-closed", "induced-gap", NONPOSITIVE, False,
            "holomorphic vector fields are nabla'-closed", requires="balanced",
        ),
        Clause(
            "induced-no-vector-fields", "induced-gap", NONPOSITIVE, True,
            "no holomorphic vector field", requires="balanced",
        ),
        Clause(
            "bismut-parallel-forms", "bismut-first", NONNEGATIVE, False,
            "holomorphic (p,0)-forms are Chern-parallel", requires="skt",
        ),
        Clause(
            "bismut-no-forms", "bismut-first", NONNEGATIVE, True,
            "no holomorphic (p,0)-form for 1 <= p <= n", requires="skt",
        ),
        Clause(
            "bismut-no-q-forms", "bismut-first", NONNEGATIVE, True,
            "no holomorphic (q,0)-form for p <= q <= n", requires="skt", uses_p=True,
        ),
        Clause(
            "bismut-scalar-plurigenera", "bismut-scalar", NONNEGATIVE, True,
            "H^0(M, mK_M) = 0 for m >= 1", requires="skt",
        ),
    )
}


def _sign_checks(value, sign, p, tol):
    """(weak holds, strict holds) for a matrix or scalar value."""
    if np.ndim(value) == 0:
        x = complex(value).real
        if sign == NONNEGATIVE:
            return x >= -tol, x > tol
        return x <= tol, x < -tol
    report = p_positivity(value, tol)
    p = min(p, report.rank)
    if sign == NONNEGATIVE:
        return report.is_nonnegative(p), report.is_positive(p)
    return report.is_nonpositive(p), report.is_negative(p)


@dataclass
class ClauseReport:
    clause: str
    conclusion: str
    samples: int
    p: int
    holds: bool
    weak_everywhere: bool
    strict_somewhere: bool
    weak_witness: list = None
    strict_witness: list = None
    precondition: dict = None
    note: str = HYPOTHESES_ONLY
    values: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {
            "clause": self.clause,
            "conclusion": self.conclusion,
            "samples": self.samples,
            "p": self.p,
            "holds": self.holds,
            "weak_everywhere": self.weak_everywhere,
            "strict_somewhere": self.strict_somewhere,
            "weak_witness": self.weak_witness,
            "strict_witness": self.strict_witness,
            "precondition": self.precondition,
            "note": self.note,
        }


def vanishing_hypothesis_report(
    field_, points, clause, p=1, tol=POSITIVITY_TOL, bundle=None, order=2, classify_tol=1e-9, mapper=map
):
    """
    Evaluate one vanishing-theorem clause at the sample points.

    `bundle` is an optional callable MetricJet -> r x r matrix giving
    Tr_omega R^E of some metric connection; the Chern connection on T^{1,0}
    is used when it is omitted.
    """
    if clause not in CLAUSES:
        raise StructuralError(f"unknown clause {clause!r}; expected one of {sorted(CLAUSES)}")
    rule = CLAUSES[clause]
    p_used = p if rule.uses_p else 1
    quantity = QUANTITIES[rule.quantity]

    def one(z):
        mj = metric_jet(field_, z, order)
        curv = CurvatureSet(mj)
        extra = bundle(mj) if bundle is not None else None
        value = quantity(curv, extra)
        weak, strict = _sign_checks(value, rule.sign, p_used, tol)
        pre = None
        if rule.requires:
            report = structure_report(mj, classify_tol)
            pre = report.balanced if rule.requires == "balanced" else report.skt
        return z, weak, strict, pre

    rows = list(mapper(one, list(points)))
    weak_fail = next((z for z, weak, _, _ in rows if not weak), None)
    strict_hit = next((z for z, _, strict, _ in rows if strict), None)
    weak_all = weak_fail is None
    strict_any = strict_hit is not None
    holds = weak_all and (strict_any or not rule.strict_somewhere)

    precondition = None
    if rule.requires:
        satisfied = all(pre for *_, pre in rows)
        precondition = {"requires": rule.requires, "satisfied_at_samples": satisfied}
        if not satisfied:
            logger.debug("clause %s: %s precondition fails at some samples", clause, rule.requires)

    return ClauseReport(
        clause=clause,
        conclusion=rule.conclusion,
        samples=len(rows),
        p=p_used,
        holds=holds,
        weak_everywhere=weak_all,
        strict_somewhere=strict_any,
        weak_witness=None if weak_fail is None else _reals(weak_fail),
        strict_witness=None if strict_hit is None else _reals(strict_hit),
        precondition=precondition,
    )


def _reals(z):
    z = np.asarray(z, dtype=complex)
    return [float(v) for pair in zip(z.real, z.imag) for v in pair]


def hopf_positivity_checklist(n, points, tol=POSITIVITY_TOL, trials=200, seed=0, classify_tol=1e-9):
    """
    Positivity checklist of the canonical Hopf metric at the given points.

    Each entry maps to {"holds": bool, "witness": point or None}.
    """
    field_ = Hopf(n)
    checks = {
        "chern_second_positive": [],
        "chern_first_spectrum": [],
        "chern_griffiths_semipositive": [],
        "hermitian_nonnegative_2positive": [],
        "bismut_first_sign": [],
        "skt": [],
    }
    for k, z in enumerate(points):
        mj = metric_jet(field_, z, 2)
        curv = CurvatureSet(mj)
        r = curv.riccis
        r2 = float(np.sum(np.abs(z) ** 2))

        checks["chern_second_positive"].append(p_positivity(r["chern-second"].matrix, tol).is_positive(1))

        eigs = np.linalg.eigvalsh(_as_hermitian(r["chern-first"].matrix))
        expected = np.array([0.0] + [n / r2] * (n - 1))
        checks["chern_first_spectrum"].append(
            p_positivity(r["chern-first"].matrix, tol).is_nonnegative(1) and np.abs(eigs - expected).max() <= 1e-9
        )

        g = griffiths_sample(curv.chern, trials=trials, seed=seed + k)
        checks["chern_griffiths_semipositive"].append(g.semipositive)

        herm = p_positivity(r["hermitian"].matrix, tol)
        checks["hermitian_nonnegative_2positive"].append(herm.is_nonnegative(1) and herm.is_positive(min(2, n)))

        b1 = r["bismut-first"].matrix
        if n == 2:
            checks["bismut_first_sign"].append(bool(np.abs(b1).max() <= 1e-9))
        else:
            rep = p_positivity(b1, tol)
            checks["bismut_first_sign"].append(rep.is_nonpositive(1) and rep.is_negative(2))

        checks["skt"].append(structure_report(mj, classify_tol).skt)

    points = list(points)
    out = {}
    for key, results in checks.items():
        expected = not (key == "skt" and n != 2)
        bad = next((i for i, ok in enumerate(results) if ok != expected), None)
        out[key] = {
            "holds": bad is None,
            "expected": expected,
            "witness": None if bad is None else _reals(points[bad]),
        }
    return out


def hopf_oracle_chern_second(n, z):
    """Closed-form Theta^(2) of the Hopf metric, for spot checks in reports."""
    return oracle(HopfPoint(n, z), "chern_ricci2")
