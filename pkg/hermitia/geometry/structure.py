"""
Pointwise structure classification of a Hermitian metric: Kahler, balanced
and SKT defects, the torsion 1-form, and the Laplacian comparison.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import connection
from .errors import OrderExhaustedError, StructuralError
from .jets import Jet
from .metric import metric_jet

logger = logging.getLogger(__name__)

CLASSIFY_TOL = 1e-9


def _require_order(mj, order):
    if mj.order < order:
        raise OrderExhaustedError(f"structure checks need a metric jet of order >= {order}, got {mj.order}")


def kahler_tensor(mj):
    """f[i, j, k] = d h_{i jbar} / d z^k - d h_{k jbar} / d z^i."""
    _require_order(mj, 1)
    dH = connection.metric_gradient(mj).value
    n = mj.n
    return dH[:n].transpose(1, 2, 0) - dH[:n].transpose(0, 2, 1)


def kahler_defect(mj):
    f = kahler_tensor(mj)
    return float(np.abs(f).max()), f


def balanced_torsion(mj, table=None):
    """eta_l = sum_j Gamma^{jbar}_{l jbar} from the Levi-Civita table."""
    _require_order(mj, 1)
    n = mj.n
    table = table or connection.levi_civita(mj)
    g = table.value
    return np.einsum("ljj->l", g[:n, n:, n:])


def torsion_routes(mj, table=None):
    """
    The torsion 1-form computed four ways. All four agree on every metric:
    the defining slot order, the swapped slot order Gamma^{jbar}_{jbar l},
    the conjugate of Gamma^{i}_{lbar i}, and -h times the barred trace
    h^{i jbar} Gamma^{lbar}_{i jbar}.
    """
    n = mj.n
    table = table or connection.levi_civita(mj)
    g = table.value
    return {
        "definition": balanced_torsion(mj, table),
        "swapped": np.einsum("jlj->l", g[n:, :n, n:]),
        "conjugate": np.einsum("lii->l", g[n:, :n, :n]).conj(),
        "trace": -mj.H0 @ connection.barred_trace(table, mj),
    }


def skt_residual(mj):
    """
    Chart residual of the SKT condition:
    sum_k (d_k d_kbar h_{i jbar} + d_i d_jbar h_{k kbar}
           - d_k d_jbar h_{i kbar} - d_i d_kbar h_{k jbar}).
    """
    _require_order(mj, 2)
    D2 = connection.metric_hessian(mj)
    return (
        np.einsum("kkij->ij", D2)
        + np.einsum("ijkk->ij", D2)
        - np.einsum("kjik->ij", D2)
        - np.einsum("ikkj->ij", D2)
    )


def skt_traced_residual(mj):
    """The SKT residual with the pair (k, kbar) traced by h^{k lbar} instead of delta."""
    _require_order(mj, 2)
    D2 = connection.metric_hessian(mj)
    HI = mj.HI0
    return np.einsum(
        "lk,klij->ij", HI, D2 + D2.transpose(2, 3, 0, 1) - D2.transpose(0, 3, 2, 1) - D2.transpose(2, 1, 0, 3)
    )


def skt_defect(mj):
    """(max modulus, matrix) of the chart residual `skt_residual`."""
    residual = skt_residual(mj)
    return float(np.abs(residual).max()), residual


@dataclass(frozen=True)
class LaplacianValues:
    dbar: complex
    d: complex
    canonical: complex

    def spread(self):
        values = (self.dbar, self.d, self.canonical)
        return float(max(abs(a - b) for a in values for b in values))


def laplacian_compare(mj, f, table=None):
    """
    The two Hodge Laplacians of a scalar jet f and the canonical Laplacian
    -h^{i jbar} d_i d_jbar f, at the point.
    """
    _require_order(mj, 1)
    if not isinstance(f, Jet) or f.ndim != 0:
        raise StructuralError("laplacian_compare needs a scalar jet")
    if f.order < 2:
        raise OrderExhaustedError("the Laplacian needs a function jet of order >= 2")
    n = mj.n
    HI = mj.HI0
    table = table or connection.levi_civita(mj)
    g = table.value

    hess = np.empty((n, n), dtype=complex)
    for i in range(n):
        di = f.d(i)
        for j in range(n):
            hess[i, j] = di.d(n + j).value
    grad = f.gradient().value

    canonical = -np.einsum("ji,ij->", HI, hess)
    cbar = connection.barred_trace(table, mj)
    c = np.einsum("ji,ijk->k", HI, g[:n, n:, :n])
    return LaplacianValues(
        dbar=complex(canonical + 2 * cbar @ grad[n:]),
        d=complex(canonical + 2 * c @ grad[:n]),
        canonical=complex(canonical),
    )


@dataclass(frozen=True)
class BalancedSktCheck:
    applicable: bool
    norm: float = None
    first_derivative_norm: float = None
    reason: str = ""


def balanced_skt_check(mj, tol=CLASSIFY_TOL):
    """
    At a point that is both balanced and SKT, the quadratic form
    sum |d h_{k qbar} / d z^i|^2 that the two conditions force to zero,
    measured as a quarter of |f|^2 so that it vanishes on Kahler data.
    """
    eta = balanced_torsion(mj)
    skt, _ = skt_defect(mj)
    if np.abs(eta).max() > tol or skt > tol:
        return BalancedSktCheck(
            applicable=False,
            reason=f"point is not balanced and SKT (torsion {np.abs(eta).max():.3g}, skt {skt:.3g})",
        )
    _, f = kahler_defect(mj)
    dH = connection.metric_gradient(mj).value
    return BalancedSktCheck(
        applicable=True,
        norm=float(0.25 * np.sum(np.abs(f) ** 2)),
        first_derivative_norm=float(np.sum(np.abs(dH[: mj.n]) ** 2)),
    )


@dataclass
class StructureReport:
    point: np.ndarray
    kahler_defect: float
    balanced_defect: float
    skt_defect: float
    skt_traced_defect: float
    tol: float
    torsion: np.ndarray = None
    notes: list = field(default_factory=list)

    @property
    def kahler(self):
        return self.kahler_defect <= self.tol

    @property
    def balanced(self):
        return self.balanced_defect <= self.tol

    @property
    def skt(self):
        return self.skt_defect <= self.tol


def structure_report(mj, tol=CLASSIFY_TOL):
    kd, _ = kahler_defect(mj)
    eta = balanced_torsion(mj)
    sd, _ = skt_defect(mj)
    notes = []
    if mj.n == 2:
        notes.append("for n = 2 the Gauduchon condition coincides with SKT")
    return StructureReport(
        point=mj.point,
        kahler_defect=kd,
        balanced_defect=float(np.abs(eta).max()),
        skt_defect=sd,
        skt_traced_defect=float(np.abs(skt_traced_residual(mj)).max()),
        tol=tol,
        torsion=eta,
        notes=notes,
    )


def halton_points(field_, count=None, seed=0):
    """3^{2n} Halton points of the unit cube mapped into the field's domain."""
    d = 2 * field_.n
    count = count or 3**d
    u = qmc.Halton(d=d, scramble=True, seed=seed).random(count)
    return field_.points_from_unit(u)


@dataclass
class SampledStructure:
    reports: list
    tol: float
    sampler: str
    seed: int

    @property
    def kahler(self):
        return all(r.kahler for r in self.reports)

    @property
    def balanced(self):
        return all(r.balanced for r in self.reports)

    @property
    def skt(self):
        return all(r.skt for r in self.reports)

    def worst(self, attribute):
        return max(self.reports, key=lambda r: getattr(r, attribute))


def sampled_structure(field_, points=None, tol=CLASSIFY_TOL, order=2, seed=0, mapper=map):
    """Classify a field at sample points; verdicts hold only on the samples."""
    sampler = "explicit"
    if points is None:
        points = halton_points(field_, seed=seed)
        sampler = "halton"

    def one(z):
        return structure_report(metric_jet(field_, z, order), tol)

    reports = list(mapper(one, list(points)))
    logger.debug("classified %d points with the %s sampler", len(reports), sampler)
    return SampledStructure(reports=reports, tol=tol, sampler=sampler, seed=seed)
