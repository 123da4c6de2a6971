"""
Curvature tensors of the four connections and their Ricci and scalar
contractions, evaluated at the point of a MetricJet.

Tensors are stored in the order (i, jbar, k, lbar) and lowered with the
metric: R_{i jbar k lbar} = R(d_i, d_jbar)^m_k h_{m lbar}. Inverse metric
entries h^{i jbar} are HI0[j, i].
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from . import connection
from .connection import BISMUT, CHERN, INDUCED, LEVI_CIVITA
from .errors import OrderExhaustedError, StructuralError

logger = logging.getLogger(__name__)

HERMITIAN = "hermitian"
COMPLEXIFIED = "complexified"
FIRST = "first"
SECOND = "second"
FLAVORS = (HERMITIAN, COMPLEXIFIED, FIRST, SECOND)


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    kind: str
    components: np.ndarray
    point: np.ndarray
    full: np.ndarray = None

    @property
    def n(self):
        return self.components.shape[0]

    def hermitian_defect(self):
        """max |conj(R_{i jbar k lbar}) - R_{j ibar l kbar}|."""
        t = self.components
        return float(np.abs(t.conj() - t.transpose(1, 0, 3, 2)).max())

    def pair_symmetry_defect(self):
        t = self.components
        return float(np.abs(t - t.transpose(2, 3, 0, 1)).max())

    def contract(self, u, v):
        """R_{i jbar k lbar} u^i conj(u^j) v^k conj(v^l)."""
        return np.einsum("ijkl,i,j,k,l->", self.components, u, np.conj(u), v, np.conj(v))


@dataclass(frozen=True, eq=False)
class RicciMatrix:
    flavor: str
    kind: str
    matrix: np.ndarray
    point: np.ndarray

    @property
    def label(self):
        if self.flavor in (HERMITIAN, COMPLEXIFIED):
            return self.flavor
        return f"{self.kind}-{self.flavor}"

    def hermitian_defect(self):
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


@dataclass(frozen=True)
class ScalarReport:
    point: np.ndarray
    s_h: complex
    S: complex
    S_lc: complex
    S_ch: complex
    S_bm: complex

    def as_dict(self):
        return {"s_h": self.s_h, "S": self.S, "S_lc": self.S_lc, "S_ch": self.S_ch, "S_bm": self.S_bm}

    def max_imag(self):
        return max(abs(complex(v).imag) for v in self.as_dict().values())


def _require_order(mj, order):
    if mj.order < order:
        raise OrderExhaustedError(f"curvature needs a metric jet of order >= {order}, got {mj.order}")


def bundle_curvature(omega):
    """
    F[A, B, a, c] = R(d_A, d_B) e_a component c, at the point, for connection
    matrices omega[A][a, c] = Gamma^c_{A a}.
    """
    if omega.order < 1:
        raise OrderExhaustedError("curvature needs connection matrices of order >= 1")
    w0 = omega.value
    dw = omega.gradient().value
    prod = np.einsum("Bac,Acd->ABad", w0, w0)
    return dw - dw.transpose(1, 0, 2, 3) + prod - prod.transpose(1, 0, 2, 3)


def _lowered_slice(F, fiber_metric, n):
    return np.einsum("ijam,mb->ijab", F[:n, n:], fiber_metric)


def curvature_lc(mj, table=None):
    _require_order(mj, 2)
    n = mj.n
    table = table or connection.levi_civita(mj)
    F = bundle_curvature(table.entries)
    G0 = connection.real_metric(mj.h).value
    full = np.einsum("ABCE,ED->ABCD", F, G0)
    return CurvatureTensor(LEVI_CIVITA, full[:n, n:, :n, n:].copy(), mj.point, full=full)


def curvature_induced(mj, table=None):
    _require_order(mj, 2)
    table = table or connection.levi_civita(mj)
    F = bundle_curvature(table.connection_matrices())
    return CurvatureTensor(INDUCED, _lowered_slice(F, mj.H0, mj.n), mj.point)


def curvature_chern(mj):
    _require_order(mj, 2)
    F = bundle_curvature(connection.chern(mj).entries)
    return CurvatureTensor(CHERN, _lowered_slice(F, mj.H0, mj.n), mj.point)


def curvature_bismut(mj):
    _require_order(mj, 2)
    F = bundle_curvature(connection.bismut(mj).entries)
    return CurvatureTensor(BISMUT, _lowered_slice(F, mj.H0, mj.n), mj.point)


def curvature(mj, kind):
    if kind == LEVI_CIVITA:
        return curvature_lc(mj)
    if kind == INDUCED:
        return curvature_induced(mj)
    if kind == CHERN:
        return curvature_chern(mj)
    if kind == BISMUT:
        return curvature_bismut(mj)
    raise StructuralError(f"unknown curvature kind {kind!r}")


def ricci(t, mj, flavor):
    HI = mj.HI0
    if flavor in (HERMITIAN, COMPLEXIFIED) and t.kind != LEVI_CIVITA:
        raise StructuralError(f"{flavor} Ricci curvature is defined for the Levi-Civita tensor, not {t.kind}")
    if flavor == FIRST:
        m = np.einsum("lk,ijkl->ij", HI, t.components)
    elif flavor in (SECOND, HERMITIAN):
        m = np.einsum("ji,ijkl->kl", HI, t.components)
    elif flavor == COMPLEXIFIED:
        n = t.n
        m = np.einsum("ji,kjil->kl", HI, t.components) + np.einsum(
            "ji,kijl->kl", HI, t.full[:n, :n, n:, n:]
        )
    else:
        raise StructuralError(f"unknown Ricci flavor {flavor!r}")
    return RicciMatrix(flavor, t.kind, m, t.point)


def complexified_ricci_bianchi(t, mj):
    """h^{i jbar} (2 R_{k jbar i lbar} - R_{k lbar i jbar})."""
    if t.kind != LEVI_CIVITA:
        raise StructuralError("the Bianchi route needs the Levi-Civita tensor")
    HI = mj.HI0
    m = 2 * np.einsum("ji,kjil->kl", HI, t.components) - np.einsum("ji,klij->kl", HI, t.components)
    return RicciMatrix(COMPLEXIFIED, LEVI_CIVITA, m, t.point)


def ricci_first_chern_logdet(mj):
    """-d_i d_jbar log det h."""
    _require_order(mj, 2)
    n = mj.n
    logdet = mj.det.log()
    m = np.empty((n, n), dtype=complex)
    for i in range(n):
        di = logdet.d(i)
        for j in range(n):
            m[i, j] = -di.d(n + j).value
    return RicciMatrix(FIRST, CHERN, m, mj.point)


def double_trace(t, mj):
    return complex(np.einsum("ji,lk,ijkl->", mj.HI0, mj.HI0, t.components))


def difference_tensor(mj, table=None):
    """
    R - Rhat on the (1,1) slice as the product of mixed Christoffel symbols:
    sum_m Gamma^{mbar}_{jbar k} Gamma^p_{i mbar} h_{p lbar}.
    """
    n = mj.n
    table = table or connection.levi_civita(mj)
    g = table.value
    return np.einsum("jkm,imp,pl->ijkl", g[n:, :n, n:], g[:n, n:, :n], mj.H0)


def exterior_power_action(m, q):
    """Matrix of the derivation induced by m on the q-th exterior power."""
    m = np.asarray(m)
    r = m.shape[0]
    basis = list(combinations(range(r), q))
    index = {s: k for k, s in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, subset in enumerate(basis):
        for pos, s in enumerate(subset):
            rest = subset[:pos] + subset[pos + 1 :]
            for t in range(r):
                if t in rest:
                    continue
                target = tuple(sorted(rest + (t,)))
                # moving t from slot `pos` to its sorted slot
                slot = target.index(t)
                sign = (-1) ** abs(slot - pos)
                out[index[target], col] += sign * m[t, s]
    return out


def exterior_power_ricci(m, q):
    """Smallest eigenvalue of the Lambda^q action; equals the sum of the q smallest of m."""
    action = exterior_power_action(m, q)
    return float(np.linalg.eigvalsh(0.5 * (action + action.conj().T))[0])


class CurvatureSet:
    """Every tensor and contraction at one point, computed on demand."""

    def __init__(self, mj):
        _require_order(mj, 2)
        self.mj = mj

    @cached_property
    def lc_table(self):
        return connection.levi_civita(self.mj)

    @cached_property
    def lc(self):
        return curvature_lc(self.mj, self.lc_table)

    @cached_property
    def induced(self):
        return curvature_induced(self.mj, self.lc_table)

    @cached_property
    def chern(self):
        return curvature_chern(self.mj)

    @cached_property
    def bismut(self):
        return curvature_bismut(self.mj)

    def tensor(self, kind):
        return {LEVI_CIVITA: self.lc, INDUCED: self.induced, CHERN: self.chern, BISMUT: self.bismut}[kind]

    @cached_property
    def riccis(self):
        out = {}
        for flavor in (HERMITIAN, COMPLEXIFIED):
            r = ricci(self.lc, self.mj, flavor)
            out[r.label] = r
        for kind in (INDUCED, CHERN, BISMUT):
            for flavor in (FIRST, SECOND):
                r = ricci(self.tensor(kind), self.mj, flavor)
                out[r.label] = r
        return out

    @cached_property
    def scalars(self):
        HI = self.mj.HI0
        return ScalarReport(
            point=self.mj.point,
            s_h=complex(np.einsum("lk,kl->", HI, self.riccis[COMPLEXIFIED].matrix)),
            S=complex(np.einsum("lk,kl->", HI, self.riccis[HERMITIAN].matrix)),
            S_lc=double_trace(self.induced, self.mj),
            S_ch=double_trace(self.chern, self.mj),
            S_bm=double_trace(self.bismut, self.mj),
        )

    def kahler_coincidence(self):
        """Spread between the four tensors and between the eight Ricci matrices."""
        base = self.lc.components
        riccis = [r.matrix for r in self.riccis.values()]
        return {
            "chern_vs_lc": float(np.abs(self.chern.components - base).max()),
            "induced_vs_lc": float(np.abs(self.induced.components - base).max()),
            "bismut_vs_lc": float(np.abs(self.bismut.components - base).max()),
            "ricci_spread": float(max(np.abs(m - riccis[0]).max() for m in riccis)),
        }


def scalars(mj):
    return CurvatureSet(mj).scalars
