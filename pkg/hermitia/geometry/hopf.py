"""
Closed forms for the canonical Hopf metric h = 4 delta / |z|^2 on C^n \\ {0}.

Every quantity uses the library's index conventions: tensors in order
(i, jbar, k, lbar), Christoffel tables as entries[A, a, b] = Gamma^b_{A a}.
"""
from dataclasses import dataclass

import numpy as np

from . import connection
from .curvature import COMPLEXIFIED, CurvatureSet
from .errors import DomainError, StructuralError
from .metric import Hopf, metric_jet

QUANTITIES = (
    "metric",
    "dh",
    "d2h",
    "lc_christoffel",
    "chern_tensor",
    "chern_ricci1",
    "chern_ricci2",
    "lc_tensor",
    "hermitian_ricci",
    "bismut_tensor",
    "bismut_ricci1",
    "bismut_ricci2",
)
BISMUT_RICCI_QUANTITIES = ("bismut_ricci1", "bismut_ricci2")


@dataclass(frozen=True, eq=False)
class HopfPoint:
    n: int
    z: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("the Hopf manifold needs n >= 2")
        z = np.asarray(self.z, dtype=complex).reshape(-1)
        if z.shape != (self.n,):
            raise DomainError(f"expected {self.n} coordinates")
        if np.sum(np.abs(z) ** 2) <= np.finfo(float).tiny:
            raise DomainError("the Hopf metric is undefined at z = 0")
        object.__setattr__(self, "z", z)

    @property
    def r2(self):
        return float(np.sum(np.abs(self.z) ** 2))


def random_points(n, count, seed=0, rmin=1.0, rmax=2.0):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radius = rng.uniform(rmin, rmax, size=(count, 1))
    return [HopfPoint(n, z) for z in radius * g]


def oracle(p, quantity, quadratic_denominator=False):
    n, z, r2 = p.n, p.z, p.r2
    zb = z.conj()
    eye = np.eye(n)
    # outer[a, b] = zbar^a z^b
    outer = np.outer(zb, z)

    if quantity == "metric":
        return 4.0 / r2 * eye.astype(complex)

    if quantity == "dh":
        out = np.empty((2 * n, n, n), dtype=complex)
        out[:n] = -4.0 * zb[:, None, None] * eye / r2**2
        out[n:] = -4.0 * z[:, None, None] * eye / r2**2
        return out

    if quantity == "d2h":
        # d_i d_jbar h_{k lbar}
        return -4.0 * np.einsum("kl,ij->ijkl", eye, eye * r2 - 2 * outer) / r2**3

    if quantity == "lc_christoffel":
        g = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
        # Gamma^l_{ik}
        holo = -(np.einsum("il,k->ikl", eye, zb) + np.einsum("kl,i->ikl", eye, zb)) / (2 * r2)
        # Gamma^l_{jbar k}
        mixed = (np.einsum("jk,l->jkl", eye, z) - np.einsum("kl,j->jkl", eye, z)) / (2 * r2)
        g[:n, :n, :n] = holo
        g[n:, :n, :n] = mixed
        g[:n, n:, :n] = mixed.transpose(1, 0, 2)
        g[n:, n:, n:] = holo.conj()
        g[:n, n:, n:] = mixed.conj()
        g[n:, :n, n:] = mixed.conj().transpose(1, 0, 2)
        return g

    if quantity == "chern_tensor":
        return 4.0 * np.einsum("kl,ij->ijkl", eye, eye * r2 - outer) / r2**3

    if quantity == "chern_ricci1":
        return n * (eye * r2 - outer) / r2**2

    if quantity == "chern_ricci2":
        return (n - 1) * eye.astype(complex) / r2

    if quantity == "lc_tensor":
        # 2 d_il d_jk / |z|^4 - (d_il z^j zbar^k + d_jk z^l zbar^i) / |z|^6
        first = 2.0 * np.einsum("il,jk->ijkl", eye, eye) / r2**2
        second = np.einsum("il,kj->ijkl", eye, outer) + np.einsum("jk,il->ijkl", eye, outer)
        return first - second / r2**3

    if quantity == "hermitian_ricci":
        return (eye * r2 - outer) / (2 * r2**2)

    if quantity == "bismut_tensor":
        # B_{i jbar k}^l lowered with h_{l lbar} = 4 / |z|^2
        mixed = (np.einsum("jk,il->ijkl", eye, eye) - np.einsum("kl,ij->ijkl", eye, eye)) / r2
        quartic = (
            np.einsum("ij,kl->ijkl", eye, outer)
            + np.einsum("kl,ij->ijkl", eye, outer)
            - np.einsum("il,kj->ijkl", eye, outer)
            - np.einsum("jk,il->ijkl", eye, outer)
        ) / r2**2
        return (4.0 / r2) * (mixed + quartic)

    if quantity in BISMUT_RICCI_QUANTITIES:
        denominator = 4 * r2 if quadratic_denominator else r2**2
        return (2 - n) * (eye * r2 - outer) / denominator

    raise StructuralError(f"unknown Hopf quantity {quantity!r}")


def pipeline(p, quantity, order=3):
    """The same quantity computed from jets of the Hopf metric."""
    return pipeline_values(p, order)[quantity]


def pipeline_values(p, order=3):
    mj = metric_jet(Hopf(p.n), p.z, order)
    curv = CurvatureSet(mj)
    r = curv.riccis
    return {
        "metric": mj.H0,
        "dh": connection.metric_gradient(mj).value,
        "d2h": connection.metric_hessian(mj),
        "lc_christoffel": curv.lc_table.value,
        "chern_tensor": curv.chern.components,
        "chern_ricci1": r["chern-first"].matrix,
        "chern_ricci2": r["chern-second"].matrix,
        "lc_tensor": curv.lc.components,
        "hermitian_ricci": r["hermitian"].matrix,
        "bismut_tensor": curv.bismut.components,
        "bismut_ricci1": r["bismut-first"].matrix,
        "bismut_ricci2": r["bismut-second"].matrix,
        "complexified_ricci": r[COMPLEXIFIED].matrix,
    }


def _match(quadratic, quartic, tol):
    if quadratic <= tol and quartic <= tol:
        return "both"
    if quadratic <= tol:
        return "quadratic"
    if quartic <= tol:
        return "quartic"
    return "neither"


def oracle_vs_pipeline(p, order=3, tol=1e-10, quadratic_denominator=None):
    """
    Max componentwise |oracle - pipeline| for every quantity.

    For the two Bismut-Ricci closed forms both the quadratic |z|^2 and the
    quartic |z|^4 denominators are compared; unless `quadratic_denominator` is
    given, the residual reported is that of the quadratic form when it matches
    and of the quartic form otherwise.
    """
    values = pipeline_values(p, order)
    residuals = {}
    denominators = {}
    for q in QUANTITIES:
        if q in BISMUT_RICCI_QUANTITIES:
            quadratic = float(np.abs(oracle(p, q, True) - values[q]).max())
            quartic = float(np.abs(oracle(p, q, False) - values[q]).max())
            if quadratic_denominator is None:
                use_quadratic = quadratic <= tol
            else:
                use_quadratic = quadratic_denominator
            residuals[q] = quadratic if use_quadratic else quartic
            denominators[q] = {"quadratic": quadratic, "quartic": quartic, "matched": _match(quadratic, quartic, tol)}
        else:
            residuals[q] = float(np.abs(oracle(p, q) - values[q]).max())
    return {"n": p.n, "point": p.z, "residuals": residuals, "bismut_ricci_denominator": denominators}


def unitary_transform(matrix, u):
    """(1,1)-tensor a_{k lbar} under w = U z: conj(U) a U^T."""
    return u.conj() @ matrix @ u.T
