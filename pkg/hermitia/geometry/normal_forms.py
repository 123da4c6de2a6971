"""
Random NormalForm metrics and the balanced / SKT constrained families.

A normal form is assembled from three pieces: the antisymmetric torsion X
(first derivatives at the origin), the mixed second derivatives
D2[i, j, k, l] = d_i d_jbar h_{k lbar}(0), and a random remainder of
holomorphic quadratic and cubic terms that leaves both untouched.
Constraints on D2 are linear over the reals once X is fixed, so the
constrained families project a random D2 onto them by least squares.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import StructuralError
from .metric import NormalForm, hermitianize, polynomial_exponents

logger = logging.getLogger(__name__)

BALANCED = "balanced"
SKT = "skt"
BALANCED_SKT = "balanced-skt"
RANDOM = "random"


@dataclass
class ConstrainedNormalForm:
    kind: str
    metric: NormalForm
    seed: int
    residuals: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)


def random_torsion(n, rng, scale=0.3):
    g = rng.normal(size=(n, n, n)) + 1j * rng.normal(size=(n, n, n))
    return scale * 0.5 * (g - g.transpose(1, 0, 2))


def balance_torsion(X):
    """Remove the trace mu_q = sum_i X[i, q, i] keeping antisymmetry; needs n >= 2."""
    n = X.shape[0]
    if n < 2:
        return np.zeros_like(X)
    a = np.einsum("iqi->q", X) / (n - 1)
    eye = np.eye(n)
    correction = np.einsum("il,q->iql", eye, a) - np.einsum("ql,i->iql", eye, a)
    return X - correction


def random_hessian(n, rng, scale=0.3):
    """Random D2 with conj(D2[i, j, k, l]) = D2[j, i, l, k]."""
    g = rng.normal(size=(n,) * 4) + 1j * rng.normal(size=(n,) * 4)
    return scale * 0.5 * (g + g.conj().transpose(1, 0, 3, 2))


def _traces(D2):
    return {
        "L": np.einsum("iikl->kl", D2),
        "Htr": np.einsum("klii->kl", D2),
        "E1": np.einsum("kiil->kl", D2),
        "E2": np.einsum("ilki->kl", D2),
    }


def _p1(X):
    Y = X.conj().transpose(0, 2, 1)
    return np.einsum("iql,ikq->kl", Y, X)


def balanced_constraint(X):
    """E1 = E2 = Htr - 2 P1 as (linear map of D2, target)."""
    target = -2 * _p1(X)

    def apply(D2):
        t = _traces(D2)
        return np.concatenate([(t["E1"] - t["Htr"]).ravel(), (t["E2"] - t["Htr"]).ravel()])

    return apply, np.concatenate([target.ravel(), target.ravel()])


def skt_constraint(n):
    """L + Htr = E1 + E2."""

    def apply(D2):
        t = _traces(D2)
        return (t["L"] + t["Htr"] - t["E1"] - t["E2"]).ravel()

    return apply, np.zeros(n * n, dtype=complex)


def _hermitian_defect(D2):
    return (D2 - D2.conj().transpose(1, 0, 3, 2)).ravel()


def project_hessian(D2, constraints):
    """
    Closest D2 (Frobenius norm) satisfying every (apply, target) constraint
    and the Hermitian symmetry. Returns the projected D2 and the residual.
    """
    n = D2.shape[0]
    size = D2.size
    maps = [c[0] for c in constraints] + [_hermitian_defect]
    targets = [c[1] for c in constraints] + [np.zeros(size, dtype=complex)]

    def stacked(v):
        return np.concatenate([m(v) for m in maps])

    basis = np.eye(2 * size)
    columns = []
    for b in basis:
        d = (b[:size] + 1j * b[size:]).reshape(D2.shape)
        columns.append(stacked(d))
    A = np.array(columns).T
    A = np.concatenate([A.real, A.imag])
    rhs = np.concatenate(targets) - stacked(D2)
    rhs = np.concatenate([rhs.real, rhs.imag])
    delta, *_ = linalg.lstsq(A, rhs)
    projected = D2 + (delta[:size] + 1j * delta[size:]).reshape((n,) * 4)
    residual = float(np.abs(stacked(projected) - np.concatenate(targets)).max())
    return projected, residual


def assemble(n, X, D2, rng, remainder=0.2, radius=0.1):
    """NormalForm with torsion X, mixed Hessian D2 and a random remainder."""
    exps = polynomial_exponents(n)
    coefficients = remainder * (rng.normal(size=(len(exps), n, n)) + 1j * rng.normal(size=(len(exps), n, n)))
    coefficients = hermitianize(exps, coefficients)
    for t, e in enumerate(exps):
        holo, anti = e[:n], e[n:]
        if holo.sum() == 1 and anti.sum() == 1:
            coefficients[t] = D2[int(np.argmax(holo)), int(np.argmax(anti))]
    return NormalForm(n, torsion=X, exponents=exps, coefficients=coefficients, radius=radius)


def random_normal_form(n, seed=0, torsion=True, scale=0.3):
    rng = np.random.default_rng(seed)
    X = random_torsion(n, rng, scale) if torsion else np.zeros((n, n, n), dtype=complex)
    D2 = random_hessian(n, rng, scale)
    return ConstrainedNormalForm(kind=RANDOM, metric=assemble(n, X, D2, rng), seed=seed)


def balanced_normal_form(n, seed=0, scale=0.3):
    if n < 2:
        raise StructuralError("balanced normal forms need n >= 2")
    rng = np.random.default_rng(seed)
    X = balance_torsion(random_torsion(n, rng, scale))
    D2, residual = project_hessian(random_hessian(n, rng, scale), [balanced_constraint(X)])
    residuals = {"torsion_trace": float(np.abs(np.einsum("iqi->q", X)).max()), "hessian": residual}
    logger.debug("balanced normal form n=%d seed=%d residuals %s", n, seed, residuals)
    return ConstrainedNormalForm(kind=BALANCED, metric=assemble(n, X, D2, rng), seed=seed, residuals=residuals)


def skt_normal_form(n, seed=0, scale=0.3):
    rng = np.random.default_rng(seed)
    X = random_torsion(n, rng, scale)
    D2, residual = project_hessian(random_hessian(n, rng, scale), [skt_constraint(n)])
    return ConstrainedNormalForm(kind=SKT, metric=assemble(n, X, D2, rng), seed=seed, residuals={"hessian": residual})


def balanced_skt_normal_form(n, seed=0, scale=0.3):
    """Balanced and SKT at the origin; the two together leave no room for torsion."""
    if n < 2:
        raise StructuralError("balanced normal forms need n >= 2")
    rng = np.random.default_rng(seed)
    X = np.zeros((n, n, n), dtype=complex)
    D2, residual = project_hessian(random_hessian(n, rng, scale), [balanced_constraint(X), skt_constraint(n)])
    return ConstrainedNormalForm(
        kind=BALANCED_SKT, metric=assemble(n, X, D2, rng), seed=seed, residuals={"hessian": residual}
    )


FAMILIES = {
    RANDOM: random_normal_form,
    BALANCED: balanced_normal_form,
    SKT: skt_normal_form,
    BALANCED_SKT: balanced_skt_normal_form,
}
