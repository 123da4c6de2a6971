"""
Closed-form curvature at points where the metric is the identity.

Everything here is written in terms of the first and second derivatives of h
at the point and never touches the Christoffel jet pipeline, so it serves as
an independent oracle for it. Notation, with every index a chart index:

    X[i, a, b]     = d h_{a bbar} / d z^i
    Y[j, a, b]     = d h_{a bbar} / d zbar^j
    D2[i, j, a, b] = d_i d_jbar h_{a bbar}

At a normal point (h = identity, Gamma^k_{ij} = 0) X is antisymmetric in its
first two slots and Y in its first and last.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import connection
from .errors import StructuralError


@dataclass(frozen=True, eq=False)
class UnitFrame:
    """Derivatives of h in linear coordinates z = p + P w in which h(p) = identity."""

    P: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    D2: np.ndarray

    @property
    def n(self):
        return self.X.shape[0]

    def tensor(self, t):
        """(i, jbar, k, lbar) tensor in chart coordinates to the unit frame."""
        P, Pb = self.P, self.P.conj()
        return np.einsum("ia,jb,kc,ld,ijkl->abcd", P, Pb, P, Pb, t)

    def matrix(self, m):
        return self.P.T @ m @ self.P.conj()

    def normal_defect(self):
        """max |Gamma^k_{ij}| at the point, in the unit frame."""
        return float(np.abs(self.X + self.X.transpose(1, 0, 2)).max()) / 2

    @cached_property
    def traces(self):
        return NormalTraces.from_frame(self)


def unit_frame(mj):
    H0 = mj.H0
    w, v = np.linalg.eigh(H0)
    S = (v * w**-0.5) @ v.conj().T
    P = S.conj()
    n = mj.n
    dH = connection.metric_gradient(mj).value
    D2 = connection.metric_hessian(mj)
    Pb = P.conj()
    X = np.einsum("ia,kc,ld,ikl->acd", P, P, Pb, dH[:n])
    Y = np.einsum("jb,kc,ld,jkl->bcd", Pb, P, Pb, dH[n:])
    D2 = np.einsum("ia,jb,kc,ld,ijkl->abcd", P, Pb, P, Pb, D2)
    return UnitFrame(P=P, X=X, Y=Y, D2=D2)


def require_normal(frame, tol=1e-10):
    if frame.normal_defect() > tol:
        raise StructuralError(
            f"point is not a normal point: Gamma^k_ij = {frame.normal_defect():.3g} in the unit frame"
        )


@dataclass(frozen=True, eq=False)
class NormalTraces:
    """The second-derivative traces and first-derivative products every Ricci formula is built from."""

    L: np.ndarray
    Htr: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    nu: np.ndarray
    mu: np.ndarray

    @classmethod
    def from_frame(cls, frame):
        X, Y, D2 = frame.X, frame.Y, frame.D2
        return cls(
            # sum_i d_i d_ibar h_{k lbar}
            L=np.einsum("iikl->kl", D2),
            # sum_i d_k d_lbar h_{i ibar}
            Htr=np.einsum("klii->kl", D2),
            # sum_i d_k d_ibar h_{i lbar}
            E1=np.einsum("kiil->kl", D2),
            # sum_i d_i d_lbar h_{k ibar}
            E2=np.einsum("ilki->kl", D2),
            # sum d_ibar h_{q lbar} d_i h_{k qbar}
            P1=np.einsum("iql,ikq->kl", Y, X),
            # sum d_ibar h_{k qbar} d_i h_{q lbar}
            P2=np.einsum("ikq,iql->kl", Y, X),
            nu=np.einsum("iiq->q", Y),
            mu=np.einsum("iqi->q", X),
        )


def lc_tensor_unit(frame):
    """
    Levi-Civita tensor R_{i jbar k lbar} at any point with h = identity,
    from the Christoffel symbols there and their first derivatives.
    """
    X, Y, D2 = frame.X, frame.Y, frame.D2
    # Gamma^l_{ik}, Gamma^l_{jbar k}, Gamma^{mbar}_{k jbar} at the point
    holo = 0.5 * (X + X.transpose(1, 0, 2))
    mixed = 0.5 * (Y - Y.transpose(2, 1, 0))
    mixed_bar = 0.5 * (X - X.transpose(1, 0, 2))

    second = -0.5 * (np.einsum("ilkj->ijkl", D2) + np.einsum("kjil->ijkl", D2))
    first = (
        -0.5 * np.einsum("iml,jkm->ijkl", X, Y - Y.transpose(2, 1, 0))
        + 0.5 * np.einsum("jml,ikm->ijkl", Y, X + X.transpose(1, 0, 2))
    )
    products = (
        np.einsum("jkm,iml->ijkl", mixed, holo)
        - np.einsum("ikm,jml->ijkl", holo, mixed)
        + np.einsum("kmj,mil->ijkl", mixed_bar, mixed)
    )
    return second + first + products


def normal_point_lc(frame):
    """R_{i jbar k lbar} at a normal point."""
    X, Y, D2 = frame.X, frame.Y, frame.D2
    return (
        -0.5 * (np.einsum("kjil->ijkl", D2) + np.einsum("ilkj->ijkl", D2))
        - np.einsum("iql,jkq->ijkl", X, Y)
        - np.einsum("kqj,liq->ijkl", X, Y)
    )


def normal_point_induced(frame):
    X, Y, D2 = frame.X, frame.Y, frame.D2
    return -0.5 * (np.einsum("kjil->ijkl", D2) + np.einsum("ilkj->ijkl", D2)) - np.einsum("iql,jkq->ijkl", X, Y)


def chern_tensor_unit(frame):
    """Theta_{i jbar k lbar} wherever h = identity: -d d-bar h + d h d-bar h."""
    return -frame.D2 + np.einsum("ikq,jql->ijkl", frame.X, frame.Y)


def normal_point_bismut(frame):
    X, Y, D2 = frame.X, frame.Y, frame.D2
    return (
        D2
        - np.einsum("ilkj->ijkl", D2)
        - np.einsum("kjil->ijkl", D2)
        - 4 * np.einsum("jkq,iql->ijkl", Y, X)
        - np.einsum("kiq,jql->ijkl", X, Y)
    )


def normal_point_ricci(frame):
    """Every Ricci matrix at a normal point, in the traces of `NormalTraces`."""
    t = frame.traces
    X, Y = frame.X, frame.Y
    E = t.E1 + t.E2
    torsion_terms = np.einsum("kql,q->kl", X, t.nu) + np.einsum("q,lkq->kl", t.mu, Y)
    return {
        "chern-first": -t.Htr + t.P1,
        "chern-second": -t.L + t.P1,
        "induced-first": -0.5 * E - t.P1,
        "induced-second": -0.5 * E - t.P2,
        "bismut-first": -E + t.Htr - 3 * t.P1,
        "bismut-second": -E + t.L + t.P1 - 4 * t.P2,
        "hermitian": -0.5 * E - t.P1 - t.P2,
        "complexified": -(t.L + t.Htr) - 2 * torsion_terms + 0.5 * E + t.P1 + t.P2,
    }


def balanced_ricci(frame):
    """Ricci matrices at a balanced normal point (nu = mu = 0, E1 = E2 = Htr - 2 P1)."""
    t = frame.traces
    first = -t.Htr + t.P1
    return {
        "chern-first": first,
        "induced-first": first,
        "bismut-first": first,
        "chern-second": -t.L + t.P1,
        "induced-second": -t.Htr + 2 * t.P1 - t.P2,
        "bismut-second": t.L - 2 * t.Htr + 5 * t.P1 - 4 * t.P2,
        "hermitian": -t.Htr + t.P1 - t.P2,
        "complexified": -t.L - t.P1 + t.P2,
    }


def balanced_ricci_without_trace_term(frame):
    """The balanced list with the second Bismut-Ricci form missing its L - Htr part."""
    out = dict(balanced_ricci(frame))
    t = frame.traces
    out["bismut-second"] = -t.Htr + 5 * t.P1 - 4 * t.P2
    return out


def skt_ricci(frame):
    """Ricci matrices at an SKT normal point (L + Htr = E1 + E2)."""
    t = frame.traces
    X, Y = frame.X, frame.Y
    S = t.L + t.Htr
    torsion_terms = np.einsum("kql,q->kl", X, t.nu) + np.einsum("q,lkq->kl", t.mu, Y)
    return {
        "chern-first": -t.Htr + t.P1,
        "chern-second": -t.L + t.P1,
        "induced-first": -0.5 * S - t.P1,
        "induced-second": -0.5 * S - t.P2,
        "bismut-first": -t.L - 3 * t.P1,
        "bismut-second": -t.Htr + t.P1 - 4 * t.P2,
        "hermitian": -0.5 * S - t.P1 - t.P2,
        "complexified": -0.5 * S + t.P1 + t.P2 - 2 * torsion_terms,
    }


def skt_ricci_alternate_bismut_first(frame):
    """The SKT list with the first Bismut-Ricci form written as -L + P1 - 4 P2."""
    out = dict(skt_ricci(frame))
    t = frame.traces
    out["bismut-first"] = -t.L + t.P1 - 4 * t.P2
    return out


def skt_sum_identities(riccis):
    """
    Residuals of the two readings of the SKT sum rule
    Theta2 + B2 = Theta1 + R1 (hatted and unhatted R1) and of the form that
    holds at every SKT point, Theta2 + B2 = Theta1 + B1 + 4 (Rhat2 - Rhat1).
    """
    lhs = riccis["chern-second"] + riccis["bismut-second"]
    return {
        "induced_reading": float(np.abs(lhs - riccis["chern-first"] - riccis["induced-first"]).max()),
        "hermitian_reading": float(np.abs(lhs - riccis["chern-first"] - riccis["hermitian"]).max()),
        "bismut_form": float(
            np.abs(
                lhs
                - riccis["chern-first"]
                - riccis["bismut-first"]
                - 4 * (riccis["induced-second"] - riccis["induced-first"])
            ).max()
        ),
    }


def balanced_second_derivative_defect(frame):
    """max deviation from nu = mu = 0 and E1 = E2 = Htr - 2 P1."""
    t = frame.traces
    target = t.Htr - 2 * t.P1
    return float(
        max(
            np.abs(t.nu).max(),
            np.abs(t.mu).max(),
            np.abs(t.E1 - target).max(),
            np.abs(t.E2 - target).max(),
        )
    )


def torsion_antisymmetry_defect(frame):
    """max |d h_{i jbar}/d zbar^k + d h_{i kbar}/d zbar^j|."""
    Y = frame.Y
    return float(np.abs(Y.transpose(1, 2, 0) + Y.transpose(1, 0, 2)).max())
