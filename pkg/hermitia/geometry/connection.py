"""
Christoffel tables of the complexified Levi-Civita, Chern and Bismut
connections.

Index convention: `entries[A, a, b]` is Gamma^b_{A a}, the b-component of
nabla_{d/dz^A} e_a. Direction indices A run over 0..2n-1 (z then zbar).
For Levi-Civita the frame is d/dz^0..d/dz^{2n-1}; for Chern and Bismut it is
the holomorphic frame d/dz^0..d/dz^{n-1} of T^{1,0}.
"""
from dataclasses import dataclass

import numpy as np

from .errors import OrderExhaustedError, StructuralError
from .jets import Jet, contract

LEVI_CIVITA = "levi-civita"
INDUCED = "induced"
CHERN = "chern"
BISMUT = "bismut"
KINDS = (LEVI_CIVITA, INDUCED, CHERN, BISMUT)


@dataclass(frozen=True, eq=False)
class ChristoffelTable:
    kind: str
    entries: Jet

    @property
    def n(self):
        return self.entries.n

    @property
    def order(self):
        return self.entries.order

    @property
    def value(self):
        return self.entries.value

    def symbol(self, upper, lower_a, lower_b):
        """Gamma^{upper}_{lower_a lower_b} at the point."""
        return self.entries.value[lower_a, lower_b, upper]

    def connection_matrices(self):
        """Matrices omega[A][a, b] = Gamma^b_{A a} acting on the frame of T^{1,0}."""
        n = self.n
        if self.kind == LEVI_CIVITA:
            return Jet(self.entries.space, self.entries.coeffs[:, :n, :n])
        return self.entries

    def lowered(self, mj):
        """Gamma_{A a bbar} = Gamma^c_{A a} h_{c bbar} for the T^{1,0} part."""
        omega = self.connection_matrices()
        h = mj.h.truncate(omega.order)
        return contract("Aac,cb->Aab", omega, h)


def metric_gradient(mj):
    """dH[A, a, b] = d h_{a bbar} / d z^A, order K-1."""
    return mj.h.gradient()


def metric_hessian(mj):
    """D2[i, j, k, l] = d_i d_jbar h_{k lbar} at the point."""
    n = mj.n
    if mj.order < 2:
        raise OrderExhaustedError("second derivatives need a metric jet of order >= 2")
    out = np.empty((n, n, n, n), dtype=complex)
    for i in range(n):
        di = mj.h.d(i)
        for j in range(n):
            out[i, j] = di.d(n + j).value
    return out


def real_metric(h):
    """The symmetric 2n x 2n complexified metric g_{AB} built from h."""
    n = h.shape[0]
    space = h.space
    g = np.zeros((2 * n, 2 * n, space.size), dtype=complex)
    g[:n, n:] = h.coeffs
    g[n:, :n] = h.coeffs.transpose(1, 0, 2)
    return Jet(space, g)


def real_metric_inverse(hinv):
    n = hinv.shape[0]
    space = hinv.space
    g = np.zeros((2 * n, 2 * n, space.size), dtype=complex)
    g[:n, n:] = hinv.coeffs.transpose(1, 0, 2)
    g[n:, :n] = hinv.coeffs
    return Jet(space, g)


def levi_civita(mj):
    """Gamma^C_{AB} = g^{CE} (d_A g_{BE} + d_B g_{AE} - d_E g_{AB}) / 2."""
    G = real_metric(mj.h)
    D = G.gradient()
    T = D.transpose(1, 0, 2) + D - D.transpose(1, 2, 0)
    Ginv = real_metric_inverse(mj.hinv).truncate(D.order)
    return ChristoffelTable(LEVI_CIVITA, contract("ce,abe->abc", Ginv, T) * 0.5)


def chern(mj):
    """Gamma^b_{i a} = h^{b qbar} d_i h_{a qbar}; barred directions vanish."""
    n = mj.n
    dH = metric_gradient(mj)
    hinv = mj.hinv.truncate(dH.order)
    holo = contract("iaq,qb->iab", dH[:n], hinv)
    entries = np.zeros((2 * n, n, n, dH.space.size), dtype=complex)
    entries[:n] = holo.coeffs
    return ChristoffelTable(CHERN, Jet(dH.space, entries))


def bismut(mj):
    """
    Lowered Bismut symbols: Gamma_{i a bbar} = d_a h_{i bbar} and
    Gamma_{jbar a bbar} = d_jbar h_{a bbar} - d_bbar h_{a jbar}.
    """
    n = mj.n
    dH = metric_gradient(mj)
    hinv = mj.hinv.truncate(dH.order)
    holo = contract("aiq,qb->iab", dH[:n], hinv)
    dHb = dH[n:]
    anti = contract("jaq,qb->jab", dHb - dHb.transpose(2, 1, 0), hinv)
    entries = np.concatenate([holo.coeffs, anti.coeffs], axis=0)
    return ChristoffelTable(BISMUT, Jet(dH.space, entries))


def build(mj, kind):
    if kind in (LEVI_CIVITA, INDUCED):
        return levi_civita(mj)
    if kind == CHERN:
        return chern(mj)
    if kind == BISMUT:
        return bismut(mj)
    raise StructuralError(f"unknown connection kind {kind!r}")


def conjugation_defect(table):
    """max |conj(Gamma^C_{AB}) - Gamma^{Cbar}_{Abar Bbar}| for Levi-Civita tables."""
    if table.kind != LEVI_CIVITA:
        raise StructuralError("conjugation symmetry is stated for Levi-Civita tables")
    n = table.n
    flip = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
    gamma = table.value
    return float(np.abs(gamma.conj() - gamma[np.ix_(flip, flip, flip)]).max())


def torsion_free_defect(table):
    gamma = table.value
    return float(np.abs(gamma - gamma.transpose(1, 0, 2)).max())


def block_defect(table):
    """Entries forced to vanish by h_{ij} = 0: Gamma^{kbar}_{ij} and its conjugate."""
    n = table.n
    gamma = table.value
    return float(max(np.abs(gamma[:n, :n, n:]).max(), np.abs(gamma[n:, n:, :n]).max()))


def barred_trace(table, mj):
    """h^{i jbar} Gamma^{lbar}_{i jbar} from a Levi-Civita table, at the point."""
    n = mj.n
    gamma = table.value
    return np.einsum("ji,ijl->l", mj.HI0, gamma[:n, n:, n:])
