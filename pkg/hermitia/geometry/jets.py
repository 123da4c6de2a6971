"""
Truncated power series in the 2n formal variables z^1..z^n, zbar^1..zbar^n.

A jet stores its coefficients densely, one slot per monomial of total degree
at most K. Monomials are enumerated degree by degree, so the monomials of a
lower truncation order are always a prefix of a higher one and truncation is
a slice. Products go through a precomputed sparse map from pairs of monomials
to their product monomial.

Variables 0..n-1 are z^1..z^n and n..2n-1 are zbar^1..zbar^n. A jet may carry
leading index axes (a matrix of jets is a Jet with coeffs of shape
(r, r, M)); arithmetic broadcasts over those axes like numpy does.
"""
import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
import scipy.sparse as sp

from .errors import OrderExhaustedError, SingularSeriesError, StructuralError

HOLOMORPHIC = "holomorphic"
ANTIHOLOMORPHIC = "antiholomorphic"

# reserved einsum letter for the pair axis of a jet product
_PAIR = "Z"


class JetSpace:
    """Monomial bookkeeping for a given (n, K)."""

    def __init__(self, n, order):
        if n < 1 or order < 0:
            raise StructuralError(f"invalid jet space n={n}, order={order}")
        self.n = n
        self.order = order
        self.nvars = 2 * n

        exps = []
        for degree in range(order + 1):
            for combo in combinations_with_replacement(range(self.nvars), degree):
                e = [0] * self.nvars
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
        self.exponents = np.array(exps, dtype=np.int64).reshape(len(exps), self.nvars)
        self.degrees = self.exponents.sum(axis=1)
        self.size = len(exps)
        self.index = {e: i for i, e in enumerate(exps)}

        swapped = np.concatenate([self.exponents[:, n:], self.exponents[:, :n]], axis=1)
        self.conj_perm = np.array([self.index[tuple(e)] for e in swapped], dtype=np.int64)

        pa, pb, pc = [], [], []
        for a, ea in enumerate(exps):
            room = order - self.degrees[a]
            for b, eb in enumerate(exps):
                if self.degrees[b] > room:
                    break
                pa.append(a)
                pb.append(b)
                pc.append(self.index[tuple(x + y for x, y in zip(ea, eb))])
        self.pa = np.array(pa, dtype=np.int64)
        self.pb = np.array(pb, dtype=np.int64)
        self.pc = np.array(pc, dtype=np.int64)
        self.pairs = len(pa)
        self.reducer = sp.csr_matrix(
            (np.ones(self.pairs), (self.pc, np.arange(self.pairs))),
            shape=(self.size, self.pairs),
        )
        self._derivative_maps = {}

    def __repr__(self):
        return f"JetSpace(n={self.n}, order={self.order})"

    def reduce(self, vals):
        """Sum pair products (..., pairs) onto their monomials (..., size)."""
        lead = vals.shape[:-1]
        flat = vals.reshape(-1, self.pairs)
        out = np.asarray(self.reducer @ flat.T).T
        return out.reshape(lead + (self.size,))

    def derivative_map(self, var):
        if self.order == 0:
            raise OrderExhaustedError("cannot differentiate an order-0 jet")
        if var not in self._derivative_maps:
            lower = jet_space(self.n, self.order - 1)
            src, tgt, factor = [], [], []
            for i, e in enumerate(self.exponents):
                if e[var] == 0:
                    continue
                reduced = e.copy()
                reduced[var] -= 1
                src.append(i)
                tgt.append(lower.index[tuple(reduced)])
                factor.append(e[var])
            self._derivative_maps[var] = (
                np.array(src, dtype=np.int64),
                np.array(tgt, dtype=np.int64),
                np.array(factor, dtype=float),
            )
        return self._derivative_maps[var]


@lru_cache(maxsize=None)
def jet_space(n, order):
    return JetSpace(n, order)


def _variable_index(n, which, index):
    if which in (HOLOMORPHIC, "z"):
        offset = 0
    elif which in (ANTIHOLOMORPHIC, "zbar"):
        offset = n
    else:
        raise StructuralError(f"unknown derivative type {which!r}")
    if not 0 <= index < n:
        raise StructuralError(f"derivative index {index} out of range for n={n}")
    return offset + index


class Jet:
    """Immutable array of truncated power series sharing one JetSpace."""

    __slots__ = ("space", "coeffs")
    __array_ufunc__ = None

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[-1:] != (space.size,):
            raise StructuralError(
                f"coefficient axis {coeffs.shape[-1:]} does not match {space!r}"
            )
        self.space = space
        self.coeffs = coeffs

    # construction

    @classmethod
    def zeros(cls, n, order, shape=()):
        space = jet_space(n, order)
        return cls(space, np.zeros(tuple(shape) + (space.size,), dtype=complex))

    @classmethod
    def constant(cls, n, order, value):
        value = np.asarray(value, dtype=complex)
        space = jet_space(n, order)
        coeffs = np.zeros(value.shape + (space.size,), dtype=complex)
        coeffs[..., 0] = value
        return cls(space, coeffs)

    @classmethod
    def variables(cls, n, order):
        """The 2n coordinate jets z^1..z^n, zbar^1..zbar^n stacked on axis 0."""
        if order < 1:
            raise OrderExhaustedError("coordinate jets need order >= 1")
        space = jet_space(n, order)
        coeffs = np.zeros((2 * n, space.size), dtype=complex)
        for v in range(2 * n):
            e = [0] * (2 * n)
            e[v] = 1
            coeffs[v, space.index[tuple(e)]] = 1.0
        return cls(space, coeffs)

    # shape

    @property
    def n(self):
        return self.space.n

    @property
    def order(self):
        return self.space.order

    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self):
        """Constant term: the value at the expansion point."""
        return self.coeffs[..., 0]

    def coefficient(self, alpha, beta):
        key = tuple(int(a) for a in alpha) + tuple(int(b) for b in beta)
        if len(key) != self.space.nvars:
            raise StructuralError(f"multi-degree {key} has wrong length for n={self.n}")
        if key not in self.space.index:
            return np.zeros(self.shape, dtype=complex)
        return self.coeffs[..., self.space.index[key]]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if len(key) > self.ndim or any(k is Ellipsis for k in key):
            raise StructuralError(f"cannot index jet of shape {self.shape} with {key}")
        return Jet(self.space, self.coeffs[key])

    def transpose(self, *axes):
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.space, self.coeffs.transpose(*axes, self.ndim))

    @property
    def T(self):
        return self.transpose()

    def reshape(self, *shape):
        return Jet(self.space, self.coeffs.reshape(*shape, self.space.size))

    def sum(self, axis=None):
        if axis is None:
            axis = tuple(range(self.ndim))
        return Jet(self.space, self.coeffs.sum(axis=axis))

    def trace(self, axis1=0, axis2=1):
        return Jet(self.space, np.trace(self.coeffs, axis1=axis1, axis2=axis2))

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for k in range(self.shape[0]):
            yield self[k]

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, shape={self.shape})"

    # arithmetic

    def _check(self, other):
        if (other.space.n, other.space.order) != (self.space.n, self.space.order):
            raise StructuralError(
                f"jet operands disagree: {self.space!r} vs {other.space!r}"
            )

    def _lift(self, value):
        value = np.asarray(value, dtype=complex)
        coeffs = np.zeros(value.shape + (self.space.size,), dtype=complex)
        coeffs[..., 0] = value
        return coeffs

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.coeffs + other.coeffs)
        return Jet(self.space, self.coeffs + self._lift(other))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return Jet(self.space, self.coeffs * np.asarray(other, dtype=complex)[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, jet_inverse(other))
        return Jet(self.space, self.coeffs / np.asarray(other, dtype=complex)[..., None])

    def __matmul__(self, other):
        return contract("ij,jk->ik", self, other)

    def __rmatmul__(self, other):
        return contract("ij,jk->ik", other, self)

    # calculus

    def conj(self):
        """Conjugate coefficients and swap z with zbar exponents."""
        return Jet(self.space, self.coeffs.conj()[..., self.space.conj_perm])

    def d(self, var):
        """Derivative in formal variable `var` (0..2n-1); order drops by one."""
        src, tgt, factor = self.space.derivative_map(var)
        lower = jet_space(self.n, self.order - 1)
        out = np.zeros(self.shape + (lower.size,), dtype=complex)
        out[..., tgt] = self.coeffs[..., src] * factor
        return Jet(lower, out)

    def wirtinger(self, which, index):
        return self.d(_variable_index(self.n, which, index))

    def gradient(self):
        """All 2n first derivatives stacked on a new leading axis."""
        return stack([self.d(v) for v in range(2 * self.n)])

    def truncate(self, order):
        if order > self.order:
            raise StructuralError(f"cannot raise jet order from {self.order} to {order}")
        lower = jet_space(self.n, order)
        return Jet(lower, self.coeffs[..., : lower.size])

    def inverse(self):
        return jet_inverse(self)

    def exp(self):
        a0 = self.value
        u = self - a0
        term = Jet.constant(self.n, self.order, np.ones(self.shape))
        total = term
        for m in range(1, self.order + 1):
            term = term * u / m
            total = total + term
        return total * np.exp(a0)

    def log(self):
        a0 = self.value
        if np.any(np.abs(a0) == 0):
            raise SingularSeriesError("logarithm of a jet with zero constant term")
        u = (self - a0) / a0
        power = u
        total = Jet.constant(self.n, self.order, np.log(a0))
        for m in range(1, self.order + 1):
            total = total + power * ((-1) ** (m + 1) / m)
            power = power * u
        return total


def jet_mul(a, b):
    """Truncated Cauchy product, broadcasting over index axes."""
    a._check(b)
    space = a.space
    vals = a.coeffs[..., space.pa] * b.coeffs[..., space.pb]
    return Jet(space, space.reduce(vals))


def wirtinger(a, which, index):
    return a.wirtinger(which, index)


def jet_inverse(a):
    """Elementwise multiplicative inverse by the geometric series in a - a(0)."""
    a0 = a.value
    if np.any(np.abs(a0) < np.finfo(float).tiny):
        raise SingularSeriesError("jet inverse needs a nonzero constant term")
    u = (a - a0) / a0
    term = Jet.constant(a.n, a.order, np.ones(a.shape))
    total = term
    for _ in range(a.order):
        term = -(term * u)
        total = total + term
    return total / a0


def jet_matrix_inverse(a):
    """
    Inverse and determinant of a square matrix of jets.

    Gauss-Jordan elimination pivoting on the constant term. Returns
    (inverse, det) where det is a scalar Jet.
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructuralError(f"matrix inverse needs a square jet matrix, got {a.shape}")
    r = a.shape[0]
    space = a.space
    work = a.coeffs.copy()
    inv = np.zeros_like(work)
    inv[np.arange(r), np.arange(r), 0] = 1.0
    det = Jet.constant(a.n, a.order, 1.0)
    scale = max(np.abs(work[..., 0]).max(), 1.0)

    for col in range(r):
        pivot = col + int(np.argmax(np.abs(work[col:, col, 0])))
        if np.abs(work[pivot, col, 0]) <= 1e-14 * scale:
            raise SingularSeriesError(f"singular constant term at column {col}")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
            inv[[col, pivot]] = inv[[pivot, col]]
            det = -det
        p = Jet(space, work[col, col])
        det = det * p
        pinv = jet_inverse(p)
        work[col] = (pinv * Jet(space, work[col])).coeffs
        inv[col] = (pinv * Jet(space, inv[col])).coeffs

        factors = Jet(space, work[:, col][:, None, :].copy())
        mask = np.ones(r, dtype=bool)
        mask[col] = False
        work[mask] -= (factors * Jet(space, work[col][None]))[mask].coeffs
        inv[mask] -= (factors * Jet(space, inv[col][None]))[mask].coeffs

    return Jet(space, inv), det


def stack(jets, axis=0):
    jets = list(jets)
    if not jets:
        raise StructuralError("cannot stack an empty sequence of jets")
    space = jets[0].space
    for j in jets[1:]:
        jets[0]._check(j)
    if axis < 0:
        axis += jets[0].ndim + 1
    return Jet(space, np.stack([j.coeffs for j in jets], axis=axis))


def align(*jets):
    """Truncate jets to their common (lowest) order."""
    order = min(j.order for j in jets)
    return tuple(j.truncate(order) for j in jets)


def contract(subscripts, a, b):
    """
    einsum over index axes of two operands, jets multiplied as series.

    Either operand may be a plain array, which acts as a constant.
    """
    if _PAIR in subscripts:
        raise StructuralError(f"subscript letter {_PAIR} is reserved")
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        a._check(b)
        space = a.space
        vals = np.einsum(
            f"{sa}{_PAIR},{sb}{_PAIR}->{out}{_PAIR}",
            a.coeffs[..., space.pa],
            b.coeffs[..., space.pb],
        )
        return Jet(space, space.reduce(vals))
    if isinstance(a, Jet):
        return Jet(a.space, np.einsum(f"{sa}{_PAIR},{sb}->{out}{_PAIR}", a.coeffs, np.asarray(b)))
    if isinstance(b, Jet):
        return Jet(b.space, np.einsum(f"{sa},{sb}{_PAIR}->{out}{_PAIR}", np.asarray(a), b.coeffs))
    return np.einsum(subscripts, a, b)


def monomial_count(n, order):
    return math.comb(2 * n + order, order)
