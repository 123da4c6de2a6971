"""
Pointwise exterior calculus of (p, q)-forms with jet coefficients.

A form of bidegree (p, q) with values in a trivialized bundle of rank r is
stored on the basis dz^I ^ dzbar^J (I, J increasing) as a Jet of shape
(dim, r). Algebraic operators are matrices of jets on that basis. Their
adjoints come from the pointwise Hermitian inner product

    <dz^i, dz^k> = h^{i kbar},   <dzbar^j, dzbar^l> = h^{l jbar},

extended to wedge products by determinants, in which the adjoint of
L = 2 omega ^ is exactly sqrt(-1) h^{i jbar} I_i I_jbar. First-order
differential operators take formal adjoints: integration by parts against
the volume density det(h), which is all a local identity can see of the
global L2 adjoint.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, permutations, product

import numpy as np

from .connection import chern, levi_civita
from .curvature import bundle_curvature
from .errors import OrderExhaustedError, PreconditionError, StructuralError
from .jets import Jet, contract, jet_matrix_inverse

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9
COMPATIBILITY_TOL = 1e-9


# basis bookkeeping


@lru_cache(maxsize=None)
def index_sets(n, p):
    if p < 0 or p > n:
        return ()
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def basis(n, p, q):
    """(I, J) labels of dz^I ^ dzbar^J in storage order."""
    return tuple((I, J) for I in index_sets(n, p) for J in index_sets(n, q))


@lru_cache(maxsize=None)
def _positions(n, p, q):
    return {b: k for k, b in enumerate(basis(n, p, q))}


def dimension(n, p, q):
    return len(basis(n, p, q))


def _sorted_sign(seq):
    """(sign, sorted tuple) of a sequence of indices; sign 0 on a repeat."""
    seq = tuple(seq)
    if len(set(seq)) != len(seq):
        return 0, None
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign, tuple(sorted(seq))


@lru_cache(maxsize=None)
def wedge_dz(n, p, q, i):
    """dz^i ^ from (p, q) to (p + 1, q)."""
    out = np.zeros((dimension(n, p + 1, q), dimension(n, p, q)))
    target = _positions(n, p + 1, q)
    for k, (I, J) in enumerate(basis(n, p, q)):
        sign, merged = _sorted_sign((i,) + I)
        if sign:
            out[target[(merged, J)], k] = sign
    return out


@lru_cache(maxsize=None)
def wedge_dzbar(n, p, q, j):
    """dzbar^j ^ from (p, q) to (p, q + 1); it passes the p holomorphic factors."""
    out = np.zeros((dimension(n, p, q + 1), dimension(n, p, q)))
    target = _positions(n, p, q + 1)
    for k, (I, J) in enumerate(basis(n, p, q)):
        sign, merged = _sorted_sign((j,) + J)
        if sign:
            out[target[(I, merged)], k] = sign * (-1) ** p
    return out


def interior_dz(n, p, q, i):
    """I_i, contraction with d/dz^i, from (p, q) to (p - 1, q)."""
    return wedge_dz(n, p - 1, q, i).T


def interior_dzbar(n, p, q, j):
    """I_jbar from (p, q) to (p, q - 1)."""
    return wedge_dzbar(n, p, q - 1, j).T


_LETTERS = {
    "e": (wedge_dz, 1, 0),
    "eb": (wedge_dzbar, 0, 1),
    "i": (interior_dz, -1, 0),
    "ib": (interior_dzbar, 0, -1),
}


@lru_cache(maxsize=None)
def word_tensor(n, p, q, word):
    """
    Stacked matrices of a word in the primitive operators on (p, q) forms:
    ("e", "e", "i") gives W[s, i, k] = (dz^s ^)(dz^i ^) I_k. The rightmost
    letter acts first.
    """
    degrees = [(p, q)]
    for letter in reversed(word):
        _, dp, dq = _LETTERS[letter]
        degrees.append((degrees[-1][0] + dp, degrees[-1][1] + dq))
    pf, qf = degrees[-1]
    size = len(word)
    out = np.zeros((n,) * size + (dimension(n, pf, qf), dimension(n, p, q)))
    for idx in product(range(n), repeat=size):
        m = np.eye(dimension(n, p, q))
        for step, pos in enumerate(range(size - 1, -1, -1)):
            fn = _LETTERS[word[pos]][0]
            m = fn(n, *degrees[step], idx[pos]) @ m
        out[idx] = m
    return out


@lru_cache(maxsize=None)
def conjugation_matrix(n, p, q):
    """Takes the conjugated coefficients of a (p, q) form to those of its (q, p) conjugate."""
    out = np.zeros((dimension(n, q, p), dimension(n, p, q)))
    target = _positions(n, q, p)
    for k, (I, J) in enumerate(basis(n, p, q)):
        out[target[(J, I)], k] = (-1) ** (p * q)
    return out


@lru_cache(maxsize=None)
def wedge_tensor(n, p1, q1, p2, q2):
    """W[o, a, b] with basis_a ^ basis_b = sum_o W[o, a, b] basis_o."""
    out = np.zeros((dimension(n, p1 + p2, q1 + q2), dimension(n, p1, q1), dimension(n, p2, q2)))
    target = _positions(n, p1 + p2, q1 + q2)
    for a, (I1, J1) in enumerate(basis(n, p1, q1)):
        for b, (I2, J2) in enumerate(basis(n, p2, q2)):
            s1, I = _sorted_sign(I1 + I2)
            s2, J = _sorted_sign(J1 + J2)
            if s1 and s2:
                out[target[(I, J)], a, b] = s1 * s2 * (-1) ** (q1 * p2)
    return out


# jet helpers


def _aligned(a, b):
    if isinstance(a, Jet) and isinstance(b, Jet) and a.order != b.order:
        order = min(a.order, b.order)
        return a.truncate(order), b.truncate(order)
    return a, b


def _dot(subscripts, a, b):
    a, b = _aligned(a, b)
    return contract(subscripts, a, b)


def _plus(a, b):
    if a is None:
        return b
    a, b = _aligned(a, b)
    return a + b


def _max_abs(a):
    values = a.coeffs if isinstance(a, Jet) else np.asarray(a)
    return float(np.abs(values).max()) if values.size else 0.0


def compound(m, k):
    """k-th compound of a square jet matrix: the k x k minors, in index_sets order."""
    size = m.shape[0]
    sets = index_sets(size, k)
    coeffs = np.zeros((len(sets), len(sets), m.space.size), dtype=complex)
    perms = [(perm, _sorted_sign(perm)[0]) for perm in permutations(range(max(k, 0)))]
    for a, rows in enumerate(sets):
        for b, cols in enumerate(sets):
            total = Jet.zeros(m.n, m.order)
            for perm, sign in perms:
                term = Jet.constant(m.n, m.order, float(sign))
                for t in range(k):
                    term = term * m[rows[t], cols[perm[t]]]
                total = total + term
            coeffs[a, b] = total.coeffs
    return Jet(m.space, coeffs)


def _kron(a, b):
    out = _dot("ab,cd->acbd", a, b)
    return out.reshape(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])


# forms


@dataclass(frozen=True, eq=False)
class FormJet:
    """
    A (p, q) form with coefficients coeffs[k, a] on basis element k and
    fiber index a. Scalar forms have r = 1. Components are antisymmetric in
    I and in J; `component` takes index tuples in any order.
    """

    p: int
    q: int
    coeffs: Jet
    metric: object = None

    def __post_init__(self):
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != dimension(self.n, self.p, self.q):
            raise StructuralError(
                f"a ({self.p}, {self.q}) form in dimension {self.n} needs coefficients of shape "
                f"({dimension(self.n, self.p, self.q)}, r), got {self.coeffs.shape}"
            )

    @property
    def n(self):
        return self.coeffs.n

    @property
    def r(self):
        return self.coeffs.shape[1]

    @property
    def order(self):
        return self.coeffs.order

    @property
    def bidegree(self):
        return self.p, self.q

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @property
    def value(self):
        return self.coeffs.value

    @classmethod
    def zeros(cls, n, p, q, order, r=1, metric=None):
        return cls(p, q, Jet.zeros(n, order, (dimension(n, p, q), r)), metric)

    @classmethod
    def random(cls, n, p, q, order, rng, r=1, scale=1.0, metric=None):
        form = cls.zeros(n, p, q, order, r, metric)
        shape = form.coeffs.coeffs.shape
        coeffs = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
        return cls(p, q, Jet(form.coeffs.space, coeffs), metric)

    @classmethod
    def section(cls, values, metric=None):
        """A bundle section, i.e. a (0, 0) form, from a Jet of shape (r,)."""
        return cls(0, 0, values.reshape(1, values.shape[0]), metric)

    def component(self, I, J):
        sign_i, I = _sorted_sign(I)
        sign_j, J = _sorted_sign(J)
        if not (sign_i and sign_j) or len(I) != self.p or len(J) != self.q:
            return Jet.zeros(self.n, self.order, (self.r,))
        return self.coeffs[_positions(self.n, self.p, self.q)[(I, J)]] * float(sign_i * sign_j)

    def _same_kind(self, other):
        if not isinstance(other, FormJet) or (self.p, self.q, self.r) != (other.p, other.q, other.r):
            raise StructuralError(f"cannot combine a ({self.p}, {self.q}) form with {other!r}")

    def __add__(self, other):
        self._same_kind(other)
        return FormJet(self.p, self.q, _plus(self.coeffs, other.coeffs), self.metric or other.metric)

    def __neg__(self):
        return FormJet(self.p, self.q, -self.coeffs, self.metric)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, Jet):
            if c.ndim != 0:
                raise StructuralError("forms scale by scalar jets only")
            a, b = _aligned(c, self.coeffs)
            return FormJet(self.p, self.q, a * b, self.metric)
        return FormJet(self.p, self.q, self.coeffs * c, self.metric)

    __rmul__ = __mul__

    def truncate(self, order):
        return FormJet(self.p, self.q, self.coeffs.truncate(order), self.metric)

    def conj(self):
        """Conjugate form, bidegree (q, p); fiber components are conjugated too."""
        m = conjugation_matrix(self.n, self.p, self.q)
        return FormJet(self.q, self.p, contract("ok,kr->or", m, self.coeffs.conj()), self.metric)

    def max_abs(self):
        return _max_abs(self.coeffs)

    def __repr__(self):
        return f"FormJet(({self.p}, {self.q}), n={self.n}, r={self.r}, order={self.order})"


def wedge(alpha, beta):
    """alpha ^ beta; at most one factor may carry a bundle index."""
    n = alpha.n
    W = wedge_tensor(n, alpha.p, alpha.q, beta.p, beta.q)
    a, b = _aligned(alpha.coeffs, beta.coeffs)
    if alpha.r == 1:
        outer = contract("a,br->abr", a[:, 0], b)
    elif beta.r == 1:
        outer = contract("ar,b->abr", a, b[:, 0])
    else:
        raise StructuralError("wedge of two bundle-valued forms needs a fiber pairing")
    return FormJet(alpha.p + beta.p, alpha.q + beta.q, contract("oab,abr->or", W, outer), alpha.metric or beta.metric)


# operators


class FormOperator:
    """A linear operator on forms of every bidegree, moving (p, q) by `shift`."""

    name = ""
    shift = (0, 0)
    algebraic = False

    def __init__(self, n):
        self.n = n

    def apply(self, phi):
        raise NotImplementedError

    def __call__(self, phi):
        return self.apply(phi)

    def target(self, p, q):
        return p + self.shift[0], q + self.shift[1]

    def source(self, p, q):
        return p - self.shift[0], q - self.shift[1]

    def __add__(self, other):
        return Combination([(1, self), (1, other)])

    def __sub__(self, other):
        return Combination([(1, self), (-1, other)])

    def __neg__(self):
        return Combination([(-1, self)])

    def __mul__(self, c):
        return Combination([(c, self)])

    __rmul__ = __mul__

    def __matmul__(self, other):
        return Composition(self, other)

    def commutator(self, other):
        return self @ other - other @ self

    def matrix(self, p, q):
        raise StructuralError(f"{self.name} is not an algebraic operator")

    def matrix_residual(self):
        """Largest entry of the matrix over every bidegree: the spanning-set test of a vanishing operator."""
        n = self.n
        return max(_max_abs(self.matrix(p, q)) for p in range(n + 1) for q in range(n + 1))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} shift={self.shift}>"


class AlgebraicOperator(FormOperator):
    algebraic = True

    def __init__(self, name, shift, n, builder):
        super().__init__(n)
        self.name = name
        self.shift = shift
        self._builder = builder
        self._matrices = {}

    def matrix(self, p, q):
        if (p, q) not in self._matrices:
            self._matrices[(p, q)] = self._builder(p, q)
        return self._matrices[(p, q)]

    def apply(self, phi):
        p, q = self.target(phi.p, phi.q)
        out = _dot("ok,kr->or", self.matrix(phi.p, phi.q), phi.coeffs)
        return FormJet(p, q, out, phi.metric)


class Combination(FormOperator):
    def __init__(self, terms):
        flat = []
        for c, op in terms:
            if isinstance(op, Combination):
                flat.extend((c * c2, op2) for c2, op2 in op.terms)
            else:
                flat.append((c, op))
        shifts = {op.shift for _, op in flat}
        if len(shifts) != 1:
            raise StructuralError(f"cannot add operators of different types {sorted(shifts)}")
        super().__init__(flat[0][1].n)
        self.terms = flat
        self.shift = shifts.pop()
        self.algebraic = all(op.algebraic for _, op in flat)
        self.name = " + ".join(f"({c})*{op.name}" for c, op in flat)

    def matrix(self, p, q):
        if not self.algebraic:
            return super().matrix(p, q)
        total = None
        for c, op in self.terms:
            total = _plus(total, c * op.matrix(p, q))
        return total

    def apply(self, phi):
        total = None
        for c, op in self.terms:
            total = op.apply(phi) * c if total is None else total + op.apply(phi) * c
        return total


class Composition(FormOperator):
    def __init__(self, outer, inner):
        super().__init__(outer.n)
        self.outer = outer
        self.inner = inner
        self.shift = (outer.shift[0] + inner.shift[0], outer.shift[1] + inner.shift[1])
        self.algebraic = outer.algebraic and inner.algebraic
        self.name = f"{outer.name}.{inner.name}"

    def matrix(self, p, q):
        if not self.algebraic:
            return super().matrix(p, q)
        return _dot("ij,jk->ik", self.outer.matrix(*self.inner.target(p, q)), self.inner.matrix(p, q))

    def apply(self, phi):
        return self.outer.apply(self.inner.apply(phi))


class Conjugate(AlgebraicOperator):
    """T-bar(phi) = conj(T(conj(phi)))."""

    def __init__(self, op, name=None):
        if not op.algebraic:
            raise StructuralError(f"conjugation is implemented for algebraic operators, not {op.name}")
        self.base = op
        super().__init__(name or f"{op.name}bar", (op.shift[1], op.shift[0]), op.n, self._build)

    def _build(self, p, q):
        a, b = self.base.shift
        inner = conjugation_matrix(self.n, p, q)
        outer = conjugation_matrix(self.n, q + a, p + b)
        m = self.base.matrix(q, p)
        return _dot("ij,jk->ik", outer, _dot("ij,jk->ik", m.conj(), inner))


class Adjoint(AlgebraicOperator):
    """Pointwise adjoint G_in^{-1} T^H G_out of an algebraic operator."""

    def __init__(self, op, calc, name=None):
        if not op.algebraic:
            raise StructuralError(f"{op.name} has no pointwise adjoint")
        self.base = op
        self.calc = calc
        super().__init__(name or f"{op.name}*", (-op.shift[0], -op.shift[1]), op.n, self._build)

    def _build(self, p, q):
        src = self.base.source(p, q)
        m = self.base.matrix(*src)
        out = _dot("ok,kj->oj", self.calc.gram_inverse(*src), _dot("ko,kj->oj", m.conj(), self.calc.gram(p, q)))
        return out


class DifferentialOperator(FormOperator):
    """
    A first-order operator sum_A a_A d/dz^A + sum M (x) W, with a_A and M
    matrices on forms and W an optional fiber matrix.
    """

    def __init__(self, name, shift, n, builder):
        super().__init__(n)
        self.name = name
        self.shift = shift
        self._builder = builder
        self._terms = {}

    def terms(self, p, q):
        if (p, q) not in self._terms:
            self._terms[(p, q)] = self._builder(p, q)
        return self._terms[(p, q)]

    def apply(self, phi):
        if phi.order < 1:
            raise OrderExhaustedError(f"{self.name} needs a form jet of order >= 1")
        first, zeroth = self.terms(phi.p, phi.q)
        c = phi.coeffs
        total = None
        for var, a in first.items():
            total = _plus(total, _dot("ok,kr->or", a, c.d(var)))
        for m, w in zeroth:
            term = _dot("ok,kr->or", m, c)
            if w is not None:
                term = _dot("or,sr->os", term, w)
            total = _plus(total, term)
        p, q = self.target(phi.p, phi.q)
        if total is None:
            return FormJet.zeros(self.n, p, q, phi.order - 1, phi.r, phi.metric)
        return FormJet(p, q, total, phi.metric)


class FormalAdjoint(FormOperator):
    """
    Formal adjoint of a DifferentialOperator for the pointwise inner product
    and the volume density V = det(h):

        D^+ psi = -V^{-1} G_in^{-1} sum_A d_Abar(V a_A^H G_out psi F^T) F^{-T}
                  + G_in^{-1} M^H G_out psi F^T conj(W) F^{-T}
    """

    def __init__(self, op, calc, name=None):
        if not isinstance(op, DifferentialOperator):
            raise StructuralError(f"formal adjoints are taken of differential operators, not {op.name}")
        super().__init__(op.n)
        self.base = op
        self.calc = calc
        self.name = name or f"{op.name}*"
        self.shift = (-op.shift[0], -op.shift[1])

    def apply(self, psi):
        if psi.order < 1:
            raise OrderExhaustedError(f"{self.name} needs a form jet of order >= 1")
        calc = self.calc
        n = self.n
        p, q = self.target(psi.p, psi.q)
        first, zeroth = self.base.terms(p, q)
        F, F_inv = calc.fiber_gram(psi.r)
        G_in_inv = calc.gram_inverse(p, q)
        weighted = _dot("or,sr->os", _dot("ok,kr->or", calc.gram(psi.p, psi.q), psi.coeffs), F)
        V = calc.volume

        derivative = None
        for var, a in first.items():
            x = _dot("ok,or->kr", a.conj(), weighted)
            V_, x = _aligned(V, x)
            bar = var + n if var < n else var - n
            derivative = _plus(derivative, (V_ * x).d(bar))
        total = None
        if derivative is not None:
            inv_, derivative = _aligned(V.inverse(), derivative)
            scaled = _dot("ok,kr->or", G_in_inv, inv_ * derivative)
            total = -_dot("or,sr->os", scaled, F_inv)
        for m, w in zeroth:
            y = _dot("ok,or->kr", m.conj(), weighted)
            if w is not None:
                y = _dot("or,rs->os", y, w.conj())
            y = _dot("or,sr->os", y, F_inv)
            total = _plus(total, _dot("ok,kr->or", G_in_inv, y))
        if total is None:
            return FormJet.zeros(n, p, q, psi.order - 1, psi.r, psi.metric)
        return FormJet(p, q, total, psi.metric)


def apply(op, phi):
    return op.apply(phi)


def interior(phi, index, barred=False):
    """I_index phi, or I_indexbar phi when barred."""
    n, p, q = phi.n, phi.p, phi.q
    if barred:
        m, target = interior_dzbar(n, p, q, index), (p, q - 1)
    else:
        m, target = interior_dz(n, p, q, index), (p - 1, q)
    return FormJet(*target, contract("ok,kr->or", m, phi.coeffs), phi.metric)


def operator_matrix(op, p, q):
    """Matrix of an algebraic operator on (p, q) forms at the point, in the basis order of `basis`."""
    m = op.matrix(p, q)
    return np.array(m.value if isinstance(m, Jet) else m, dtype=complex)


# connections on trivialized bundles


@dataclass(frozen=True, eq=False)
class ConnectionJet:
    """
    Connection on a trivialized rank-r bundle: omega[A][a, c] = Gamma^c_{A a}
    along d/dz^A (z then zbar), so (nabla_A s)^c = d_A s^c + omega[A][a, c] s^a.
    metric[a, b] = <e_a, e_b>, a Hermitian jet matrix.
    """

    omega: Jet
    metric: Jet

    def __post_init__(self):
        r = self.metric.shape[0]
        if self.omega.shape != (2 * self.omega.n, r, r) or self.metric.shape != (r, r):
            raise StructuralError(
                f"connection matrices {self.omega.shape} do not match a rank {r} fiber metric"
            )

    @property
    def n(self):
        return self.omega.n

    @property
    def rank(self):
        return self.metric.shape[0]

    @property
    def order(self):
        return self.omega.order

    def fiber_matrix(self, var):
        """W with (nabla_var s) = d_var s + W s on component vectors."""
        return self.omega[var].T

    @classmethod
    def trivial(cls, n, rank, order):
        return cls(Jet.zeros(n, order, (2 * n, rank, rank)), Jet.constant(n, order, np.eye(rank)))

    @classmethod
    def random(cls, n, rank, order, seed=0, scale=0.5, metric=None):
        """
        Random connection compatible with a constant fiber metric: holomorphic
        directions are drawn and antiholomorphic ones follow from compatibility.
        """
        rng = np.random.default_rng(seed)
        M = np.eye(rank) if metric is None else np.asarray(metric, dtype=complex)
        holo = Jet.zeros(n, order, (n, rank, rank))
        shape = holo.coeffs.shape
        holo = Jet(holo.space, scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape)))
        t = contract("Aac,cb->Aab", contract("ac,Acb->Aab", np.linalg.inv(M), holo), M)
        anti = (-t).transpose(0, 2, 1).conj()
        omega = Jet(holo.space, np.concatenate([holo.coeffs, anti.coeffs], axis=0))
        return cls(omega, Jet.constant(n, order, M))

    @classmethod
    def chern(cls, mj):
        """The Chern connection of T^{1,0} in the frame d/dz^a, with fiber metric h."""
        return cls(chern(mj).entries, mj.h)

    def compatibility_defects(self):
        """d_A <e_a, e_b> - <nabla_A e_a, e_b> - <e_a, nabla_Abar e_b> as a jet of shape (2n, r, r)."""
        if self.metric.order < 1:
            raise OrderExhaustedError("metric compatibility needs a fiber metric jet of order >= 1")
        n = self.n
        dM = self.metric.gradient()
        order = min(dM.order, self.omega.order)
        dM = dM.truncate(order)
        w = self.omega.truncate(order)
        M = self.metric.truncate(order)
        flip = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
        w_bar = Jet(w.space, w.coeffs[flip]).conj()
        return dM - contract("Aac,cb->Aab", w, M) - contract("ac,Abc->Aab", M, w_bar)

    def require_metric_compatible(self, tol=COMPATIBILITY_TOL):
        defects = self.compatibility_defects().coeffs
        worst = np.unravel_index(int(np.argmax(np.abs(defects))), defects.shape)
        value = float(np.abs(defects[worst]))
        if value > tol:
            A, a, b = (int(x) for x in worst[:3])
            raise PreconditionError(
                f"connection is not metric compatible: direction {A}, entry ({a}, {b}) off by {value:.3g}",
                coefficient=(A, a, b),
            )
        return value


def second_hermitian_ricci(conn, mj):
    """h^{i jbar} R_{i jbar alpha betabar} at the point, lowered with the fiber metric."""
    if conn.n != mj.n:
        raise StructuralError(f"connection over dimension {conn.n} used with a metric of dimension {mj.n}")
    n = mj.n
    F = bundle_curvature(conn.omega)
    lowered = np.einsum("ijam,mb->ijab", F[:n, n:], conn.metric.value)
    return np.einsum("ji,ijab->ab", mj.HI0, lowered)


# the calculus at one point


OPERATOR_NAMES = {
    "L": "L",
    "Lambda": "Lambda",
    "d": "d",
    "dbar": "dbar",
    "D'": "D_prime",
    "D''": "D_double_prime",
    "delta'_0": "delta0_prime",
    "delta''_0": "delta0_double_prime",
    "delta'": "delta_prime",
    "delta''": "delta_double_prime",
    "d*": "d_star",
    "dbar*": "dbar_star",
    "A": "A",
    "B": "B",
    "C": "C",
    "Abar*": "Abar_star",
    "Bbar*": "Bbar_star",
    "Cbar*": "Cbar_star",
    "tau": "tau",
    "taubar": "taubar",
    "tau*": "tau_star",
    "taubar*": "taubar_star",
    "d_E": "d_E",
    "dbar_E": "dbar_E",
    "d_E*": "d_E_star",
    "dbar_E*": "dbar_E_star",
}


class FormCalculus:
    """Operators on forms at the point of a MetricJet, optionally twisted by a ConnectionJet."""

    def __init__(self, mj, connection=None, table=None):
        if connection is not None and connection.n != mj.n:
            raise StructuralError("connection and metric live over different dimensions")
        self.mj = mj
        self.n = mj.n
        self.connection = connection
        self._table = table
        self._grams = {}
        self._fibers = {}

    @cached_property
    def table(self):
        return self._table or levi_civita(self.mj)

    @property
    def gamma(self):
        return self.table.entries

    @cached_property
    def volume(self):
        return self.mj.det

    def gram(self, p, q):
        """G with <u, v> = v^H (G (x) F) u on (p, q) forms."""
        if ("g", p, q) not in self._grams:
            HI = self.mj.hinv
            self._grams[("g", p, q)] = _kron(compound(HI, p), compound(HI.T, q))
        return self._grams[("g", p, q)]

    def gram_inverse(self, p, q):
        if ("gi", p, q) not in self._grams:
            H = self.mj.h
            self._grams[("gi", p, q)] = _kron(compound(H, p), compound(H.T, q))
        return self._grams[("gi", p, q)]

    def fiber_gram(self, r):
        """(F, F^{-1}) with <s, t> = t^H F s on fibers of rank r."""
        if r not in self._fibers:
            if self.connection is None:
                eye = Jet.constant(self.n, self.mj.order, np.eye(r))
                self._fibers[r] = (eye, eye)
            else:
                if r != self.connection.rank:
                    raise StructuralError(f"forms of rank {r} do not match a rank {self.connection.rank} connection")
                F = self.connection.metric.T
                self._fibers[r] = (F, jet_matrix_inverse(F)[0])
        return self._fibers[r]

    def inner(self, phi, psi):
        """<phi, psi> at the point."""
        if (phi.p, phi.q, phi.r) != (psi.p, psi.q, psi.r):
            raise StructuralError("inner product of forms of different kinds")
        G = self.gram(phi.p, phi.q)
        G = G.value if isinstance(G, Jet) else G
        F = self.fiber_gram(phi.r)[0].value
        return complex(np.einsum("oa,ok,ab,kb->", psi.value.conj(), G, F, phi.value))

    def adjoint(self, op, name=None):
        if op.algebraic:
            return Adjoint(op, self, name)
        return FormalAdjoint(op, self, name)

    def operator(self, name):
        if name not in OPERATOR_NAMES:
            raise StructuralError(f"unknown form operator {name!r}")
        return getattr(self, OPERATOR_NAMES[name])

    # forms attached to the metric

    @cached_property
    def omega(self):
        """omega = (sqrt(-1)/2) h_{i jbar} dz^i ^ dzbar^j."""
        n = self.n
        return FormJet(1, 1, (self.mj.h * 0.5j).reshape(n * n, 1), self.mj)

    @cached_property
    def eta(self):
        """Torsion 1-form coefficients Gamma^{jbar}_{l jbar}."""
        g = self.gamma[: self.n, self.n :, self.n :]
        return Jet(g.space, np.einsum("jii...->j...", g.coeffs))

    # algebraic operators

    def _word(self, p, q, *letters):
        return word_tensor(self.n, p, q, letters)

    @cached_property
    def L(self):
        h = self.mj.h
        return AlgebraicOperator("L", (1, 1), self.n, lambda p, q: 1j * _dot("ij,ijok->ok", h, self._word(p, q, "e", "eb")))

    @cached_property
    def Lambda(self):
        return self.adjoint(self.L, "Lambda")

    @cached_property
    def Lambda_closed(self):
        """sqrt(-1) h^{i jbar} I_i I_jbar."""
        HI = self.mj.hinv
        return AlgebraicOperator(
            "Lambda_closed", (-1, -1), self.n, lambda p, q: 1j * _dot("ji,ijok->ok", HI, self._word(p, q, "i", "ib"))
        )

    @cached_property
    def counting(self):
        n = self.n
        return AlgebraicOperator("p+q-n", (0, 0), n, lambda p, q: (p + q - n) * np.eye(dimension(n, p, q)))

    @cached_property
    def A(self):
        n = self.n
        gb = self.gamma[:n, n:, n:]
        mixed = _dot("lk,sil->sik", self.mj.hinv, _dot("im,slm->sil", self.mj.h, gb))
        return AlgebraicOperator("A", (1, 0), n, lambda p, q: -_dot("sik,sikox->ox", mixed, self._word(p, q, "e", "e", "i")))

    @cached_property
    def B(self):
        n = self.n
        gb = self.gamma[:n, n:, n:]
        return AlgebraicOperator("B", (1, 0), n, lambda p, q: -2 * _dot("ijl,ijlox->ox", gb, self._word(p, q, "e", "eb", "ib")))

    @cached_property
    def C(self):
        return AlgebraicOperator("C", (1, 0), self.n, lambda p, q: 2 * _dot("j,jox->ox", self.eta, self._word(p, q, "e")))

    def wedge_operator(self, form, name=None):
        if form.r != 1:
            raise StructuralError("wedge operators take scalar forms")

        def build(p, q):
            return _dot("a,oab->ob", form.coeffs[:, 0], wedge_tensor(self.n, form.p, form.q, p, q))

        return AlgebraicOperator(name or "wedge", form.bidegree, self.n, build)

    @cached_property
    def d_omega(self):
        return self.d(self.omega)

    @cached_property
    def tau(self):
        """[Lambda, 2 d omega ^]."""
        two = self.wedge_operator(self.d_omega * 2, "2domega")
        return AlgebraicOperator("tau", (1, 0), self.n, self.Lambda.commutator(two).matrix)

    @cached_property
    def taubar(self):
        return Conjugate(self.tau)

    @cached_property
    def tau_star(self):
        return self.adjoint(self.tau)

    @cached_property
    def taubar_star(self):
        return self.adjoint(self.taubar)

    @cached_property
    def Abar(self):
        return Conjugate(self.A)

    @cached_property
    def Bbar(self):
        return Conjugate(self.B)

    @cached_property
    def Cbar(self):
        return Conjugate(self.C)

    @cached_property
    def A_star(self):
        return self.adjoint(self.A)

    @cached_property
    def B_star(self):
        return self.adjoint(self.B)

    @cached_property
    def C_star(self):
        return self.adjoint(self.C)

    @cached_property
    def Abar_star(self):
        return self.adjoint(self.Abar)

    @cached_property
    def Bbar_star(self):
        return self.adjoint(self.Bbar)

    @cached_property
    def Cbar_star(self):
        return self.adjoint(self.Cbar)

    # differential operators

    def _derivation(self, var, p, q):
        """Zeroth-order part of the type-preserving Levi-Civita derivative along d/dz^var."""
        n = self.n
        g = self.gamma
        holo = _dot("cb,cbox->ox", g[var, :n, :n], self._word(p, q, "e", "i"))
        anti = _dot("cb,cbox->ox", g[var, n:, n:], self._word(p, q, "eb", "ib"))
        return -_plus(holo, anti)

    def nabla_prime(self, i):
        n = self.n

        def build(p, q):
            return {i: np.eye(dimension(n, p, q))}, [(self._derivation(i, p, q), None)]

        return DifferentialOperator(f"nabla'_{i}", (0, 0), n, build)

    def nabla_double_prime(self, j):
        n = self.n

        def build(p, q):
            return {n + j: np.eye(dimension(n, p, q))}, [(self._derivation(n + j, p, q), None)]

        return DifferentialOperator(f"nabla''_{j}", (0, 0), n, build)

    @cached_property
    def d(self):
        n = self.n
        return DifferentialOperator("d", (1, 0), n, lambda p, q: ({i: self._word(p, q, "e")[i] for i in range(n)}, []))

    @cached_property
    def dbar(self):
        n = self.n
        return DifferentialOperator("dbar", (0, 1), n, lambda p, q: ({n + j: self._word(p, q, "eb")[j] for j in range(n)}, []))

    def _covariant(self, letter, offset, p, q):
        n = self.n
        wedges = self._word(p, q, letter)
        first = {offset + i: wedges[i] for i in range(n)}
        zeroth = None
        for i in range(n):
            zeroth = _plus(zeroth, _dot("ox,xk->ok", wedges[i], self._derivation(offset + i, p, q)))
        return first, [(zeroth, None)]

    @cached_property
    def D_prime(self):
        return DifferentialOperator("D'", (1, 0), self.n, lambda p, q: self._covariant("e", 0, p, q))

    @cached_property
    def D_double_prime(self):
        return DifferentialOperator("D''", (0, 1), self.n, lambda p, q: self._covariant("eb", self.n, p, q))

    def _trace_contraction(self, letter, offset, transpose, p, q):
        n = self.n
        HI = self.mj.hinv.T if transpose else self.mj.hinv
        contractions = self._word(p, q, letter)
        first, zeroth = {}, None
        for j in range(n):
            a = -_dot("i,iox->ox", HI[:, j], contractions)
            first[offset + j] = a
            zeroth = _plus(zeroth, _dot("ox,xk->ok", a, self._derivation(offset + j, p, q)))
        return first, [(zeroth, None)]

    @cached_property
    def delta0_double_prime(self):
        """-h^{j ibar} I_ibar nabla'_j."""
        return DifferentialOperator(
            "delta''_0", (0, -1), self.n, lambda p, q: self._trace_contraction("ib", 0, False, p, q)
        )

    @cached_property
    def delta0_prime(self):
        """-h^{i jbar} I_i nabla''_jbar."""
        return DifferentialOperator(
            "delta'_0", (-1, 0), self.n, lambda p, q: self._trace_contraction("i", self.n, True, p, q)
        )

    @cached_property
    def d_star(self):
        return self.adjoint(self.d, "d*")

    @cached_property
    def dbar_star(self):
        return self.adjoint(self.dbar, "dbar*")

    @cached_property
    def delta_prime(self):
        return self.adjoint(self.D_prime, "delta'")

    @cached_property
    def delta_double_prime(self):
        return self.adjoint(self.D_double_prime, "delta''")

    # bundle-valued operators

    def _require_connection(self):
        if self.connection is None:
            raise StructuralError("bundle operators need a FormCalculus built with a connection")
        return self.connection

    def _twisted(self, letter, offset, p, q):
        conn = self._require_connection()
        wedges = self._word(p, q, letter)
        first = {offset + i: wedges[i] for i in range(self.n)}
        zeroth = [(wedges[i], conn.fiber_matrix(offset + i)) for i in range(self.n)]
        return first, zeroth

    @cached_property
    def d_E(self):
        self._require_connection()
        return DifferentialOperator("d_E", (1, 0), self.n, lambda p, q: self._twisted("e", 0, p, q))

    @cached_property
    def dbar_E(self):
        self._require_connection()
        return DifferentialOperator("dbar_E", (0, 1), self.n, lambda p, q: self._twisted("eb", self.n, p, q))

    @cached_property
    def d_E_star(self):
        return self.adjoint(self.d_E, "d_E*")

    @cached_property
    def dbar_E_star(self):
        return self.adjoint(self.dbar_E, "dbar_E*")

    def covariant_section(self, s, var):
        """nabla_var s for a section s, as a (0, 0) form."""
        conn = self._require_connection()
        out = _plus(s.coeffs.d(var), _dot("or,sr->os", s.coeffs, conn.fiber_matrix(var)))
        return FormJet(0, 0, out, s.metric)

    def interior_bar(self, phi, j):
        return interior(phi, j, barred=True)

    # identity checks

    def identities(self):
        """Operators that vanish identically on every Hermitian metric."""
        i = 1j
        lam = self.Lambda
        return {
            "lambda_closed_form": lam - self.Lambda_closed,
            "lefschetz": self.L.commutator(lam) - self.counting,
            "lambda_a": lam.commutator(self.A) + i * self.Bbar_star,
            "lambda_b": lam.commutator(self.B) + i * (2 * self.Abar_star + self.Bbar_star + self.Cbar_star),
            "lambda_c": lam.commutator(self.C) + i * self.Cbar_star,
            "torsion_operator": self.tau - (self.A + self.B + self.C),
            "d_decomposition": self.d - self.D_prime + 0.5 * self.B,
            "dbar_decomposition": self.dbar - self.D_double_prime + 0.5 * self.Bbar,
            "delta_double_prime": self.delta_double_prime - self.delta0_double_prime + 0.5 * self.Cbar_star,
            "delta_prime": self.delta_prime - self.delta0_prime + 0.5 * self.C_star,
            "dbar_star": self.dbar_star - self.delta0_double_prime + 0.5 * (self.Bbar_star + self.Cbar_star),
            "d_star": self.d_star - self.delta0_prime + 0.5 * (self.B_star + self.C_star),
            "lambda_D_prime": lam.commutator(self.D_prime) - i * (self.delta_double_prime + 0.5 * self.Cbar_star),
            "lambda_D_double_prime": lam.commutator(self.D_double_prime) + i * (self.delta_prime + 0.5 * self.C_star),
            "lambda_d": lam.commutator(self.d) - i * (self.dbar_star + self.taubar_star),
            "lambda_dbar": lam.commutator(self.dbar) + i * (self.d_star + self.tau_star),
        }

    def dbar_star_omega(self):
        """Residuals of dbar* omega = sqrt(-1) Lambda(d omega) = sqrt(-1) eta_l dz^l."""
        lhs = self.dbar_star(self.omega)
        via_lambda = (lhs - self.Lambda(self.d_omega) * 1j).max_abs()
        torsion = FormJet(1, 0, (self.eta * 1j).reshape(self.n, 1))
        return {"dbar_star_omega": via_lambda, "dbar_star_omega_torsion": (lhs - torsion).max_abs()}

    def adjoint_duality(self, rng, operators=None):
        """max |<T phi, psi> - <phi, T* psi>| at the point over random bidegrees."""
        operators = operators or (self.L, self.A, self.B, self.C, self.tau)
        worst = 0.0
        for op in operators:
            p, q = (int(x) for x in rng.integers(0, self.n + 1, size=2))
            tp, tq = op.target(p, q)
            if dimension(self.n, tp, tq) == 0 or dimension(self.n, p, q) == 0:
                continue
            phi = FormJet.random(self.n, p, q, 0, rng)
            psi = FormJet.random(self.n, tp, tq, 0, rng)
            lhs = self.inner(op(phi).truncate(0), psi)
            rhs = self.inner(phi, self.adjoint(op)(psi).truncate(0))
            worst = max(worst, abs(lhs - rhs))
        return worst


@dataclass
class IdentityReport:
    residuals: dict
    trials: int
    seed: int
    tol: float = IDENTITY_TOL
    notes: list = field(default_factory=list)

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self):
        return self.max_residual <= self.tol

    def failures(self):
        return {k: v for k, v in self.residuals.items() if v > self.tol}

    def as_dict(self):
        return {
            "residuals": dict(self.residuals),
            "max_residual": self.max_residual,
            "passed": self.passed,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "notes": list(self.notes),
        }


def _random_bidegrees(n, trials, rng):
    return [tuple(int(x) for x in rng.integers(0, n + 1, size=2)) for _ in range(trials)]


def _collect(residuals, results):
    for result in results:
        for name, value in result.items():
            residuals[name] = max(residuals.get(name, 0.0), value)
    return residuals


def identity_suite(mj, trials=20, seed=0, tol=IDENTITY_TOL, mapper=map):
    """
    Residuals of the operator identities of the torsion calculus on random
    forms of random bidegree; algebraic identities are also checked as
    matrices on every bidegree.
    """
    if trials < 1:
        raise StructuralError("the identity suite needs at least one trial")
    calc = FormCalculus(mj)
    checks = calc.identities()
    rng = np.random.default_rng(seed)
    forms = [FormJet.random(mj.n, p, q, mj.order, rng, metric=mj) for p, q in _random_bidegrees(mj.n, trials, rng)]

    residuals = {name: op.matrix_residual() for name, op in checks.items() if op.algebraic}

    def one(phi):
        return {name: op(phi).max_abs() for name, op in checks.items()}

    _collect(residuals, mapper(one, forms))
    residuals.update(calc.dbar_star_omega())
    residuals["adjoint_duality"] = calc.adjoint_duality(rng)
    logger.debug("identity suite over %d forms, worst %.3g", trials, max(residuals.values()))
    return IdentityReport(residuals=residuals, trials=trials, seed=seed, tol=tol)


def bundle_identity_suite(mj, conn, trials=20, seed=0, tol=IDENTITY_TOL, mapper=map):
    """
    Residuals of the bundle-valued commutator identities, the tensoriality of
    d_E dbar_E + dbar_E d_E, the product rule for dbar_E* and the action of
    tau on sections.
    """
    if trials < 1:
        raise StructuralError("the identity suite needs at least one trial")
    compatibility = conn.require_metric_compatible()
    calc = FormCalculus(mj)
    bundle = FormCalculus(mj, connection=conn, table=calc.table)
    lam, L = calc.Lambda, calc.L
    checks = {
        "lambda_d_E": lam.commutator(bundle.d_E) - 1j * (bundle.dbar_E_star + calc.taubar_star),
        "lambda_dbar_E": lam.commutator(bundle.dbar_E) + 1j * (bundle.d_E_star + calc.tau_star),
        "dbar_E_star_L": bundle.dbar_E_star.commutator(L) - 1j * (bundle.d_E + calc.tau),
        "d_E_star_L": bundle.d_E_star.commutator(L) + 1j * (bundle.dbar_E + calc.taubar),
    }
    curvature_op = bundle.d_E @ bundle.dbar_E + bundle.dbar_E @ bundle.d_E
    dbar_star_omega = calc.dbar_star(calc.omega)
    n, r = mj.n, conn.rank

    rng = np.random.default_rng(seed)
    samples = []
    for p, q in _random_bidegrees(n, trials, rng):
        samples.append(
            (
                FormJet.random(n, p, q, mj.order, rng, r=r, metric=mj),
                FormJet.random(n, p, q, mj.order, rng, metric=mj),
                FormJet.random(n, 0, 0, mj.order, rng, r=r, metric=mj),
            )
        )

    def one(sample):
        phi, scalar, s = sample
        out = {name: op(phi).max_abs() for name, op in checks.items()}
        product_form = wedge(scalar, s)
        out["curvature_tensoriality"] = (curvature_op(product_form) - wedge(scalar, curvature_op(s))).max_abs()
        expected = wedge(calc.dbar_star(scalar), s)
        for i in range(n):
            nabla_s = bundle.covariant_section(s, i)
            for j in range(n):
                expected = expected - wedge(bundle.interior_bar(scalar, j), nabla_s) * mj.hinv[j, i]
        out["dbar_E_star_product"] = (bundle.dbar_E_star(product_form) - expected).max_abs()
        out["tau_on_sections"] = (calc.tau(s) - wedge(dbar_star_omega, s) * -2j).max_abs()
        return out

    residuals = _collect({}, mapper(one, samples))
    residuals["metric_compatibility"] = compatibility
    logger.debug("bundle identity suite rank %d over %d forms, worst %.3g", r, trials, max(residuals.values()))
    return IdentityReport(residuals=residuals, trials=trials, seed=seed, tol=tol)


def kahler_degeneration(mj, trials=5, seed=0, mapper=map):
    """On a Kahler metric the torsion operators vanish, D' = d and delta''_0 = dbar*."""
    calc = FormCalculus(mj)
    residuals = {
        "A": calc.A.matrix_residual(),
        "B": calc.B.matrix_residual(),
        "C": calc.C.matrix_residual(),
        "tau": calc.tau.matrix_residual(),
    }
    rng = np.random.default_rng(seed)
    forms = [FormJet.random(mj.n, p, q, mj.order, rng) for p, q in _random_bidegrees(mj.n, trials, rng)]
    checks = {"d_prime": calc.D_prime - calc.d, "delta0_double_prime": calc.delta0_double_prime - calc.dbar_star}

    def one(phi):
        return {name: op(phi).max_abs() for name, op in checks.items()}

    _collect(residuals, mapper(one, forms))
    return residuals
