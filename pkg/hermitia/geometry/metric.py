"""
Hermitian metric fields on a chart and their jets at a point.

Every field evaluates h_{i jbar}(z) as an n x n Hermitian matrix and expands
it as a matrix of jets in w = z - p around a point p.
"""
import logging
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import factorial, ndtri

from .errors import DomainError, HermitianConstraintError, PositivityError, StructuralError
from .jets import Jet, jet_matrix_inverse, jet_space

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-10


def as_point(point, n):
    z = np.asarray(point, dtype=complex).reshape(-1)
    if z.shape != (n,):
        raise DomainError(f"expected a point with {n} complex coordinates, got {z.shape[0]}")
    if not np.all(np.isfinite(z)):
        raise DomainError("point has non-finite coordinates")
    return z


def point_from_reals(values, n):
    """(re_1, im_1, ..., re_n, im_n) to a complex point."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape != (2 * n,):
        raise DomainError(f"expected {2 * n} real coordinates, got {values.shape[0]}")
    return values[0::2] + 1j * values[1::2]


def point_to_reals(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(2 * z.shape[-1])
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def torus_coordinates(z):
    """Complex points (..., n) to real torus coordinates (..., 2n)."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def monomial_values(points, exponents):
    """x^e for x = (z, zbar) at points (P, n); returns (P, T)."""
    x = np.concatenate([points, points.conj()], axis=-1)
    return np.prod(x[:, None, :] ** exponents[None, :, :], axis=-1)


def shifted_monomials(point, exponents, order):
    """Jets of x^e with x = p + w, stacked on axis 0."""
    n = point.shape[0]
    space = jet_space(n, order)
    w = Jet.variables(n, order) if order >= 1 else Jet.zeros(n, order, (2 * n,))
    x = w + np.concatenate([point, point.conj()])
    top = int(exponents.max()) if exponents.size else 0
    powers = [[Jet.constant(n, order, 1.0)] for _ in range(2 * n)]
    for v in range(2 * n):
        for _ in range(top):
            powers[v].append(powers[v][-1] * x[v])
    monos = np.zeros((len(exponents), space.size), dtype=complex)
    for t, e in enumerate(exponents):
        acc = Jet.constant(n, order, 1.0)
        for v in np.nonzero(e)[0]:
            acc = acc * powers[v][e[v]]
        monos[t] = acc.coeffs
    return monos


class MetricField:
    """A Hermitian metric on a chart of C^n."""

    kind = "abstract"

    def __init__(self, n):
        if n < 1:
            raise StructuralError(f"dimension must be positive, got {n}")
        self.n = n

    def evaluate(self, point):
        z = as_point(point, self.n)
        return self.evaluate_many(z[None])[0]

    def evaluate_many(self, points):
        raise NotImplementedError

    def jet(self, point, order):
        raise NotImplementedError

    def points_from_unit(self, u):
        """Map samples of the unit cube [0,1)^{2n} into the field's domain."""
        raise NotImplementedError

    def sample(self, count, seed=0):
        rng = np.random.default_rng(seed)
        return self.points_from_unit(rng.random((count, 2 * self.n)))

    def describe(self):
        return {"kind": self.kind, "dim": self.n}


class Flat(MetricField):
    kind = "flat"

    def evaluate_many(self, points):
        points = np.asarray(points, dtype=complex)
        return np.broadcast_to(np.eye(self.n, dtype=complex), points.shape[:-1] + (self.n, self.n)).copy()

    def jet(self, point, order):
        as_point(point, self.n)
        return Jet.constant(self.n, order, np.eye(self.n))

    def points_from_unit(self, u):
        x = np.asarray(u) - 0.5
        return x[:, : self.n] + 1j * x[:, self.n :]


class Hopf(MetricField):
    """h = 4 delta / |z|^2 on C^n minus the origin."""

    kind = "hopf"

    def _radius2(self, points):
        r2 = np.sum(np.abs(points) ** 2, axis=-1)
        if np.any(r2 <= np.finfo(float).tiny):
            raise DomainError("the Hopf metric is undefined at z = 0")
        return r2

    def evaluate_many(self, points):
        points = np.asarray(points, dtype=complex)
        r2 = self._radius2(points)
        return (4.0 / r2)[..., None, None] * np.eye(self.n)

    def jet(self, point, order):
        z = as_point(point, self.n)
        r2 = self._radius2(z)
        n = self.n
        r = Jet.constant(n, order, r2)
        if order >= 1:
            w = Jet.variables(n, order)
            for i in range(n):
                r = r + w[i] * np.conj(z[i]) + w[n + i] * z[i] + w[i] * w[n + i]
        return r.inverse() * (4.0 * np.eye(n))

    def points_from_unit(self, u):
        u = np.clip(np.asarray(u, dtype=float), 1e-12, 1 - 1e-12)
        g = ndtri(u)
        direction = g[:, : self.n] + 1j * g[:, self.n :]
        direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
        radius = 1.0 + u[:, :1]
        return radius * direction


class NormalForm(MetricField):
    """
    h = identity + linear torsion part + Hermitian polynomial of degree 2..3.

    The linear part sum_i X[i,j,l] z^i + conj(X[i,l,j]) zbar^i with X
    antisymmetric in its first two slots keeps Gamma^k_{ij}(0) = 0. With X = 0
    the first derivatives vanish at the origin as well.
    """

    kind = "normal-form"

    def __init__(self, n, torsion=None, exponents=None, coefficients=None, radius=0.1):
        super().__init__(n)
        self.torsion = np.zeros((n, n, n), dtype=complex) if torsion is None else np.asarray(torsion, dtype=complex)
        if self.torsion.shape != (n, n, n):
            raise StructuralError(f"torsion must have shape {(n, n, n)}")
        if np.abs(self.torsion + self.torsion.transpose(1, 0, 2)).max() > 1e-12:
            raise StructuralError("torsion must be antisymmetric in its first two indices")
        if exponents is None:
            exponents = np.zeros((0, 2 * n), dtype=np.int64)
            coefficients = np.zeros((0, n, n), dtype=complex)
        self.exponents = np.asarray(exponents, dtype=np.int64).reshape(-1, 2 * n)
        self.coefficients = np.asarray(coefficients, dtype=complex).reshape(-1, n, n)
        degrees = self.exponents.sum(axis=1)
        if np.any(degrees < 2) or np.any(degrees > 3):
            raise StructuralError("polynomial perturbation must have degrees 2 and 3 only")
        self.radius = radius

    @classmethod
    def from_perturbation(cls, n, torsion=None, coefficients=None, radius=0.1):
        """
        Hermitianize P into (P + conj(P)^T) / 2. `coefficients` has one n x n
        matrix per monomial of `polynomial_exponents(n)`.
        """
        exps = polynomial_exponents(n)
        if coefficients is None:
            coefficients = np.zeros((len(exps), n, n), dtype=complex)
        return cls(n, torsion=torsion, exponents=exps, coefficients=hermitianize(exps, coefficients), radius=radius)

    def linear_coefficients(self):
        """(2n, n, n) array: d h / d x^v at the origin for x = (z, zbar)."""
        X = self.torsion
        return np.concatenate([X, X.conj().transpose(0, 2, 1)], axis=0)

    def evaluate_many(self, points):
        points = np.asarray(points, dtype=complex).reshape(-1, self.n)
        x = np.concatenate([points, points.conj()], axis=-1)
        h = np.broadcast_to(np.eye(self.n, dtype=complex), (len(points), self.n, self.n)).copy()
        h += np.einsum("pv,vjl->pjl", x, self.linear_coefficients())
        if len(self.exponents):
            h += np.einsum("pt,tjl->pjl", monomial_values(points, self.exponents), self.coefficients)
        return h

    def jet(self, point, order):
        z = as_point(point, self.n)
        n = self.n
        h = Jet.constant(n, order, self.evaluate(z))
        if order == 0:
            return h
        w = Jet.variables(n, order)
        space = w.space
        lin = self.linear_coefficients()
        h = h + Jet(space, np.einsum("vm,vjl->jlm", w.coeffs, lin))
        if len(self.exponents):
            monos = shifted_monomials(z, self.exponents, order)
            monos[:, 0] = 0.0
            h = h + Jet(space, np.einsum("tm,tjl->jlm", monos, self.coefficients))
        return h

    def points_from_unit(self, u):
        x = (np.asarray(u) - 0.5) * (2.0 * self.radius / np.sqrt(2 * self.n))
        return x[:, : self.n] + 1j * x[:, self.n :]


def hermitianize(exponents, coefficients):
    """(P + conj(P)^T) / 2 with the monomial z^a zbar^b paired to z^b zbar^a."""
    exponents = np.asarray(exponents, dtype=np.int64)
    coefficients = np.asarray(coefficients, dtype=complex)
    n = exponents.shape[1] // 2
    index = {tuple(e): t for t, e in enumerate(exponents.tolist())}
    try:
        swap = np.array([index[tuple(e[n:] + e[:n])] for e in exponents.tolist()], dtype=np.int64)
    except KeyError as exc:
        raise StructuralError(f"monomial set is not closed under conjugation: {exc}") from None
    return 0.5 * (coefficients + coefficients[swap].conj().transpose(0, 2, 1))


def polynomial_exponents(n, degrees=(2, 3)):
    exps = []
    for d in degrees:
        for combo in combinations_with_replacement(range(2 * n), d):
            e = [0] * (2 * n)
            for v in combo:
                e[v] += 1
            exps.append(e)
    return np.array(exps, dtype=np.int64).reshape(-1, 2 * n)


def torus_wavevectors(freqs, n):
    """alpha_j, beta_j with 2 pi i m.x = sum alpha_j z^j + beta_j zbar^j."""
    freqs = np.asarray(freqs, dtype=float).reshape(-1, 2 * n)
    mx, my = freqs[:, :n], freqs[:, n:]
    alpha = np.pi * (1j * mx + my)
    beta = np.pi * (1j * mx - my)
    return alpha, beta


def check_hermitian_modes(freqs, amps, tol=1e-12):
    """A^{(-m)} must be the conjugate transpose of A^{(m)} for every m."""
    table = {tuple(int(v) for v in m): k for k, m in enumerate(freqs)}
    for k, m in enumerate(freqs):
        key = tuple(int(v) for v in m)
        partner = tuple(-v for v in key)
        if partner not in table:
            raise HermitianConstraintError(f"frequency {key} has no conjugate partner {partner}", frequency=key)
        mismatch = np.abs(amps[table[partner]] - amps[k].conj().T).max()
        if mismatch > tol * max(1.0, np.abs(amps[k]).max()):
            raise HermitianConstraintError(
                f"amplitude at {partner} is not the conjugate transpose of {key} (off by {mismatch:.3g})",
                frequency=key,
            )


class TorusFourier(MetricField):
    """h(x) = sum_m A^{(m)} exp(2 pi i m.x) with z^j = x^j + i x^{n+j}."""

    kind = "torus"

    def __init__(self, n, freqs, amps, validate=True):
        super().__init__(n)
        self.freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, 2 * n)
        self.amps = np.asarray(amps, dtype=complex).reshape(-1, n, n)
        if len(self.freqs) != len(self.amps):
            raise StructuralError("one amplitude matrix per frequency is required")
        if len({tuple(m) for m in self.freqs.tolist()}) != len(self.freqs):
            raise StructuralError("frequencies must be distinct")
        check_hermitian_modes(self.freqs, self.amps)
        self.alpha, self.beta = torus_wavevectors(self.freqs, n)
        if validate:
            validate_positivity(self)

    def evaluate_many(self, points):
        points = np.asarray(points, dtype=complex).reshape(-1, self.n)
        x = torus_coordinates(points)
        phases = np.exp(2j * np.pi * x @ self.freqs.T)
        return np.einsum("pf,fij->pij", phases, self.amps)

    def evaluate_grid(self, x):
        """Evaluate at real torus coordinates x of shape (..., 2n)."""
        x = np.asarray(x, dtype=float)
        phases = np.exp(2j * np.pi * x @ self.freqs.T)
        return np.einsum("...f,fij->...ij", phases, self.amps)

    def jet(self, point, order):
        z = as_point(point, self.n)
        space = jet_space(self.n, order)
        x = torus_coordinates(z)
        phase0 = np.exp(2j * np.pi * self.freqs @ x)
        rates = np.concatenate([self.alpha, self.beta], axis=1)
        exps = space.exponents
        series = np.prod(rates[:, None, :] ** exps[None] / factorial(exps)[None], axis=-1)
        return Jet(space, np.einsum("f,fm,fij->ijm", phase0, series, self.amps))

    def points_from_unit(self, u):
        u = np.asarray(u, dtype=float)
        return u[:, : self.n] + 1j * u[:, self.n :]

    def describe(self):
        return {"kind": self.kind, "dim": self.n, "modes": len(self.freqs)}


class Scaled(MetricField):
    kind = "scaled"

    def __init__(self, base, factor):
        super().__init__(base.n)
        if factor <= 0:
            raise StructuralError(f"scale factor must be positive, got {factor}")
        self.base = base
        self.factor = float(factor)

    def evaluate_many(self, points):
        return self.factor * self.base.evaluate_many(points)

    def jet(self, point, order):
        return self.base.jet(point, order) * self.factor

    def points_from_unit(self, u):
        return self.base.points_from_unit(u)

    def describe(self):
        return {"kind": self.kind, "dim": self.n, "factor": self.factor, "base": self.base.describe()}


def validation_grid(n, per_axis=5):
    axes = [np.arange(per_axis) / per_axis] * (2 * n)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def validate_positivity(field, x=None, tol=POSITIVITY_TOL):
    """Minimum eigenvalue check on a 5^{2n} grid of the real torus coordinates."""
    if x is None:
        x = validation_grid(field.n)
    points = x[:, : field.n] + 1j * x[:, field.n :]
    values = field.evaluate_many(points)
    eigs = np.linalg.eigvalsh(values)
    lowest = eigs[:, 0]
    worst = int(np.argmin(lowest))
    if lowest[worst] <= tol:
        raise PositivityError(
            f"metric is not positive definite at x = {x[worst].tolist()} (min eigenvalue {lowest[worst]:.3g})",
            witness=x[worst].tolist(),
            min_eigenvalue=float(lowest[worst]),
        )
    logger.debug("positivity validated on %d samples, min eigenvalue %.3g", len(x), lowest.min())
    return float(lowest.min())


@dataclass(frozen=True, eq=False)
class MetricJet:
    point: np.ndarray
    h: Jet
    hinv: Jet
    det: Jet
    order: int

    @property
    def n(self):
        return self.h.n

    @property
    def H0(self):
        return self.h.value

    @property
    def HI0(self):
        return self.hinv.value


def metric_jet(field, point, order=3, tol=POSITIVITY_TOL):
    z = as_point(point, field.n)
    h = field.jet(z, order)
    h0 = h.value
    if np.abs(h0 - h0.conj().T).max() > 1e-12 * max(1.0, np.abs(h0).max()):
        raise StructuralError("metric constant term is not Hermitian")
    lowest = np.linalg.eigvalsh(h0)[0]
    if lowest <= tol:
        raise PositivityError(
            f"metric is not positive definite at {z.tolist()} (min eigenvalue {lowest:.3g})",
            witness=point_to_reals(z).tolist(),
            min_eigenvalue=float(lowest),
        )
    hinv, det = jet_matrix_inverse(h)
    return MetricJet(point=z, h=h, hinv=hinv, det=det, order=order)


def kahler_torus(n, seed=0, modes=2, amplitude=0.05):
    """
    Potential-generated torus metric: A^{(m)}_{ij} = c_m alpha_i beta_j,
    c_{-m} = conj(c_m), so h = identity + i d dbar of a real potential.
    """
    rng = np.random.default_rng(seed)
    chosen = _draw_frequencies(n, modes, rng)
    freqs = [np.zeros(2 * n, dtype=np.int64)]
    amps = [np.eye(n, dtype=complex)]
    blocks = []
    for m in chosen:
        alpha, beta = torus_wavevectors(m, n)
        c = rng.normal() + 1j * rng.normal()
        blocks.append((m, c * np.outer(alpha[0], beta[0])))
    total = sum(2 * np.linalg.norm(a, 2) for _, a in blocks)
    scale = amplitude / total if total > 0 else 0.0
    for m, a in blocks:
        freqs += [m, -m]
        amps += [scale * a, (scale * a).conj().T]
    return TorusFourier(n, np.array(freqs), np.array(amps))


def random_torus(n, seed=0, modes=2, amplitude=0.2):
    """Generic (non-Kahler) torus metric with Hermitian-paired random modes."""
    rng = np.random.default_rng(seed)
    chosen = _draw_frequencies(n, modes, rng)
    freqs = [np.zeros(2 * n, dtype=np.int64)]
    amps = [np.eye(n, dtype=complex)]
    blocks = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in chosen]
    total = sum(2 * np.linalg.norm(a, 2) for a in blocks)
    for m, a in zip(chosen, blocks):
        a = a * (amplitude / total)
        freqs += [m, -m]
        amps += [a, a.conj().T]
    return TorusFourier(n, np.array(freqs), np.array(amps))


def _draw_frequencies(n, count, rng):
    seen = set()
    chosen = []
    while len(chosen) < count:
        m = rng.integers(-1, 2, size=2 * n)
        key = tuple(int(v) for v in m)
        if not any(key) or key in seen or tuple(-v for v in key) in seen:
            continue
        seen.add(key)
        chosen.append(m.astype(np.int64))
    return chosen
