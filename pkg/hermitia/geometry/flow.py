"""
The flow dh/dt = -Theta2(h) + mu h on a lattice over the real torus
[0, 1)^{2n}, and its exact reduction on the Hopf family.

Sites carry n x n Hermitian matrices; Wirtinger derivatives are periodic
central differences in the 2n real coordinates, z^j = x^j + i x^{n+j}.
"""
import logging
import math
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import DomainError, FlowHalted, StructuralError
from .metric import Scaled, TorusFourier

logger = logging.getLogger(__name__)

MIN_GRID = 8
CFL = 0.1
DIAGNOSTIC_COLUMNS = ["step", "t", "kahler_defect", "min_eig", "max_eig", "einstein_residual", "wall_time"]

# periodic central difference weights on offsets -2..2
_FIRST = {
    2: np.array([0.0, -0.5, 0.0, 0.5, 0.0]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
}
_SECOND = {
    2: np.array([0.0, 1.0, -2.0, 1.0, 0.0]),
    4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


def _stencil(f, weights, axis, spacing):
    out = np.zeros_like(f)
    for offset, w in zip(range(-2, 3), weights):
        if w:
            out = out + w * np.roll(f, -offset, axis=axis)
    return out / spacing


class Derivatives:
    """First and mixed second real derivatives of a lattice field, cached per axis."""

    def __init__(self, h, spacing, spatial_order=4):
        if spatial_order not in _FIRST:
            raise StructuralError(f"spatial order must be 2 or 4, got {spatial_order}")
        self.h = h
        self.spacing = spacing
        self.spatial_order = spatial_order
        self.dims = h.ndim - 2
        self._first = {}
        self._second = {}

    def first(self, a):
        if a not in self._first:
            self._first[a] = _stencil(self.h, _FIRST[self.spatial_order], a, self.spacing)
        return self._first[a]

    def second(self, a, b):
        key = (min(a, b), max(a, b))
        if key not in self._second:
            if a == b:
                value = _stencil(self.h, _SECOND[self.spatial_order], a, self.spacing**2)
            else:
                value = _stencil(self.first(key[1]), _FIRST[self.spatial_order], key[0], self.spacing)
            self._second[key] = value
        return self._second[key]

    def dz(self, j):
        n = self.dims // 2
        return 0.5 * (self.first(j) - 1j * self.first(n + j))

    def dzbar(self, j):
        n = self.dims // 2
        return 0.5 * (self.first(j) + 1j * self.first(n + j))

    def dz_dzbar(self, i, j):
        """d^2 / dz^i dzbar^j."""
        n = self.dims // 2
        xx = self.second(i, j)
        yy = self.second(n + i, n + j)
        xy = self.second(i, n + j)
        yx = self.second(n + i, j)
        return 0.25 * (xx + yy + 1j * xy - 1j * yx)


def _hermitian(h):
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def _theta2_chunk(args):
    HI, Hzzb, Hz, Hzb = args
    first = -np.einsum("sji,sijkl->skl", HI, Hzzb)
    second = np.einsum("sji,sqp,sikq,sjpl->skl", HI, HI, Hz, Hzb, optimize=True)
    return first + second


def theta2_discrete(h, spacing, spatial_order=4, mapper=map, chunks=1):
    """
    Theta2_{k lbar} = -h^{i jbar} d_i d_jbar h_{k lbar}
                      + h^{i jbar} h^{p qbar} d_i h_{k qbar} d_jbar h_{p lbar}
    at every site of a lattice field h of shape (N, ..., N, n, n).
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[-1]
    if h.ndim != 2 * n + 2:
        raise StructuralError(f"lattice field needs {2 * n} site axes, got {h.ndim - 2}")
    grid = h.shape[:-2]
    d = Derivatives(h, spacing, spatial_order)
    Hz = np.stack([d.dz(i) for i in range(n)], axis=-3)
    Hzb = np.stack([d.dzbar(j) for j in range(n)], axis=-3)
    Hzzb = np.stack([np.stack([d.dz_dzbar(i, j) for j in range(n)], axis=-3) for i in range(n)], axis=-4)
    try:
        HI = np.linalg.inv(h)
    except np.linalg.LinAlgError:
        raise FlowHalted("singular metric on the lattice") from None

    sites = int(np.prod(grid))
    flat = (
        HI.reshape(sites, n, n),
        Hzzb.reshape(sites, n, n, n, n),
        Hz.reshape(sites, n, n, n),
        Hzb.reshape(sites, n, n, n),
    )
    pieces = [np.array_split(a, max(chunks, 1)) for a in flat]
    parts = list(mapper(_theta2_chunk, zip(*pieces)))
    return _hermitian(np.concatenate(parts).reshape(grid + (n, n)))


def kahler_defect_grid(h, spacing, spatial_order=4):
    """max |d_k h_{i jbar} - d_i h_{k jbar}| over the lattice."""
    n = h.shape[-1]
    d = Derivatives(h, spacing, spatial_order)
    Hz = [d.dz(k) for k in range(n)]
    worst = 0.0
    for i in range(n):
        for k in range(i + 1, n):
            worst = max(worst, float(np.abs(Hz[k][..., i, :] - Hz[i][..., k, :]).max()))
    return worst


def lattice(n, N):
    """Real coordinates of the N^{2n} sites, shape (N, ..., N, 2n)."""
    axes = [np.arange(N) / N] * (2 * n)
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def sample_field(field_, x):
    """Evaluate a metric field at real coordinates x of shape (..., 2n)."""
    n = field_.n
    points = x[..., :n] + 1j * x[..., n:]
    values = field_.evaluate_many(points.reshape(-1, n))
    return values.reshape(x.shape[:-1] + (n, n))


def stencil_patch(field_, point, spacing, width=5):
    """Field samples on a width^{2n} patch centred at a complex point."""
    n = field_.n
    centre = np.concatenate([np.real(point), np.imag(point)])
    offsets = (np.arange(width) - width // 2) * spacing
    mesh = np.stack(np.meshgrid(*([offsets] * (2 * n)), indexing="ij"), axis=-1)
    return sample_field(field_, mesh + centre)


def theta2_at_point(field_, point, spacing, spatial_order=4):
    """Discrete Theta2 at one point from a local stencil patch; no periodicity needed."""
    h = stencil_patch(field_, np.asarray(point, dtype=complex), spacing)
    centre = (2,) * (2 * field_.n)
    return theta2_discrete(h, spacing, spatial_order)[centre]


def convergence_order(errors, grids):
    """Observed orders log(e_k / e_{k+1}) / log(N_{k+1} / N_k) between successive refinements."""
    errors = np.asarray(errors, dtype=float)
    grids = np.asarray(grids, dtype=float)
    if errors.shape != grids.shape or len(errors) < 2:
        raise StructuralError("convergence order needs matching errors and grids, at least two of each")
    return np.log(errors[:-1] / errors[1:]) / np.log(grids[1:] / grids[:-1])


def _periodic(field_):
    if isinstance(field_, Scaled):
        return _periodic(field_.base)
    return field_.kind in ("flat", TorusFourier.kind)


@dataclass
class FlowConfig:
    grid: int = 8
    dt: float = None
    cfl: float = CFL
    spatial_order: int = 4
    cadence: int = 1

    def __post_init__(self):
        if self.grid < MIN_GRID:
            raise StructuralError(f"the stencil needs at least {MIN_GRID} points per axis, got {self.grid}")
        if self.cadence < 1:
            raise StructuralError("diagnostic cadence must be at least one step")


@dataclass
class FlowState:
    h: np.ndarray
    t: float
    mu: float
    config: FlowConfig = field(default_factory=FlowConfig)
    steps: int = 0

    @property
    def n(self):
        return self.h.shape[-1]

    @property
    def N(self):
        return self.h.shape[0]

    @property
    def spacing(self):
        return 1.0 / self.N

    @classmethod
    def from_field(cls, field_, mu, config=None):
        config = config or FlowConfig()
        if not _periodic(field_):
            raise DomainError(f"{field_.kind} metrics are not periodic on the torus and cannot be flowed on a grid")
        h = _hermitian(sample_field(field_, lattice(field_.n, config.grid)))
        state = cls(h=h, t=0.0, mu=float(mu), config=config)
        state.require_positive()
        return state

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.h)

    def require_positive(self):
        if not np.all(np.isfinite(self.h)):
            site = np.argwhere(~np.isfinite(self.h))[0][: 2 * self.n]
            raise FlowHalted(f"non-finite metric at site {site.tolist()}, t = {self.t:.6g}", site=site.tolist(), t=self.t)
        lowest = self.eigenvalues()[..., 0]
        if lowest.min() <= 0:
            site = np.unravel_index(int(np.argmin(lowest)), lowest.shape)
            raise FlowHalted(
                f"metric lost positivity at site {list(site)}, t = {self.t:.6g} (min eigenvalue {lowest.min():.3g})",
                site=[int(s) for s in site],
                t=self.t,
            )
        return float(lowest.min())

    def default_dt(self):
        return self.config.cfl * self.spacing**2 * float(self.eigenvalues()[..., 0].min())


def rhs(state, h, mapper=map, chunks=1):
    return -theta2_discrete(h, state.spacing, state.config.spatial_order, mapper, chunks) + state.mu * h


def step(state, dt=None, mapper=map, chunks=1):
    """One classical Runge-Kutta step followed by Hermitian symmetrization."""
    dt = dt or state.config.dt or state.default_dt()
    h = state.h
    k1 = rhs(state, h, mapper, chunks)
    k2 = rhs(state, h + 0.5 * dt * k1, mapper, chunks)
    k3 = rhs(state, h + 0.5 * dt * k2, mapper, chunks)
    k4 = rhs(state, h + dt * k3, mapper, chunks)
    h = _hermitian(h + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
    out = replace(state, h=h, t=state.t + dt, steps=state.steps + 1)
    out.require_positive()
    return out


def diagnostics(state, wall_time=0.0, mapper=map, chunks=1):
    eigs = state.eigenvalues()
    theta = theta2_discrete(state.h, state.spacing, state.config.spatial_order, mapper, chunks)
    return {
        "step": state.steps,
        "t": state.t,
        "kahler_defect": kahler_defect_grid(state.h, state.spacing, state.config.spatial_order),
        "min_eig": float(eigs[..., 0].min()),
        "max_eig": float(eigs[..., -1].max()),
        "einstein_residual": float(np.abs(theta - state.mu * state.h).max()),
        "wall_time": wall_time,
    }


@dataclass
class FlowRun:
    state: FlowState
    diagnostics: pd.DataFrame
    halted: FlowHalted = None

    @property
    def completed(self):
        return self.halted is None


def run(state, T, mapper=map, chunks=1, progress=None):
    """
    Integrate to time T with a fixed step that lands exactly on T. A halt
    ends the run early; the diagnostics gathered so far are kept.
    """
    if T < 0:
        raise StructuralError(f"flow horizon must be nonnegative, got {T}")
    started = time.perf_counter()
    rows = [diagnostics(state, 0.0, mapper, chunks)]
    dt = state.config.dt or state.default_dt()
    count = max(int(math.ceil(T / dt - 1e-12)), 0) if T > 0 else 0
    if count:
        dt = T / count
    halted = None
    for k in range(1, count + 1):
        try:
            state = step(state, dt, mapper, chunks)
        except FlowHalted as exc:
            halted = exc
            logger.debug("flow halted at step %d: %s", k, exc)
            break
        if k % state.config.cadence == 0 or k == count:
            rows.append(diagnostics(state, time.perf_counter() - started, mapper, chunks))
            if progress:
                progress(rows[-1])
    frame = pd.DataFrame(rows, columns=DIAGNOSTIC_COLUMNS)
    return FlowRun(state=state, diagnostics=frame, halted=halted)


# outputs


def grid_frame(state):
    n = state.n
    sites = state.h.reshape(-1, n, n)
    index, i, j = np.meshgrid(np.arange(len(sites)), np.arange(n), np.arange(n), indexing="ij")
    return pd.DataFrame(
        {
            "site_index": index.reshape(-1),
            "i": i.reshape(-1),
            "j": j.reshape(-1),
            "re": sites.real.reshape(-1),
            "im": sites.imag.reshape(-1),
        }
    )


def write_grid_csv(state, path):
    header = f"# dim {state.n}\n# N {state.N}\n# t {state.t!r}\n# mu {state.mu!r}\n"
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(header)
        grid_frame(state).to_csv(handle, index=False)


def read_grid_csv(path, config=None):
    meta = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, value = line[1:].split()
            meta[key] = value
    n, N = int(meta["dim"]), int(meta["N"])
    frame = pd.read_csv(path, comment="#")
    h = np.zeros((N ** (2 * n), n, n), dtype=complex)
    h[frame["site_index"].to_numpy(), frame["i"].to_numpy(), frame["j"].to_numpy()] = (
        frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    )
    config = config or FlowConfig(grid=N)
    return FlowState(h=h.reshape((N,) * (2 * n) + (n, n)), t=float(meta["t"]), mu=float(meta["mu"]), config=config)


def write_grid_npz(state, path):
    np.savez(path, h=state.h, dim=state.n, N=state.N, t=state.t, mu=state.mu, endianness=sys.byteorder)


def fit_torus_metric(state, threshold=1e-12):
    """
    Fourier modes of the lattice metric above threshold as a TorusFourier
    field. Nyquist modes have no conjugate partner and are dropped.
    """
    n, N = state.n, state.N
    axes = tuple(range(2 * n))
    coeffs = np.fft.fftn(state.h, axes=axes) / N ** (2 * n)
    freq = np.rint(np.fft.fftfreq(N) * N).astype(np.int64)
    mesh = np.stack(np.meshgrid(*([freq] * (2 * n)), indexing="ij"), axis=-1).reshape(-1, 2 * n)
    coeffs = coeffs.reshape(-1, n, n)
    keep = np.abs(coeffs).max(axis=(1, 2)) > threshold
    nyquist = np.any(mesh == -(N // 2), axis=1) if N % 2 == 0 else np.zeros(len(mesh), dtype=bool)
    if np.any(keep & nyquist):
        logger.debug("dropping %d Nyquist modes from the torus fit", int(np.sum(keep & nyquist)))
    keep &= ~nyquist
    index = {tuple(m): k for k, m in enumerate(mesh.tolist())}
    for k in np.nonzero(keep)[0]:
        keep[index[tuple(-v for v in mesh[k].tolist())]] = True
    amps = coeffs[keep]
    freqs = mesh[keep]
    partner = np.array([index[tuple(-v for v in m)] for m in freqs.tolist()])
    amps = 0.5 * (amps + np.conj(np.swapaxes(coeffs[partner], -1, -2)))
    return TorusFourier(n, freqs, amps)


# the Hopf family


@dataclass
class HopfSelfSimilar:
    n: int
    c0: float
    mu: float
    t: np.ndarray
    c: np.ndarray
    extinction_time: float = None

    def as_frame(self):
        return pd.DataFrame({"t": self.t, "c": self.c})


def hopf_extinction_time(n, c0, mu):
    k = (n - 1) / 4.0
    if k == 0:
        return None
    if mu == 0:
        return c0 / k
    fixed = k / mu
    if mu > 0 and c0 >= fixed:
        return None
    return math.log(fixed / (fixed - c0)) / mu


def hopf_self_similar(n, c0, mu, t):
    """
    Scale c(t) of h = c(t) 4 delta / |z|^2 under the flow: Theta2 does not
    change under h -> c h, so dc/dt = mu c - (n - 1) / 4.
    """
    if c0 <= 0:
        raise DomainError(f"initial scale must be positive, got {c0}")
    t = np.asarray(t, dtype=float)
    k = (n - 1) / 4.0
    if mu == 0:
        c = c0 - k * t
    else:
        c = (c0 - k / mu) * np.exp(mu * t) + k / mu
    return HopfSelfSimilar(n=n, c0=c0, mu=mu, t=t, c=c, extinction_time=hopf_extinction_time(n, c0, mu))


def hopf_ode_rk4(n, c0, mu, T, steps):
    """The same reduction integrated numerically, for cross-checking the closed form."""
    k = (n - 1) / 4.0
    dt = T / steps
    c = np.empty(steps + 1)
    c[0] = c0
    for s in range(steps):
        y = c[s]
        k1 = mu * y - k
        k2 = mu * (y + 0.5 * dt * k1) - k
        k3 = mu * (y + 0.5 * dt * k2) - k
        k4 = mu * (y + dt * k3) - k
        c[s + 1] = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return np.linspace(0.0, T, steps + 1), c
