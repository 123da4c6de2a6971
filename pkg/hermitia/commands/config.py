"""
Run configuration shared by the management command and the api views.

Both front ends hand over a plain dict of options; `build_config` checks
it and fills defaults from settings, `resolve_metric` and `resolve_points`
turn it into geometry objects.
"""
from dataclasses import asdict, dataclass, field

import numpy as np
from django.conf import settings

from hermitia.geometry import normal_forms
from hermitia.geometry.connection import KINDS
from hermitia.geometry.flow import MIN_GRID
from hermitia.geometry.metric import Flat, Hopf, kahler_torus, random_torus
from hermitia.geometry.metric_io import ingest_torus_metric
from hermitia.geometry.suites import NORMAL_FORM, SUITES

CURVATURE = "curvature"
CHECK = "check"
VERIFY = "verify"
FLOW = "flow"
SUBCOMMANDS = (CURVATURE, CHECK, VERIFY, FLOW)

BUILTIN_METRICS = (
    "flat",
    "hopf",
    "normal-form",
    "balanced",
    "skt",
    "balanced-skt",
    "kahler-torus",
    "random-torus",
)
WHAT = ("all", "christoffel", "tensor", "ricci", "ricci1", "ricci2", "scalars")
FORMATS = ("json", "csv")


class ConfigError(Exception):
    """Options that do not describe a runnable job."""


@dataclass
class RunConfig:
    subcommand: str
    metric: str = None
    dim: int = None
    metric_file: str = None
    points: list = None
    sample: int = None
    seed: int = 0
    order: int = 3
    connection: str = "chern"
    what: str = "all"
    suite: str = None
    trials: int = None
    npoints: int = None
    tol: float = None
    positivity_tol: float = 1e-10
    classify_tol: float = 1e-9
    clauses: list = field(default_factory=list)
    p: int = 1
    hopf_ode: bool = False
    mu: float = 0.0
    c0: float = 1.0
    T: float = 1.0
    steps: int = 10
    grid: int = 8
    dt: float = None
    cadence: int = 1
    format: str = "json"
    output: str = None
    dump: str = None
    fit: str = None

    def echo(self):
        """JSON-friendly copy of every option, embedded in reports."""
        out = asdict(self)
        if self.points is not None:
            out["points"] = [[float(v) for v in p] for p in self.points]
        return out


def _parse_point(text):
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"point {text!r} is not a comma separated list of reals") from None


def _number(options, key, kind, default):
    value = options.get(key)
    if value is None or value == "":
        return default
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a {kind.__name__}, got {value!r}") from None


def build_config(subcommand, options):
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}; expected one of {', '.join(SUBCOMMANDS)}")
    cfg = RunConfig(subcommand=subcommand)
    cfg.metric = options.get("metric") or None
    cfg.metric_file = options.get("metric_file") or None
    cfg.dim = _number(options, "dim", int, None)
    cfg.sample = _number(options, "sample", int, None)
    cfg.seed = _number(options, "seed", int, 0)
    cfg.order = _number(options, "order", int, settings.HERMITIA_JET_ORDER)
    cfg.connection = options.get("connection") or cfg.connection
    cfg.what = options.get("what") or cfg.what
    cfg.suite = options.get("suite") or None
    cfg.trials = _number(options, "trials", int, None)
    cfg.npoints = _number(options, "points", int, None)
    cfg.tol = _number(options, "tol", float, None)
    cfg.positivity_tol = _number(options, "positivity_tol", float, settings.HERMITIA_POSITIVITY_TOL)
    cfg.classify_tol = _number(options, "classify_tol", float, settings.HERMITIA_CLASSIFY_TOL)
    cfg.clauses = list(options.get("clause") or [])
    cfg.p = _number(options, "p", int, 1)
    cfg.hopf_ode = bool(options.get("hopf_ode"))
    cfg.mu = _number(options, "mu", float, 0.0)
    cfg.c0 = _number(options, "c0", float, 1.0)
    cfg.T = _number(options, "T", float, 1.0)
    cfg.steps = _number(options, "steps", int, 10)
    cfg.grid = _number(options, "grid", int, 8)
    cfg.dt = _number(options, "dt", float, None)
    cfg.cadence = _number(options, "cadence", int, 1)
    cfg.format = options.get("format") or "json"
    cfg.output = options.get("output") or None
    cfg.dump = options.get("dump") or None
    cfg.fit = options.get("fit") or None

    raw_points = options.get("point") or []
    if isinstance(raw_points, str):
        raw_points = [raw_points]
    if raw_points:
        cfg.points = [_parse_point(p) for p in raw_points]

    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.metric and cfg.metric_file:
        raise ConfigError("give either a builtin metric or a metric file, not both")
    if cfg.metric and cfg.metric not in BUILTIN_METRICS:
        raise ConfigError(f"unknown metric {cfg.metric!r}; expected one of {', '.join(BUILTIN_METRICS)}")
    if cfg.dim is not None and cfg.dim < 1:
        raise ConfigError(f"dimension must be positive, got {cfg.dim}")
    if cfg.points and cfg.sample:
        raise ConfigError("give either explicit points or a sample count, not both")
    if cfg.sample is not None and cfg.sample < 1:
        raise ConfigError("sample count must be positive")
    if cfg.format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.format!r}; expected json or csv")
    if cfg.connection not in KINDS:
        raise ConfigError(f"unknown connection {cfg.connection!r}; expected one of {', '.join(KINDS)}")
    if cfg.what not in WHAT:
        raise ConfigError(f"unknown quantity {cfg.what!r}; expected one of {', '.join(WHAT)}")
    if cfg.order < 2:
        raise ConfigError("curvature needs jets of order at least 2")

    needs_metric = cfg.subcommand in (CURVATURE, CHECK) or (cfg.subcommand == FLOW and not cfg.hopf_ode)
    if needs_metric and not (cfg.metric or cfg.metric_file):
        raise ConfigError(f"{cfg.subcommand} needs --metric or --metric-file")
    if cfg.subcommand == VERIFY:
        if cfg.suite is None:
            raise ConfigError(f"verify needs --suite, one of {', '.join(SUITES)}")
        if cfg.suite not in SUITES:
            raise ConfigError(f"unknown suite {cfg.suite!r}; expected one of {', '.join(SUITES)}")
        if cfg.suite == NORMAL_FORM and cfg.dim is not None and cfg.dim < 2:
            raise ConfigError(f"the normal-form suite needs --dim >= 2, got {cfg.dim}")
    if cfg.subcommand == FLOW:
        if cfg.T < 0:
            raise ConfigError("flow horizon T must be nonnegative")
        if cfg.hopf_ode and cfg.steps < 1:
            raise ConfigError("the Hopf reduction needs at least one step")
        if not cfg.hopf_ode:
            if cfg.grid < MIN_GRID:
                raise ConfigError(f"the flow grid needs at least {MIN_GRID} points per axis, got {cfg.grid}")
            if cfg.cadence < 1:
                raise ConfigError("diagnostic cadence must be at least one step")
            if cfg.dt is not None and cfg.dt <= 0:
                raise ConfigError(f"time step must be positive, got {cfg.dt}")
    if cfg.points:
        n = resolved_dim(cfg)
        if n is not None:
            for p in cfg.points:
                if len(p) != 2 * n:
                    raise ConfigError(f"points in dimension {n} need {2 * n} reals, got {len(p)}")


def resolved_dim(cfg):
    """Dimension implied by the options, when known before loading a file."""
    if cfg.metric_file:
        return None
    if cfg.dim is not None:
        return cfg.dim
    return 2


def resolve_metric(cfg):
    """The metric field the options describe; file errors propagate as HermitiaError."""
    if cfg.metric_file:
        return ingest_torus_metric(cfg.metric_file)
    n = resolved_dim(cfg)
    name = cfg.metric
    if name == "flat":
        return Flat(n)
    if name == "hopf":
        return Hopf(n)
    if name == "normal-form":
        return normal_forms.random_normal_form(n, cfg.seed).metric
    if name in normal_forms.FAMILIES:
        return normal_forms.FAMILIES[name](n, cfg.seed).metric
    if name == "kahler-torus":
        return kahler_torus(n, seed=cfg.seed)
    if name == "random-torus":
        return random_torus(n, seed=cfg.seed)
    raise ConfigError("no metric given")


def resolve_points(cfg, field_, default="origin"):
    """
    Explicit points, a seeded uniform sample, or the default: the origin
    (one seeded sample for Hopf, which excludes it), or None so the caller
    picks its own sampler.
    """
    if cfg.points:
        for p in cfg.points:
            if len(p) != 2 * field_.n:
                raise ConfigError(f"points in dimension {field_.n} need {2 * field_.n} reals, got {len(p)}")
        return [np.asarray(p[0::2]) + 1j * np.asarray(p[1::2]) for p in cfg.points]
    if cfg.sample:
        return list(field_.sample(cfg.sample, seed=cfg.seed))
    if default is None:
        return None
    if field_.kind == Hopf.kind:
        return list(field_.sample(1, seed=cfg.seed))
    return [np.zeros(field_.n, dtype=complex)]
