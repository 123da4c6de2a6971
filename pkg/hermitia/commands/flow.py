import numpy as np
import pandas as pd
from django.conf import settings

from hermitia.commands.config import resolve_metric
from hermitia.commands.report import CommandResult, stamp
from hermitia.geometry import flow
from hermitia.geometry.metric_io import write_torus_metric
from hermitia.serializers import FlowReportSerializer, HopfSelfSimilarSerializer
from hermitia.utils import log_data_issue, log_output


def hopf_series(cfg):
    """The self-similar Hopf scale c(t), closed form and RK4, on steps + 1 times."""
    n = cfg.dim or 2
    t = np.linspace(0.0, cfg.T, cfg.steps + 1)
    closed = flow.hopf_self_similar(n, cfg.c0, cfg.mu, t)
    _, ode = flow.hopf_ode_rk4(n, cfg.c0, cfg.mu, cfg.T, cfg.steps)
    return {
        "n": n,
        "c0": cfg.c0,
        "mu": cfg.mu,
        "extinction_time": closed.extinction_time,
        "t": closed.t.tolist(),
        "c": closed.c.tolist(),
        "ode_c": ode.tolist(),
    }


def cmd_hopf_ode(cfg):
    series = hopf_series(cfg)
    if series["extinction_time"] is not None and series["extinction_time"] <= cfg.T:
        log_data_issue(f"the Hopf metric collapses at t = {series['extinction_time']:.6g}, before T = {cfg.T}")
    log_output(f"flow: Hopf reduction n = {series['n']}, mu = {cfg.mu}, c0 = {cfg.c0}, T = {cfg.T}")
    data = stamp(cfg, series)
    frame = pd.DataFrame({"t": series["t"], "c": series["c"], "ode_c": series["ode_c"]})
    return CommandResult(
        data=data,
        serializer_class=HopfSelfSimilarSerializer,
        frame=frame,
        csv_notes=[f"hopf n {series['n']} mu {cfg.mu} c0 {cfg.c0}"],
    )


def _final(state):
    origin = state.h[(0,) * (2 * state.n)]
    return {
        "t": state.t,
        "steps": state.steps,
        "h_origin": origin,
        "site_spread": float(np.abs(state.h - origin).max()),
    }


def _write_dumps(state, cfg):
    if cfg.dump:
        if cfg.dump.endswith(".npz"):
            flow.write_grid_npz(state, cfg.dump)
        else:
            flow.write_grid_csv(state, cfg.dump)
        log_output(f"flow: grid dump written to {cfg.dump}")
    if cfg.fit:
        fitted = flow.fit_torus_metric(state)
        write_torus_metric(fitted, cfg.fit, comments=[f"flowed to t = {state.t!r} with mu = {state.mu!r}"])
        log_output(f"flow: fitted torus metric with {len(fitted.freqs)} modes written to {cfg.fit}")


def cmd_flow(cfg, mapper=map):
    if cfg.hopf_ode:
        return cmd_hopf_ode(cfg)
    field_ = resolve_metric(cfg)
    config = flow.FlowConfig(grid=cfg.grid, dt=cfg.dt, cadence=cfg.cadence)
    state = flow.FlowState.from_field(field_, cfg.mu, config)

    def progress(row):
        log_output(f"flow: step {row['step']} t = {row['t']:.6g}, kahler defect {row['kahler_defect']:.3g}")

    result = flow.run(state, cfg.T, mapper=mapper, chunks=settings.HERMITIA_THREADS, progress=progress)
    halted = None
    if result.halted is not None:
        halted = {"message": str(result.halted), "site": result.halted.site, "t": result.halted.t}
        log_data_issue(f"flow halted: {result.halted}")
    _write_dumps(result.state, cfg)

    data = stamp(
        cfg,
        {
            "metric": field_.describe(),
            "completed": result.completed,
            "halted": halted,
            "diagnostics": result.diagnostics.to_dict("records"),
            "final": _final(result.state),
        },
    )
    return CommandResult(
        data=data,
        serializer_class=FlowReportSerializer,
        frame=result.diagnostics,
        csv_notes=[f"metric {field_.kind} dim {field_.n}", f"grid {cfg.grid} mu {cfg.mu} T {cfg.T}"],
        failed=not result.completed,
    )
