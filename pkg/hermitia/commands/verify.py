from hermitia.commands.config import resolve_metric, resolve_points
from hermitia.commands.report import CommandResult, stamp
from hermitia.geometry import suites
from hermitia.serializers import SuiteReportSerializer
from hermitia.utils import log_data_issue, log_output, report_counts


def suite_arguments(cfg):
    """Keyword arguments of the chosen suite; unset options keep the suite defaults."""
    kwargs = {"seed": cfg.seed}
    if cfg.tol is not None:
        kwargs["tol"] = cfg.tol
    if cfg.suite == suites.APPENDIX:
        kwargs["order"] = cfg.order
        if cfg.trials is not None:
            kwargs["trials"] = cfg.trials
        if cfg.metric or cfg.metric_file:
            field_ = resolve_metric(cfg)
            point = resolve_points(cfg, field_)[0]
            kwargs["metrics"] = [(f"{field_.kind}-{field_.n}", field_, point)]
    elif cfg.suite == suites.HOPF_ORACLE:
        kwargs["order"] = cfg.order
        if cfg.dim is not None:
            kwargs["dims"] = (cfg.dim,)
        if cfg.npoints is not None:
            kwargs["points"] = cfg.npoints
    elif cfg.suite == suites.NORMAL_FORM:
        if cfg.dim is not None:
            kwargs["dims"] = (cfg.dim,)
        if cfg.trials is not None:
            kwargs["count"] = cfg.trials
        if cfg.npoints is not None:
            kwargs["kahler_points"] = cfg.npoints
    return kwargs


def cmd_verify(cfg, mapper=map):
    report = suites.run_suite(cfg.suite, mapper=mapper, **suite_arguments(cfg))
    for row in report.failures():
        log_data_issue(
            f"{report.suite}: {row['family']} {row['check']} residual {row['residual']:.3g} exceeds {row['tol']:.3g}"
        )
    asserted = [r for r in report.rows if r["asserted"]]
    report_counts(
        {
            "success": sum(r["passed"] for r in asserted),
            "fail": sum(not r["passed"] for r in asserted),
            "skipped": len(report.rows) - len(asserted),
        }
    )
    log_output(f"verify {report.suite}: {'pass' if report.passed else 'FAIL'}, worst residual {report.max_residual:.3g}")
    data = stamp(cfg, report.as_dict())
    return CommandResult(
        data=data,
        serializer_class=SuiteReportSerializer,
        frame=report.as_frame(),
        csv_notes=[f"suite {report.suite}", f"passed {report.passed}"] + report.notes,
        failed=not report.passed,
    )
