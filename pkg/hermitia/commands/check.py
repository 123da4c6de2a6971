import numpy as np
import pandas as pd

from hermitia.commands.config import ConfigError, resolve_metric, resolve_points
from hermitia.commands.report import CommandResult, point_columns, stamp
from hermitia.geometry.metric import Hopf, point_to_reals
from hermitia.geometry.positivity import CLAUSES, HYPOTHESES_ONLY, hopf_positivity_checklist, vanishing_hypothesis_report
from hermitia.geometry.structure import sampled_structure
from hermitia.serializers import CheckReportSerializer
from hermitia.utils import log_data_issue, log_output, report_counts

DEFAULT_CLAUSES = ("chern-no-vector-fields", "chern-no-forms", "chern-scalar-plurigenera")


def _structure_row(report):
    return {
        "point": point_to_reals(report.point),
        "kahler_defect": report.kahler_defect,
        "balanced_defect": report.balanced_defect,
        "skt_defect": report.skt_defect,
        "skt_traced_defect": report.skt_traced_defect,
        "kahler": report.kahler,
        "balanced": report.balanced,
        "skt": report.skt,
        "torsion": report.torsion,
    }


def _clauses(cfg):
    names = list(cfg.clauses) or list(DEFAULT_CLAUSES)
    if names == ["all"]:
        return sorted(CLAUSES)
    unknown = [c for c in names if c not in CLAUSES]
    if unknown:
        raise ConfigError(f"unknown clause {unknown[0]!r}; expected one of {', '.join(sorted(CLAUSES))} or all")
    return names


def cmd_check(cfg, mapper=map):
    field_ = resolve_metric(cfg)
    clauses = [] if field_.kind == Hopf.kind and not cfg.clauses else _clauses(cfg)
    points = resolve_points(cfg, field_, default=None)
    sampled = sampled_structure(field_, points, tol=cfg.classify_tol, order=2, seed=cfg.seed, mapper=mapper)
    sample_points = [r.point for r in sampled.reports]
    rows = [_structure_row(r) for r in sampled.reports]

    notes = ["verdicts hold at the sampled points only"]
    for r in sampled.reports:
        notes.extend(n for n in r.notes if n not in notes)

    body = {
        "metric": field_.describe(),
        "sampler": sampled.sampler,
        "tol": cfg.classify_tol,
        "verdicts": {"kahler": sampled.kahler, "balanced": sampled.balanced, "skt": sampled.skt},
        "worst": {
            key: float(max(row[key] for row in rows))
            for key in ("kahler_defect", "balanced_defect", "skt_defect", "skt_traced_defect")
        },
        "points": rows,
        "notes": notes,
    }
    counts = {"success": 0, "fail": 0, "skipped": 0}

    if field_.kind == Hopf.kind:
        checklist = hopf_positivity_checklist(
            field_.n, sample_points, tol=cfg.positivity_tol, seed=cfg.seed, classify_tol=cfg.classify_tol
        )
        body["checklist"] = checklist
        for key, entry in checklist.items():
            counts["success" if entry["holds"] else "fail"] += 1
            if not entry["holds"]:
                log_data_issue(f"Hopf checklist entry {key} fails at {entry['witness']}")
    if clauses:
        reports = [
            vanishing_hypothesis_report(
                field_, sample_points, clause, p=cfg.p, tol=cfg.positivity_tol,
                classify_tol=cfg.classify_tol, mapper=mapper,
            ).as_dict()
            for clause in clauses
        ]
        body["clauses"] = reports
        for r in reports:
            counts["success" if r["holds"] else "fail"] += 1
    if "checklist" in body or clauses:
        notes.append(HYPOTHESES_ONLY)

    log_output(
        f"check: {len(rows)} {sampled.sampler} points of {field_.kind}, "
        f"kahler {sampled.kahler}, balanced {sampled.balanced}, skt {sampled.skt}"
    )
    report_counts(counts)

    frame = pd.DataFrame(
        [
            {
                "point_index": k,
                **point_columns(row["point"]),
                **{key: row[key] for key in ("kahler_defect", "balanced_defect", "skt_defect", "skt_traced_defect")},
                "kahler": row["kahler"],
                "balanced": row["balanced"],
                "skt": row["skt"],
                "torsion_norm": float(np.abs(row["torsion"]).max()),
            }
            for k, row in enumerate(rows)
        ]
    )
    verdicts = body["verdicts"]
    return CommandResult(
        data=stamp(cfg, body),
        serializer_class=CheckReportSerializer,
        frame=frame,
        csv_notes=[f"metric {field_.kind} dim {field_.n}"] + [f"{k} {v}" for k, v in verdicts.items()],
    )
