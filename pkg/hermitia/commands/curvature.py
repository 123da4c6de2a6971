import pandas as pd

from hermitia.commands.config import resolve_metric, resolve_points
from hermitia.commands.report import CommandResult, flatten_complex, point_columns, stamp
from hermitia.geometry import connection
from hermitia.geometry.curvature import FIRST, SECOND, CurvatureSet, ricci
from hermitia.geometry.metric import metric_jet, point_to_reals
from hermitia.serializers import CurvatureReportSerializer
from hermitia.utils import log_data_issue, log_output


def point_curvature(field_, z, cfg):
    """The requested quantities at one point, as plain arrays keyed by name."""
    mj = metric_jet(field_, z, cfg.order, tol=cfg.positivity_tol)
    curv = CurvatureSet(mj)
    what = cfg.what
    row = {"point": point_to_reals(mj.point)}
    if what in ("christoffel", "all"):
        row["christoffel"] = connection.build(mj, cfg.connection).connection_matrices().value
    if what in ("tensor", "all"):
        t = curv.tensor(cfg.connection)
        row["tensor"] = {"kind": t.kind, "components": t.components}
    if what in ("ricci1", "ricci2"):
        r = ricci(curv.tensor(cfg.connection), mj, FIRST if what == "ricci1" else SECOND)
        row["ricci"] = {r.label: r.matrix}
    if what in ("ricci", "all"):
        row["ricci"] = {label: r.matrix for label, r in curv.riccis.items()}
    if what in ("scalars", "all"):
        scalars = curv.scalars
        if scalars.max_imag() > cfg.positivity_tol:
            log_data_issue(f"scalar curvature at {row['point'].tolist()} has imaginary part {scalars.max_imag():.3g}")
        row["scalars"] = scalars.as_dict()
    return row


def curvature_frame(rows):
    flat = []
    for k, row in enumerate(rows):
        out = {"point_index": k, **point_columns(row["point"])}
        if "christoffel" in row:
            out.update(flatten_complex("christoffel", row["christoffel"]))
        if "tensor" in row:
            out.update(flatten_complex(row["tensor"]["kind"], row["tensor"]["components"]))
        for label, m in row.get("ricci", {}).items():
            out.update(flatten_complex(label, m))
        for name, value in row.get("scalars", {}).items():
            out.update(flatten_complex(name, value))
        flat.append(out)
    return pd.DataFrame(flat)


def cmd_curvature(cfg, mapper=map):
    field_ = resolve_metric(cfg)
    points = resolve_points(cfg, field_)
    rows = list(mapper(lambda z: point_curvature(field_, z, cfg), points))
    log_output(f"curvature: {cfg.what} of the {cfg.connection} connection at {len(rows)} points of {field_.kind}")
    data = stamp(
        cfg,
        {
            "metric": field_.describe(),
            "connection": cfg.connection,
            "what": cfg.what,
            "points": rows,
        },
    )
    return CommandResult(
        data=data,
        serializer_class=CurvatureReportSerializer,
        frame=curvature_frame(rows),
        csv_notes=[f"metric {field_.kind} dim {field_.n}", f"connection {cfg.connection}", f"what {cfg.what}"],
    )
