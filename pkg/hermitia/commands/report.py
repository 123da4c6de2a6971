from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from rest_framework.renderers import JSONRenderer

from hermitia import __version__


def stamp(cfg, body):
    """Prefix a report body with the tool version, the option echo and the seed."""
    return {"version": __version__, "config": cfg.echo(), "seed": cfg.seed, **body}


def render_json(data, serializer_class):
    payload = serializer_class(data).data
    return JSONRenderer().render(payload, renderer_context={"indent": 2}).decode("utf-8") + "\n"


def render_csv(frame, cfg, extra=()):
    header = [f"# hermitia {__version__}", f"# subcommand {cfg.subcommand}", f"# seed {cfg.seed}"]
    header += [f"# {line}" for line in extra]
    return "\n".join(header) + "\n" + frame.to_csv(index=False)


def flatten_complex(prefix, value):
    """{prefix[i,j].re: ..., prefix[i,j].im: ...} for every entry of an array."""
    array = np.asarray(value, dtype=complex)
    out = {}
    for index in np.ndindex(array.shape):
        label = f"{prefix}[{','.join(str(i) for i in index)}]" if index else prefix
        out[f"{label}.re"] = float(array[index].real)
        out[f"{label}.im"] = float(array[index].imag)
    return out


def point_columns(reals):
    return {f"x{k}": float(v) for k, v in enumerate(reals)}


@dataclass
class CommandResult:
    """A finished report: serialized with DRF for json, flattened with pandas for csv."""
    data: dict
    serializer_class: type
    frame: pd.DataFrame
    csv_notes: list = field(default_factory=list)
    failed: bool = False

    def render(self, cfg):
        if cfg.format == "csv":
            return render_csv(self.frame, cfg, self.csv_notes)
        return render_json(self.data, self.serializer_class)

    def payload(self):
        return self.serializer_class(self.data).data
