"""
Torus metric files.

UTF-8 text, one statement per line, `#` starts a comment:

    dim 2
    freq 0 0 0 0 ; 1 0 0 0  0 0 1 0
    freq 1 0 0 0 ; 0.01 0 0 0  0 0 0 0
    freq -1 0 0 0 ; 0.01 0 0 0  0 0 0 0

`dim n` comes first and once. Each `freq` line gives the 2n integer
components of m, a semicolon, then the n x n amplitude A^{(m)} row-major as
re/im pairs, so h(x) = sum_m A^{(m)} exp(2 pi i m.x). Every m needs its
partner -m with the conjugate transpose amplitude.
"""
import logging

import numpy as np

from .errors import HermitianConstraintError, MetricFileError
from .metric import TorusFourier, check_hermitian_modes, validate_positivity

logger = logging.getLogger(__name__)


def _ints(tokens, line):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MetricFileError(f"expected integers, got {' '.join(tokens)!r}", line=line) from None


def _floats(tokens, line):
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError:
        raise MetricFileError(f"expected numbers, got {' '.join(tokens)!r}", line=line) from None
    if not np.all(np.isfinite(values)):
        raise MetricFileError("amplitudes must be finite", line=line)
    return values


def parse_torus_metric(text):
    """(n, freqs, amps, line numbers) from file text; grammar errors carry the line."""
    n = None
    freqs, amps, lines = [], [], []
    seen = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        keyword, _, rest = body.partition(" ")
        if keyword == "dim":
            if n is not None:
                raise MetricFileError("dim given twice", line=number)
            values = _ints(rest.split(), number)
            if len(values) != 1 or values[0] < 1:
                raise MetricFileError("dim takes one positive integer", line=number)
            n = values[0]
        elif keyword == "freq":
            if n is None:
                raise MetricFileError("freq before dim", line=number)
            if rest.count(";") != 1:
                raise MetricFileError("freq line needs exactly one ';'", line=number)
            left, right = rest.split(";")
            m = _ints(left.split(), number)
            if len(m) != 2 * n:
                raise MetricFileError(f"frequency needs {2 * n} integers, got {len(m)}", line=number)
            values = _floats(right.split(), number)
            if len(values) != 2 * n * n:
                raise MetricFileError(
                    f"amplitude needs {2 * n * n} numbers (re im per entry), got {len(values)}", line=number
                )
            key = tuple(m)
            if key in seen:
                raise MetricFileError(f"frequency {key} repeats line {seen[key]}", line=number)
            seen[key] = number
            freqs.append(m)
            amps.append((values[0::2] + 1j * values[1::2]).reshape(n, n))
            lines.append(number)
        else:
            raise MetricFileError(f"unknown statement {keyword!r}", line=number)
    if n is None:
        raise MetricFileError("missing dim line")
    if not freqs:
        raise MetricFileError("no freq lines")
    return n, np.array(freqs, dtype=np.int64), np.array(amps), lines


def read_torus_metric(text, validate=True):
    n, freqs, amps, lines = parse_torus_metric(text)
    try:
        check_hermitian_modes(freqs, amps)
    except HermitianConstraintError as exc:
        index = [tuple(int(v) for v in m) for m in freqs].index(exc.frequency)
        raise HermitianConstraintError(str(exc), frequency=exc.frequency, line=lines[index]) from None
    field = TorusFourier(n, freqs, amps, validate=False)
    if validate:
        validate_positivity(field)
    logger.debug("torus metric with %d modes in dimension %d", len(freqs), n)
    return field


def ingest_torus_metric(path, validate=True):
    """TorusFourier field from a metric file, positivity checked on the 5^{2n} grid."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise MetricFileError(f"cannot read {path}: {exc.strerror}") from None
    return read_torus_metric(text, validate=validate)


def format_torus_metric(field, comments=()):
    n = field.n
    out = [f"# {c}" for c in comments]
    out.append(f"dim {n}")
    for m, a in zip(field.freqs, field.amps):
        pairs = np.stack([a.real.reshape(-1), a.imag.reshape(-1)], axis=-1).reshape(-1)
        out.append(
            "freq " + " ".join(str(int(v)) for v in m) + " ; " + " ".join(repr(float(v)) for v in pairs)
        )
    return "\n".join(out) + "\n"


def write_torus_metric(field, path, comments=()):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_torus_metric(field, comments))
