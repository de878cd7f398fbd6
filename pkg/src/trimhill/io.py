"""Reading claim-size style data files and writing plot-ready tables."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np

from .estimators import NonPositiveDataError, SortedSample, log_excesses, trajectory_values, trajectory_slope

LOG = logging.getLogger(__name__)


class DataError(ValueError):
    """Input data could not be turned into a usable sample."""


@dataclass(frozen=True, eq=False)
class Dataset:
    source: str
    raw_count: int
    dropped_nonpositive: int
    sample: SortedSample

    @property
    def retained_count(self):
        return self.sample.n

    @property
    def values(self):
        return self.sample.values


def _parse_float(text, where):
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse {text!r} as a number") from None


def read_values(path, column=None):
    """
    Numbers from ``path``: one per line, or the named ``column`` of a CSV
    with a header row. Blank lines and ``#`` comments are skipped.
    """
    with open(path, newline="") as fh:
        text = fh.read()
    values = []
    if column is None:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(_parse_float(line, f"{path}:{lineno}"))
        return np.array(values, dtype=float)

    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    try:
        idx = header.index(column)
    except ValueError:
        raise DataError(f"{path}: no column {column!r} (have {header})") from None
    for lineno, row in enumerate(reader, 2):
        if not row or not "".join(row).strip():
            continue
        if idx >= len(row):
            raise DataError(f"{path}:{lineno}: row has no field {idx + 1}")
        values.append(_parse_float(row[idx].strip(), f"{path}:{lineno}"))
    return np.array(values, dtype=float)


def ingest(path, column=None, drop_nonpositive=False):
    """
    Load and validate the values, then sort them in decreasing order.

    Non-positive values are an error unless ``drop_nonpositive`` is set, in
    which case they are removed with a logged warning.
    """
    raw = read_values(path, column)
    bad = ~(raw > 0)
    nbad = int(bad.sum())
    if nbad and nbad == raw.size:
        raise DataError(f"{path}: all {raw.size} values are non-positive")
    if nbad:
        if not drop_nonpositive:
            raise DataError(f"{path}: {nbad} non-positive value(s); use --drop-nonpositive to discard them")
        LOG.warning("%s: dropped %d non-positive value(s)", path, nbad)
    kept = raw[~bad]
    if kept.size < 2:
        raise DataError(f"{path}: need at least 2 positive values, got {kept.size}")
    try:
        sample = SortedSample(kept)
    except NonPositiveDataError as exc:  # pragma: no cover - filtered above
        raise DataError(str(exc)) from None
    return Dataset(source=str(path), raw_count=int(raw.size), dropped_nonpositive=nbad, sample=sample)


def default_k_list(n):
    """1, 1+step, 1+2 step, ... below n with step max(1, n // 20)."""
    step = max(1, n // 20)
    return list(range(1, n, step))


def lth_tables(s, k_list=None, diag_ks=None):
    """
    CSV text for the trajectory table ``k,b,T_bk`` (requested ``k`` only)
    and the diagnostics table ``k,emp_var,slope`` (every ``k`` by default).
    """
    k_list = default_k_list(s.n) if k_list is None else list(k_list)
    diag_ks = range(1, s.n) if diag_ks is None else diag_ks
    traj = io.StringIO()
    w = csv.writer(traj, lineterminator="\n")
    w.writerow(["k", "b", "T_bk"])
    for k in k_list:
        t = trajectory_values(log_excesses(s, k))
        for b, v in enumerate(t, 1):
            w.writerow([k, b, repr(float(v))])
    diag = io.StringIO()
    w = csv.writer(diag, lineterminator="\n")
    w.writerow(["k", "emp_var", "slope", "hill", "averaged_trimmed"])
    for k in diag_ks:
        t = trajectory_values(log_excesses(s, k))
        w.writerow([k, repr(float(np.var(t))), repr(trajectory_slope(t)), repr(float(t[-1])), repr(float(t.mean()))])
    return traj.getvalue(), diag.getvalue()


def write_values(path, values):
    with open(path, "w") as fh:
        for v in values:
            fh.write(f"{float(v)!r}\n")
