"""CSV energy series, binary snapshots and sweep tables."""

from __future__ import annotations

import contextlib
import csv
import io
import json
from pathlib import Path
from typing import IO, Iterator, Sequence

import numpy as np

from .energy import EnergyReport
from .grid import Snapshot

SCHEMA_VERSION = 1
SNAPSHOT_MAGIC = "dswave-snapshot"
PER_INDEX = ("E0", "E1", "E", "f", "e0", "e1")
SCALARS = ("F", "identity_residual", "sup_phi_t", "sup_grad", "min_denominator", "min_determinant_factor")


def _fmt(x: float) -> str:
    return "%.17g" % x


@contextlib.contextmanager
def _text_sink(sink: str | Path | IO[str], mode: str = "w") -> Iterator[IO[str]]:
    if isinstance(sink, (str, Path)):
        with open(sink, mode, newline="") as fh:
            yield fh
    else:
        yield sink


def series_header(labels: Sequence[str]) -> list[str]:
    cols = ["t"]
    for name in PER_INDEX:
        cols.extend(f"{name}_{lab}" for lab in labels)
    return cols + list(SCALARS)


def emit_series(series: Sequence[EnergyReport], sink: str | Path | IO[str],
                labels: Sequence[str] | None = None) -> None:
    """Write one CSV row per report, every float with 17 significant digits.

    ``labels`` fixes the per-index columns for an empty series; otherwise they
    come from the first report.
    """
    if labels is None:
        labels = series[0].labels if series else []
    with _text_sink(sink) as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(series_header(labels))
        for r in series:
            row = [r.t]
            for name in PER_INDEX:
                row.extend(getattr(r, name))
            row.extend(getattr(r, name) for name in SCALARS)
            w.writerow([_fmt(float(v)) for v in row])


def read_series(source: str | Path | IO[str]) -> tuple[list[str], np.ndarray]:
    """Inverse of :func:`emit_series`: the header and a (rows, columns) array."""
    with _text_sink(source, "r") as fh:
        first = fh.readline()
        if not first.startswith("# schema_version:"):
            raise ValueError("missing schema_version header")
        version = int(first.split(":", 1)[1])
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version}")
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("missing column header")
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))
    return header, data


def write_snapshot(path: str | Path, snap: Snapshot) -> None:
    """Text header line (JSON) followed by raw little-endian float64 phi then phi_t."""
    header = {"format": SNAPSHOT_MAGIC, "version": 1, "dims": snap.phi.ndim,
              "shape": list(snap.phi.shape), "t": snap.t, "dtype": "<f8"}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(snap.phi, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(snap.phi_t, dtype="<f8").tobytes())


def read_snapshot(path: str | Path) -> Snapshot:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        if header.get("format") != SNAPSHOT_MAGIC:
            raise ValueError(f"{path} is not a snapshot file")
        shape = tuple(header["shape"])
        count = int(np.prod(shape))
        payload = np.frombuffer(fh.read(), dtype=header["dtype"])
    if payload.size != 2 * count:
        raise ValueError(f"{path}: expected {2 * count} values, found {payload.size}")
    return Snapshot(float(header["t"]), payload[:count].reshape(shape).astype(float),
                    payload[count:].reshape(shape).astype(float))


def table_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Small CSV helper for sweep, convergence and cross-check tables."""
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    return buf.getvalue()
