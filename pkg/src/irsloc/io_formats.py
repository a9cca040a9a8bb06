"""On-disk formats: the tensor container and the CSV files the tool emits.

Tensor container (one array per file), header in ASCII, then raw bytes:

    irsloc-tensor 1
    name rx
    dims v=32 q=4 n=256
    dtype complex64 little-endian
    data
    <v*q*n little-endian complex64 values, C order>

The header names every dimension, and a load fails loudly when the byte
count does not match the product of the declared sizes. Data is always
little-endian complex64 regardless of the host, so files round-trip
bit-exactly between machines.

CSV schemas are fixed; column order is part of the format. Angles are
degrees everywhere except the spectrum files, which carry theta_rad to
match the spectrum export convention. Undefined probabilities (empty
denominator) are written as empty cells, never as 0.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .geometry import aoa_from_irs
from .harness import ClusterSpectra, EventCounts, MetricsReport, SweepPoint, TruthRecord
from .localize import TargetEstimate

TENSOR_MAGIC = "irsloc-tensor 1"
_TENSOR_DTYPE = np.dtype("<c8")

ESTIMATE_COLUMNS = (
    "trial", "cluster", "field", "theta_deg", "d_m", "x_m", "y_m",
    "residual", "converged", "n_iters",
)
TRUTH_COLUMNS = ("trial", "cluster", "field", "x_m", "y_m", "d_m", "theta_deg")
METRICS_COLUMNS = (
    "method", "trials",
    "near_targets", "far_targets", "near_estimates", "far_estimates",
    "near_missed", "far_missed", "near_false", "far_false",
    "p_md_near", "p_md_far", "p_fa_near", "p_fa_far",
)
SWEEP_COLUMNS = (
    "axis", "value", "method",
    "p_md_near", "p_md_far", "p_fa_near", "p_fa_far",
    "near_targets", "far_targets", "near_estimates", "far_estimates",
    "near_missed", "far_missed", "near_false", "far_false",
    "seconds",
)
EVENT_COLUMNS = (
    "trial", "method",
    "near_targets", "far_targets", "near_estimates", "far_estimates",
    "near_missed", "far_missed", "near_false", "far_false",
)
NEAR_SPECTRUM_COLUMNS = ("d_m", "theta_rad", "value")
FAR_SPECTRUM_COLUMNS = ("theta_rad", "value")
GRID_COLUMNS = (
    "cluster", "window_lo_m", "window_hi_m",
    "near_full", "near_kept", "far_full", "far_kept",
)


class TensorFormatError(ValueError):
    """Malformed tensor file: bad header or payload size mismatch."""


class TensorFile(NamedTuple):
    name: str
    dims: tuple[tuple[str, int], ...]
    array: np.ndarray


def save_tensor(path: str | Path, name: str, array: np.ndarray, dim_names: Sequence[str]) -> None:
    array = np.asarray(array)
    if array.ndim != len(dim_names):
        raise TensorFormatError(
            f"array has {array.ndim} dimensions but {len(dim_names)} names given"
        )
    dims = " ".join(f"{n}={s}" for n, s in zip(dim_names, array.shape))
    header = f"{TENSOR_MAGIC}\nname {name}\ndims {dims}\ndtype complex64 little-endian\ndata\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(array, dtype=_TENSOR_DTYPE).tobytes())


def load_tensor(path: str | Path) -> TensorFile:
    blob = Path(path).read_bytes()
    sentinel = b"data\n"
    cut = blob.find(sentinel)
    if cut < 0:
        raise TensorFormatError(f"{path}: missing data sentinel")
    header_lines = blob[:cut].decode("ascii", errors="replace").splitlines()
    payload = blob[cut + len(sentinel):]

    fields: dict[str, str] = {}
    if not header_lines or header_lines[0] != TENSOR_MAGIC:
        raise TensorFormatError(f"{path}: not an irsloc tensor file")
    for line in header_lines[1:]:
        key, _, rest = line.partition(" ")
        fields[key] = rest
    for required in ("name", "dims", "dtype"):
        if required not in fields:
            raise TensorFormatError(f"{path}: header missing '{required}'")
    if fields["dtype"] != "complex64 little-endian":
        raise TensorFormatError(f"{path}: unsupported dtype {fields['dtype']!r}")

    dims: list[tuple[str, int]] = []
    for token in fields["dims"].split():
        dim_name, _, size = token.partition("=")
        if not size.isdigit():
            raise TensorFormatError(f"{path}: bad dims token {token!r}")
        dims.append((dim_name, int(size)))
    shape = tuple(s for _, s in dims)
    expected = int(np.prod(shape, dtype=np.int64)) * _TENSOR_DTYPE.itemsize
    if len(payload) != expected:
        raise TensorFormatError(
            f"{path}: dims {fields['dims']!r} require {expected} payload bytes, "
            f"found {len(payload)}"
        )
    array = np.frombuffer(payload, dtype=_TENSOR_DTYPE).reshape(shape)
    return TensorFile(name=fields["name"], dims=tuple(dims), array=array)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_estimates_csv(
    path: str | Path, rows: Iterable[tuple[int, TargetEstimate]]
) -> None:
    _write_rows(path, ESTIMATE_COLUMNS, (
        (
            trial, e.cluster, e.field, math.degrees(e.theta), e.d,
            e.pos[0], e.pos[1], e.residual, e.converged, e.n_iters,
        )
        for trial, e in rows
    ))


def write_truth_csv(
    path: str | Path,
    rows: Iterable[tuple[int, TruthRecord]],
    irs_pos: tuple[float, float],
) -> None:
    _write_rows(path, TRUTH_COLUMNS, (
        (
            trial, t.cluster, t.field, t.pos[0], t.pos[1],
            math.dist(t.pos, irs_pos), math.degrees(aoa_from_irs(irs_pos, t.pos)),
        )
        for trial, t in rows
    ))


def _report_cells(report: MetricsReport) -> tuple:
    return (
        report.num_trials,
        report.near_targets, report.far_targets,
        report.near_estimates, report.far_estimates,
        report.near_missed, report.far_missed,
        report.near_false, report.far_false,
        report.p_md_near, report.p_md_far, report.p_fa_near, report.p_fa_far,
    )


def write_metrics_csv(
    path: str | Path, reports: Sequence[tuple[str, MetricsReport]]
) -> None:
    _write_rows(path, METRICS_COLUMNS, (
        (method, *_report_cells(report)) for method, report in reports
    ))


def format_sweep_value(value) -> str:
    """Scalar values verbatim; tuple values joined with '/' (e.g. '2/6')."""
    if isinstance(value, tuple):
        return "/".join(_cell(v) for v in value)
    return _cell(value)


def write_sweep_csv(path: str | Path, axis_label: str, points: Sequence[SweepPoint]) -> None:
    def rows():
        for pt in points:
            reports = [("music", pt.outcome.report)]
            if pt.outcome.baseline_report is not None:
                reports.append(("somp", pt.outcome.baseline_report))
            for method, report in reports:
                yield (
                    axis_label, format_sweep_value(pt.value), method,
                    report.p_md_near, report.p_md_far,
                    report.p_fa_near, report.p_fa_far,
                    report.near_targets, report.far_targets,
                    report.near_estimates, report.far_estimates,
                    report.near_missed, report.far_missed,
                    report.near_false, report.far_false,
                    pt.outcome.seconds,
                )

    _write_rows(path, SWEEP_COLUMNS, rows())


def write_events_csv(
    path: str | Path, rows: Iterable[tuple[int, str, EventCounts]]
) -> None:
    _write_rows(path, EVENT_COLUMNS, (
        (
            trial, method,
            ev.near_targets, ev.far_targets, ev.near_estimates, ev.far_estimates,
            ev.near_missed, ev.far_missed, ev.near_false, ev.far_false,
        )
        for trial, method, ev in rows
    ))


def write_spectra_csvs(out_dir: str | Path, spectra: Sequence[ClusterSpectra]) -> list[Path]:
    """Per-cluster spectrum files; near files carry masked cells only."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    for sp in spectra:
        near_path = out_dir / f"spectrum_near_cluster{sp.cluster:03d}.csv"
        ii, jj = np.nonzero(sp.grid.near_mask)
        _write_rows(near_path, NEAR_SPECTRUM_COLUMNS, (
            (float(sp.grid.near_d[i]), float(sp.grid.near_theta[j]), float(sp.near_values[i, j]))
            for i, j in zip(ii.tolist(), jj.tolist())
        ))
        written.append(near_path)

        far_path = out_dir / f"spectrum_far_cluster{sp.cluster:03d}.csv"
        _write_rows(far_path, FAR_SPECTRUM_COLUMNS, (
            (float(th), float(v)) for th, v in zip(sp.grid.far_theta, sp.far_values)
        ))
        written.append(far_path)
    return written


def write_grid_sizes_csv(path: str | Path, spectra: Sequence[ClusterSpectra]) -> None:
    """Full vs window-restricted lattice sizes per cluster (reduction bars)."""
    _write_rows(path, GRID_COLUMNS, (
        (
            sp.cluster, sp.grid.window[0], sp.grid.window[1],
            sp.grid.near_d.size * sp.grid.near_theta.size, sp.grid.near_count,
            sp.grid.near_theta.size, sp.grid.far_theta.size,
        )
        for sp in spectra
    ))


def read_csv_dicts(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------

def write_manifest(path: str | Path, config: dict, version: str) -> None:
    payload = {
        "artifact_version": version,
        "seed": config.get("harness", {}).get("seed"),
        "config": config,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
