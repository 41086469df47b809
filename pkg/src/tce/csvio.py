"""CSV interchange formats shared by the pipeline stages and the CLI.

All writers emit a header row and sort rows (user_id, then t) so identical
data gives identical bytes. Loaders validate coverage and report the
offending file row in error messages.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import TimeGrid, TraceSet, Venue
from .errors import DataError
from .zoning import Zoning

TRACE_HEADER = ["user_id", "t", "x", "y"]
TRAFFIC_HEADER = ["user_id", "mean_traffic_mbps"]
ZONES_HEADER = ["zone_id", "region", "cx", "cy"]
LABELS_HEADER = ["user_id", "t", "zone_id"]
PREDICTIONS_HEADER = ["user_id", "t", "real_zone", "predicted_zone"]
ZONE_SERIES_HEADER = ["zone_id", "t", "users_real", "users_pred", "traffic_real", "traffic_pred"]
ERRORS_HEADER = ["user_id", "t", "error"]
HISTOGRAM_HEADER = ["run_id", "bin_lo", "bin_hi", "count"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path, header) -> list[tuple[int, list[str]]]:
    """Rows with their 1-based file line numbers, header validated."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip() for c in first] != header:
            raise DataError(f"{path}: expected header {','.join(header)}, got {','.join(first)}")
        return [(i, row) for i, row in enumerate(reader, start=2) if row]


def _parse(path, line, value, kind, what):
    try:
        return kind(value)
    except ValueError:
        raise DataError(f"{path}, row {line}: bad {what} {value!r}") from None


# ---------------------------------------------------------------------------
# traces and traffic


def write_trace(path, traces: TraceSet) -> None:
    rows = []
    for u in range(traces.user_count):
        for t in range(traces.instant_count):
            x, y = traces.positions[u, t]
            rows.append([u, t, _fmt(x), _fmt(y)])
    _write_rows(path, TRACE_HEADER, rows)


def write_traffic(path, traces: TraceSet) -> None:
    rows = [[u, _fmt(traces.mean_traffic[u])] for u in range(traces.user_count)]
    _write_rows(path, TRAFFIC_HEADER, rows)


def load_trace(trace_path, traffic_path, venue: Venue, grid: TimeGrid) -> TraceSet:
    """Load and validate a trace/traffic CSV pair against the time grid.

    Every user must cover every instant exactly once and appear in both
    files; violations name the user, instant, or file row.
    """
    rows = _read_rows(trace_path, TRACE_HEADER)
    entries = {}
    for line, row in rows:
        if len(row) != 4:
            raise DataError(f"{trace_path}, row {line}: expected 4 fields, got {len(row)}")
        u = _parse(trace_path, line, row[0], int, "user_id")
        t = _parse(trace_path, line, row[1], int, "t")
        x = _parse(trace_path, line, row[2], float, "x")
        y = _parse(trace_path, line, row[3], float, "y")
        if not (np.isfinite(x) and np.isfinite(y)):
            raise DataError(f"{trace_path}, row {line}: non-finite position")
        if not 0 <= t < grid.instant_count:
            raise DataError(
                f"{trace_path}, row {line}: instant {t} outside [0, {grid.instant_count})"
            )
        if (u, t) in entries:
            raise DataError(f"{trace_path}, row {line}: duplicate entry for user {u}, instant {t}")
        entries[(u, t)] = (x, y)

    users = sorted({u for u, _ in entries})
    if not users:
        raise DataError(f"{trace_path}: no data rows")
    if users != list(range(len(users))):
        raise DataError(f"{trace_path}: user ids must be contiguous from 0, got {users[:8]}...")
    positions = np.empty((len(users), grid.instant_count, 2), np.float64)
    for u in users:
        for t in range(grid.instant_count):
            if (u, t) not in entries:
                raise DataError(f"{trace_path}: user {u} is missing instant {t}")
            positions[u, t] = entries[(u, t)]

    traffic = load_traffic(traffic_path, len(users))
    return TraceSet(positions, traffic)


def load_traffic(path, user_count: int) -> np.ndarray:
    rows = _read_rows(path, TRAFFIC_HEADER)
    traffic = np.full(user_count, np.nan)
    for line, row in rows:
        if len(row) != 2:
            raise DataError(f"{path}, row {line}: expected 2 fields, got {len(row)}")
        u = _parse(path, line, row[0], int, "user_id")
        rate = _parse(path, line, row[1], float, "mean_traffic_mbps")
        if not 0 <= u < user_count:
            raise DataError(f"{path}, row {line}: unknown user id {u}")
        if not np.isfinite(rate) or rate < 0:
            raise DataError(f"{path}, row {line}: mean_traffic must be >= 0, got {row[1]}")
        if not np.isnan(traffic[u]):
            raise DataError(f"{path}, row {line}: duplicate user id {u}")
        traffic[u] = rate
    missing = np.flatnonzero(np.isnan(traffic))
    if missing.size:
        raise DataError(f"{path}: missing traffic for user {missing[0]}")
    return traffic


def load_waypoint_lines(path, grid: TimeGrid) -> np.ndarray:
    """Waypoint-line import: one user per line, repeating ``t x y`` triples
    with t in seconds, linearly resampled onto the grid instants."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    sample_t = grid.instants_seconds()
    users = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) % 3 != 0:
                raise DataError(
                    f"{path}, line {line_no}: expected t x y triples, got {len(fields)} fields"
                )
            vals = np.array([_parse(path, line_no, f, float, "waypoint value") for f in fields])
            if not np.all(np.isfinite(vals)):
                raise DataError(f"{path}, line {line_no}: non-finite waypoint value")
            triples = vals.reshape(-1, 3)
            if np.any(np.diff(triples[:, 0]) < 0):
                raise DataError(f"{path}, line {line_no}: waypoint times must be non-decreasing")
            x = np.interp(sample_t, triples[:, 0], triples[:, 1])
            y = np.interp(sample_t, triples[:, 0], triples[:, 2])
            users.append(np.column_stack([x, y]))
    if not users:
        raise DataError(f"{path}: no waypoint lines")
    return np.stack(users)


# ---------------------------------------------------------------------------
# zoning


def write_zoning(zones_path, labels_path, zoning: Zoning) -> None:
    rows = []
    for z in range(zoning.inside_count):
        cx, cy = zoning.inside_centroids[z]
        rows.append([z, "inside", _fmt(cx), _fmt(cy)])
    for i in range(zoning.outside_centroids.shape[0]):
        cx, cy = zoning.outside_centroids[i]
        rows.append([zoning.inside_count + i, "outside", _fmt(cx), _fmt(cy)])
    _write_rows(zones_path, ZONES_HEADER, rows)

    label_rows = []
    for u in range(zoning.labels.shape[0]):
        for t in range(zoning.labels.shape[1]):
            label_rows.append([u, t, int(zoning.labels[u, t])])
    _write_rows(labels_path, LABELS_HEADER, label_rows)


def load_zoning(zones_path, labels_path) -> Zoning:
    zone_rows = _read_rows(zones_path, ZONES_HEADER)
    inside, outside = [], []
    for line, row in zone_rows:
        if len(row) != 4:
            raise DataError(f"{zones_path}, row {line}: expected 4 fields")
        zid = _parse(zones_path, line, row[0], int, "zone_id")
        region = row[1].strip()
        cx = _parse(zones_path, line, row[2], float, "cx")
        cy = _parse(zones_path, line, row[3], float, "cy")
        if region == "inside":
            inside.append((zid, cx, cy))
        elif region == "outside":
            outside.append((zid, cx, cy))
        else:
            raise DataError(f"{zones_path}, row {line}: region must be inside or outside")
    ids = [z for z, _, _ in inside] + [z for z, _, _ in outside]
    if sorted(ids) != list(range(len(ids))) or ids != sorted(ids):
        raise DataError(f"{zones_path}: zone ids must be 0..{len(ids) - 1} with inside ids first")

    label_rows = _read_rows(labels_path, LABELS_HEADER)
    entries = {}
    for line, row in label_rows:
        if len(row) != 3:
            raise DataError(f"{labels_path}, row {line}: expected 3 fields")
        u = _parse(labels_path, line, row[0], int, "user_id")
        t = _parse(labels_path, line, row[1], int, "t")
        z = _parse(labels_path, line, row[2], int, "zone_id")
        if not 0 <= z < len(ids):
            raise DataError(f"{labels_path}, row {line}: zone id {z} outside [0, {len(ids)})")
        if (u, t) in entries:
            raise DataError(f"{labels_path}, row {line}: duplicate label for user {u}, instant {t}")
        entries[(u, t)] = z
    users = sorted({u for u, _ in entries})
    instants = sorted({t for _, t in entries})
    if users != list(range(len(users))) or instants != list(range(len(instants))):
        raise DataError(f"{labels_path}: labels must cover users and instants contiguously from 0")
    labels = np.empty((len(users), len(instants)), np.int64)
    for u in users:
        for t in instants:
            if (u, t) not in entries:
                raise DataError(f"{labels_path}: user {u} is missing instant {t}")
            labels[u, t] = entries[(u, t)]
    inside_c = np.array([(cx, cy) for _, cx, cy in inside], np.float64).reshape(-1, 2)
    outside_c = np.array([(cx, cy) for _, cx, cy in outside], np.float64).reshape(-1, 2)
    return Zoning(inside_c, outside_c, labels)


# ---------------------------------------------------------------------------
# matrices, predictions, series, errors


def write_matrix(path, table: np.ndarray) -> None:
    k = table.shape[0]
    rows = []
    for z in range(k):
        vals = [int(v) if np.issubdtype(table.dtype, np.integer) else _fmt(v) for v in table[z]]
        rows.append([z] + vals)
    _write_rows(path, ["zone"] + [str(z) for z in range(k)], rows)


def write_predictions(path, labels_real: np.ndarray, labels_pred: np.ndarray) -> None:
    rows = []
    for u in range(labels_real.shape[0]):
        for t in range(labels_real.shape[1]):
            rows.append([u, t, int(labels_real[u, t]), int(labels_pred[u, t])])
    _write_rows(path, PREDICTIONS_HEADER, rows)


def load_predictions(path) -> tuple[np.ndarray, np.ndarray]:
    rows = _read_rows(path, PREDICTIONS_HEADER)
    entries = {}
    for line, row in rows:
        if len(row) != 4:
            raise DataError(f"{path}, row {line}: expected 4 fields")
        u = _parse(path, line, row[0], int, "user_id")
        t = _parse(path, line, row[1], int, "t")
        real = _parse(path, line, row[2], int, "real_zone")
        pred = _parse(path, line, row[3], int, "predicted_zone")
        entries[(u, t)] = (real, pred)
    users = sorted({u for u, _ in entries})
    instants = sorted({t for _, t in entries})
    real = np.empty((len(users), len(instants)), np.int64)
    pred = np.empty((len(users), len(instants)), np.int64)
    for u in users:
        for t in instants:
            if (u, t) not in entries:
                raise DataError(f"{path}: user {u} is missing instant {t}")
            real[u, t], pred[u, t] = entries[(u, t)]
    return real, pred


def write_zone_series(path, series) -> None:
    rows = []
    for z in range(series.zone_count):
        for t in range(series.instant_count):
            rows.append(
                [
                    z,
                    t,
                    int(series.users_real[z, t]),
                    int(series.users_pred[z, t]),
                    _fmt(series.traffic_real[z, t]),
                    _fmt(series.traffic_pred[z, t]),
                ]
            )
    _write_rows(path, ZONE_SERIES_HEADER, rows)


def write_errors(path, errors) -> None:
    rows = []
    first = errors.first_instant
    for u in range(errors.e.shape[0]):
        for i in range(errors.e.shape[1]):
            rows.append([u, first + i, _fmt(errors.e[u, i])])
    _write_rows(path, ERRORS_HEADER, rows)


def write_histogram(path, per_run_counts, edges) -> None:
    """per_run_counts: list of (run_id, counts) pairs over shared bin edges."""
    rows = []
    for run_id, counts in per_run_counts:
        for b, count in enumerate(counts):
            rows.append([run_id, _fmt(edges[b]), _fmt(edges[b + 1]), int(count)])
    _write_rows(path, HISTOGRAM_HEADER, rows)
