"""Per-zone time series of user counts and summed traffic.

Real and predicted series live side by side; the predicted table is expected
to carry true labels before the first predicted instant, so both series
conserve totals at every instant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TraceSet, _frozen


@dataclass(frozen=True)
class ZoneSeries:
    """(zones x instants) matrices: user counts and traffic, real and predicted."""

    users_real: np.ndarray
    users_pred: np.ndarray
    traffic_real: np.ndarray
    traffic_pred: np.ndarray

    def __post_init__(self):
        for name in ("users_real", "users_pred", "traffic_real", "traffic_pred"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name))))

    @property
    def zone_count(self) -> int:
        return self.users_real.shape[0]

    @property
    def instant_count(self) -> int:
        return self.users_real.shape[1]


def _tally(labels: np.ndarray, weights: np.ndarray | None, zone_count: int, instants: int):
    t_idx = np.broadcast_to(np.arange(instants), labels.shape).ravel()
    flat = labels.ravel() * instants + t_idx
    if weights is None:
        out = np.bincount(flat, minlength=zone_count * instants)
    else:
        out = np.bincount(flat, weights=np.repeat(weights, instants), minlength=zone_count * instants)
    return out.reshape(zone_count, instants)


def aggregate(traces: TraceSet, labels_real, labels_pred, zone_count: int) -> ZoneSeries:
    """Count users and sum their mean traffic per (zone, instant).

    ``traffic[z, t]`` adds up the constant mean rate of every user whose label
    at t is z; predicted aggregates use the predicted labels.
    """
    labels_real = np.asarray(labels_real, dtype=np.int64)
    labels_pred = np.asarray(labels_pred, dtype=np.int64)
    shape = (traces.user_count, traces.instant_count)
    for name, table in (("labels_real", labels_real), ("labels_pred", labels_pred)):
        if table.shape != shape:
            raise ValueError(f"{name} must have shape {shape}, got {table.shape}")
        if table.min() < 0 or table.max() >= zone_count:
            raise ValueError(f"{name} contains zone ids outside [0, {zone_count})")
    instants = traces.instant_count
    users_real = _tally(labels_real, None, zone_count, instants).astype(np.int64)
    users_pred = _tally(labels_pred, None, zone_count, instants).astype(np.int64)
    traffic_real = _tally(labels_real, traces.mean_traffic, zone_count, instants)
    traffic_pred = _tally(labels_pred, traces.mean_traffic, zone_count, instants)
    return ZoneSeries(users_real, users_pred, traffic_real, traffic_pred)
