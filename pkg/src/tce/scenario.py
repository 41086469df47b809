"""Synthetic crowd traces: random-waypoint movement over weighted attractor
regions, plus tiered constant traffic rates.

Waypoints are drawn by attractor weight (with an optional uniform background
share over the precinct); legs that cross between the precinct and an outside
region are routed through the midpoint of the shared boundary, so every
sampled position stays within the precinct or a declared outside region.
Generation is single-threaded per scenario so a seed fixes the whole trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Rect, TimeGrid, TraceSet, Venue

_PRECINCT = -1  # region id of the precinct in routing


@dataclass(frozen=True)
class Attractor:
    """A rectangle users head for, drawn with probability ~ weight."""

    region: Rect
    weight: float
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weight", float(self.weight))
        if not (np.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"attractor weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class MobilityParams:
    speed_min: float
    speed_max: float
    attractors: tuple[Attractor, ...]
    pause_instants: int = 0
    background_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "speed_min", float(self.speed_min))
        object.__setattr__(self, "speed_max", float(self.speed_max))
        object.__setattr__(self, "attractors", tuple(self.attractors))
        object.__setattr__(self, "pause_instants", int(self.pause_instants))
        object.__setattr__(self, "background_weight", float(self.background_weight))
        if not 0 <= self.speed_min <= self.speed_max:
            raise ValueError(
                f"need 0 <= speed_min <= speed_max, got {self.speed_min}/{self.speed_max}"
            )
        if self.pause_instants < 0:
            raise ValueError("pause_instants must be >= 0")
        if self.background_weight < 0:
            raise ValueError("background_weight must be >= 0")


@dataclass(frozen=True)
class TrafficTiers:
    """Population fractions and their constant mean rates (Mbit/s)."""

    tiers: tuple[tuple[float, float], ...]

    def __post_init__(self):
        tiers = tuple((float(f), float(r)) for f, r in self.tiers)
        object.__setattr__(self, "tiers", tiers)
        if not tiers:
            raise ValueError("at least one traffic tier is required")
        for frac, rate in tiers:
            if not 0 < frac <= 1:
                raise ValueError(f"tier fraction must lie in (0, 1], got {frac}")
            if rate < 0:
                raise ValueError(f"tier rate must be >= 0, got {rate}")
        total = sum(f for f, _ in tiers)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"tier fractions must sum to 1, got {total}")


def apportion(user_count: int, fractions) -> np.ndarray:
    """Largest-remainder tier sizes: floor quotas, then +1 by descending
    fractional remainder (ties to the lower tier index)."""
    fractions = np.asarray(fractions, np.float64)
    exact = user_count * fractions
    base = np.floor(exact).astype(np.int64)
    remainder = user_count - int(base.sum())
    order = np.argsort(-(exact - base), kind="stable")
    base[order[:remainder]] += 1
    return base


def assign_tiers(user_count: int, tiers: TrafficTiers, rng: np.random.Generator) -> np.ndarray:
    """Per-user mean rates: tier sizes by largest remainder, membership by a
    seeded shuffle."""
    sizes = apportion(user_count, [f for f, _ in tiers.tiers])
    perm = rng.permutation(user_count)
    rates = np.empty(user_count, np.float64)
    start = 0
    for size, (_, rate) in zip(sizes, tiers.tiers):
        rates[perm[start : start + size]] = rate
        start += size
    return rates


def _region_of(p: np.ndarray, venue: Venue) -> int:
    if venue.precinct.contains(p):
        return _PRECINCT
    for i, region in enumerate(venue.outside_regions):
        if region.contains(p):
            return i
    raise RuntimeError(f"position {p} is not inside the venue")


def _gate(venue: Venue, region_index: int) -> np.ndarray:
    """Midpoint of the boundary shared by the precinct and an outside region."""
    region = venue.outside_regions[region_index]
    lo = np.maximum(venue.precinct_min, region.lo)
    hi = np.minimum(venue.precinct_max, region.hi)
    if np.any(lo > hi):
        raise ValueError(
            f"outside region {region_index} does not touch the precinct; "
            "cannot route movement through it"
        )
    return (lo + hi) / 2.0


def _route(pos: np.ndarray, target: np.ndarray, src: int, dst: int, venue: Venue):
    """Leg sequence (point, clip rect) from pos to target staying in the venue."""
    precinct = venue.precinct
    if src == dst:
        rect = precinct if dst == _PRECINCT else venue.outside_regions[dst]
        return [(target, rect)]
    legs = []
    if src != _PRECINCT:
        legs.append((_gate(venue, src), venue.outside_regions[src]))
    if dst != _PRECINCT:
        legs.append((_gate(venue, dst), precinct))
        legs.append((target, venue.outside_regions[dst]))
    else:
        legs.append((target, precinct))
    return legs


class _WaypointDraw:
    """Weighted choice of attractor rectangles plus a uniform background share."""

    def __init__(self, venue: Venue, mobility: MobilityParams):
        self.venue = venue
        self.rects = [a.region for a in mobility.attractors]
        weights = [a.weight for a in mobility.attractors]
        if mobility.background_weight > 0:
            self.rects.append(venue.precinct)
            weights.append(mobility.background_weight)
        w = np.asarray(weights, np.float64)
        self.probs = w / w.sum()
        # destinations must be reachable: outside rects route through a gate
        for rect in self.rects:
            mid = rect.center
            idx = _region_of(mid, venue)
            if idx != _PRECINCT:
                _gate(venue, idx)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        rect = self.rects[rng.choice(len(self.rects), p=self.probs)]
        return rng.uniform(rect.lo, rect.hi)


def _validate_attractors(venue: Venue, mobility: MobilityParams) -> None:
    precinct = venue.precinct
    for a in mobility.attractors:
        if precinct.contains(a.region.lo) and precinct.contains(a.region.hi):
            continue
        hosted = any(
            r.contains(a.region.lo) and r.contains(a.region.hi) for r in venue.outside_regions
        )
        if not hosted:
            raise ValueError(
                f"attractor {a.label or a.region} must lie within the precinct "
                "or within one declared outside region"
            )


def generate_scenario(
    venue: Venue,
    grid: TimeGrid,
    user_count: int,
    mobility: MobilityParams,
    traffic: TrafficTiers,
    seed: int,
) -> TraceSet:
    """Simulate ``user_count`` users over the time grid.

    Identical parameters and seed give a bit-identical TraceSet. Per-instant
    displacement never exceeds speed_max * step_seconds / index_scale in index
    units; leftover movement budget at a waypoint is dropped (the user dwells
    there until the next instant).
    """
    if user_count < 1:
        raise ValueError(f"user_count must be >= 1, got {user_count}")
    if not mobility.attractors:
        raise ValueError("at least one attractor is required")
    _validate_attractors(venue, mobility)
    draw = _WaypointDraw(venue, mobility)
    rng = np.random.default_rng(seed)

    rates = assign_tiers(user_count, traffic, rng)
    step_budget = grid.step_seconds / venue.index_scale  # index units per (m/s)
    positions = np.empty((user_count, grid.instant_count, 2), np.float64)

    for u in range(user_count):
        pos = draw.draw(rng)
        positions[u, 0] = pos
        legs: list = []
        speed = 0.0
        pause_left = 0
        for t in range(1, grid.instant_count):
            if pause_left > 0:
                pause_left -= 1
            else:
                if not legs:
                    target = draw.draw(rng)
                    legs = _route(pos, target, _region_of(pos, venue), _region_of(target, venue), venue)
                    speed = rng.uniform(mobility.speed_min, mobility.speed_max)
                budget = speed * step_budget
                while budget > 0 and legs:
                    point, rect = legs[0]
                    seg = point - pos
                    dist = float(np.hypot(seg[0], seg[1]))
                    if dist <= budget:
                        pos = point
                        budget -= dist
                        legs.pop(0)
                        if not legs:  # waypoint reached: dwell out the instant
                            pause_left = mobility.pause_instants
                            budget = 0.0
                    else:
                        pos = np.clip(pos + seg * (budget / dist), rect.lo, rect.hi)
                        budget = 0.0
            positions[u, t] = pos
    return TraceSet(positions, rates)
