"""Observable-zone geometry on the time-time diagram.

Points are ``(x, t)``: upstream arrival time ``x`` (decimal hours from local
midnight of the survey day) and journey time ``t`` (hours). The downstream
arrival is ``y = x + t``.

Zone boundaries are closed toward Zone 2, so a vehicle reaching the downstream
station exactly at ``y_e`` is observable. Comparisons are made on the journey
time axis (``t`` against ``y_s - x`` and ``y_e - x``) so that ``classify`` and
``bounds_at`` agree bit for bit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


class Zone(enum.IntEnum):
    ZONE1 = 1  # reached downstream before recording started
    ZONE2 = 2  # observable
    ZONE3 = 3  # reached downstream after recording ended
    ZONE4 = 4  # outside the interest box (upstream hours or t > t_max)
    ZONE5 = 5  # faster than free flow; physically impossible


@dataclass(frozen=True)
class TimeTimePoint:
    x: float
    t: float

    @property
    def y(self) -> float:
        return self.x + self.t


@dataclass(frozen=True)
class SurveyWindows:
    upstream_start: float
    upstream_end: float
    downstream_start: float
    downstream_end: float
    free_flow_time: float = 0.0
    max_journey: float = 24.0

    def __post_init__(self):
        xs, xe, ys, ye = self.upstream_start, self.upstream_end, self.downstream_start, self.downstream_end
        tff, tmax = self.free_flow_time, self.max_journey
        if not all(math.isfinite(v) for v in (xs, xe, ys, ye, tff)):
            raise ValueError("window bounds and free-flow time must be finite")
        if not xs < xe:
            raise ValueError(f"upstream window is empty: [{xs}, {xe}]")
        if not ys < ye:
            raise ValueError(f"downstream window is empty: [{ys}, {ye}]")
        if not 0.0 <= tff < tmax:
            raise ValueError(f"need 0 <= free_flow_time < max_journey, got {tff}, {tmax}")
        lo, hi = self.observable_x_range
        if not lo < hi:
            raise ValueError("observable zone is empty for these windows")

    # short aliases used throughout the numerics
    @property
    def xs(self) -> float:
        return self.upstream_start

    @property
    def xe(self) -> float:
        return self.upstream_end

    @property
    def ys(self) -> float:
        return self.downstream_start

    @property
    def ye(self) -> float:
        return self.downstream_end

    @property
    def t_ff(self) -> float:
        return self.free_flow_time

    @property
    def t_max(self) -> float:
        return self.max_journey

    @property
    def observable_x_range(self) -> Tuple[float, float]:
        """Upstream arrival times whose observable journey-time slice is non-empty."""
        lo = max(self.upstream_start, self.downstream_start - self.max_journey)
        hi = min(self.upstream_end, self.downstream_end - self.free_flow_time)
        return lo, hi

    def kinks(self) -> list:
        """Interior points of the observable x-range where b_l or b_u change formula."""
        lo, hi = self.observable_x_range
        pts = {self.ys - self.t_ff, self.ye - self.t_max}
        return sorted(p for p in pts if lo < p < hi)

    def to_dict(self) -> dict:
        return {
            "upstream_start": self.upstream_start,
            "upstream_end": self.upstream_end,
            "downstream_start": self.downstream_start,
            "downstream_end": self.downstream_end,
            "free_flow_time": self.free_flow_time,
            "max_journey": self.max_journey,
        }


def bounds_at(w: SurveyWindows, x: float) -> Optional[Tuple[float, float]]:
    """Observable journey-time interval ``(b_l, b_u)`` for a vehicle arriving upstream at ``x``.

    Returns ``None`` when ``x`` lies outside the upstream window or the slice is empty.
    """
    if not w.xs <= x <= w.xe:
        return None
    b_l = max(w.t_ff, w.ys - x)
    b_u = min(w.t_max, w.ye - x)
    if b_l >= b_u:
        return None
    return b_l, b_u


def lower_bound(w: SurveyWindows, x):
    return np.maximum(w.t_ff, w.ys - np.asarray(x, dtype=float))


def upper_bound(w: SurveyWindows, x):
    return np.minimum(w.t_max, w.ye - np.asarray(x, dtype=float))


def classify(w: SurveyWindows, p: TimeTimePoint) -> Zone:
    return Zone(int(classify_many(w, np.array([p.x]), np.array([p.t]))[0]))


def classify_many(w: SurveyWindows, x, t) -> np.ndarray:
    """Vectorised ``classify``; returns an int array of zone numbers."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    zone = np.full(np.broadcast(x, t).shape, int(Zone.ZONE2), dtype=np.int8)
    zone[t > w.ye - x] = Zone.ZONE3
    zone[t < w.ys - x] = Zone.ZONE1
    zone[(x < w.xs) | (x > w.xe) | (t > w.t_max)] = Zone.ZONE4
    zone[t < w.t_ff] = Zone.ZONE5
    return zone


def to_downstream_view(p: TimeTimePoint) -> TimeTimePoint:
    """Shear ``(x, t) -> (x + t, t)``; the returned point's ``x`` is the downstream arrival."""
    return TimeTimePoint(p.x + p.t, p.t)


def from_downstream_view(p: TimeTimePoint) -> TimeTimePoint:
    return TimeTimePoint(p.x - p.t, p.t)
