"""Truncated joint density of (arrival time, journey time) over the observable zone.

With independent arrival density ``h`` and journey density ``g``, a re-identified
vehicle has density ``h(x) g(t) / C`` on Zone 2, where

    C(theta) = integral over x of h(x) * [G(b_u(x)) - G(b_l(x))]

is the probability that a vehicle from the arrival process is observable. ``C``
is also the expected survivor fraction.

The arrival density is taken as given (for the empirical variant, the observed
upstream arrival rate). That is only unbiased if a fixed share of upstream
vehicles continues to the downstream station; no correction is attempted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from . import geometry as geo
from .distributions import UniformArrival, journey_family
from .errors import DegenerateZoneError
from .geometry import SurveyWindows, Zone
from .quadrature import QuadResult, simpson, simpson_rows

DEGENERATE_MASS = 1e-300
MODEL_NAMES = ("exp-uniform", "exp-empirical", "weibull-uniform", "weibull-empirical")


@dataclass(frozen=True, eq=False)
class JourneyModel:
    family: str  # "exp" | "weibull"
    arrival: object  # UniformArrival | EmpiricalArrival
    windows: SurveyWindows

    def __post_init__(self):
        journey_family(self.family)
        w = self.windows
        tol = 1e-9 * max(1.0, abs(w.xs), abs(w.xe))
        if abs(self.arrival.start - w.xs) > tol or abs(self.arrival.end - w.xe) > tol:
            raise ValueError(
                f"arrival support [{self.arrival.start}, {self.arrival.end}] must equal the upstream window [{w.xs}, {w.xe}]"
            )

    @property
    def dist_class(self):
        return journey_family(self.family)

    @property
    def n_params(self) -> int:
        return len(self.dist_class.param_names)

    @property
    def name(self) -> str:
        return f"{self.family}-{self.arrival.kind}"

    def journey(self, theta):
        return self.dist_class.from_params(theta)


def uniform_model(family: str, windows: SurveyWindows) -> JourneyModel:
    return JourneyModel(family, UniformArrival(windows.xs, windows.xe), windows)


def _interval_mass(dist, lo, hi):
    """``G(hi) - G(lo)`` clipped at zero, using survival functions in the upper tail."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    upper_tail = dist.cdf(lo) > 0.5
    with np.errstate(invalid="ignore"):
        m = np.where(upper_tail, dist.sf(lo) - dist.sf(hi), dist.cdf(hi) - dist.cdf(lo))
    return np.where(hi > lo, np.maximum(m, 0.0), 0.0)


def x_breaks(m: JourneyModel, lo: float, hi: float, extra=()) -> list:
    """Breakpoints on [lo, hi]: window-induced kinks, arrival knots and ``extra``."""
    w = m.windows
    cand = [w.ys - w.t_ff, w.ye - w.t_max, w.ys - w.t_max, w.ye - w.t_ff, w.ys, w.ye]
    cand.extend(extra)
    cand.extend(np.asarray(m.arrival.knots).tolist())
    return [lo, hi] + [c for c in cand if lo < c < hi]


def graded_points(m: JourneyModel) -> list:
    # with zero free-flow time the journey CDF is evaluated near t = 0 at x = y_s and x = y_e,
    # where a Weibull CDF behaves like t**shape
    w = m.windows
    return [w.ys, w.ye] if w.t_ff == 0.0 else []


def integrate_x(m: JourneyModel, f, lo=None, hi=None, extra=(), **kw) -> QuadResult:
    if lo is None or hi is None:
        lo0, hi0 = m.windows.observable_x_range
        lo = lo0 if lo is None else lo
        hi = hi0 if hi is None else hi
    if not hi > lo:
        return QuadResult(np.asarray(0.0), 0, 0, np.asarray(0.0), True)
    return simpson(f, x_breaks(m, lo, hi, extra), graded_points(m), **kw)


@dataclass
class NormalizationResult:
    value: float
    quadrature_panels: int
    est_abs_error: float
    per_piece: int = 0
    converged: bool = True


def normalization(m: JourneyModel, theta, fixed: Optional[int] = None) -> NormalizationResult:
    """Observable probability mass ``C(theta)``."""
    dist = m.journey(theta)
    w = m.windows

    def integrand(x):
        return m.arrival.pdf(x) * _interval_mass(dist, geo.lower_bound(w, x), geo.upper_bound(w, x))

    q = integrate_x(m, integrand, fixed=fixed)
    value = float(q.value)
    if not value >= DEGENERATE_MASS:
        raise DegenerateZoneError(f"observable zone carries no mass (C = {value:g}) at theta = {list(np.ravel(theta))}")
    return NormalizationResult(value, q.panels, float(np.max(q.est_abs_error)), q.per_piece, q.converged)


def log_pdf(m: JourneyModel, theta, x, t, norm: Optional[float] = None):
    """Log density of the truncated model; ``-inf`` outside Zone 2.

    Accepts scalars or arrays for ``x`` and ``t``. ``norm`` lets the caller pass
    a precomputed ``C(theta)``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if norm is None:
        norm = normalization(m, theta).value
    dist = m.journey(theta)
    inside = geo.classify_many(m.windows, x, t) == Zone.ZONE2
    with np.errstate(divide="ignore"):
        val = np.log(m.arrival.pdf(x)) + dist.logpdf(t) - math.log(norm)
    out = np.where(inside, val, -np.inf)
    return float(out) if out.ndim == 0 else out


def journey_support(m: JourneyModel):
    """``(min_x b_l(x), max_x b_u(x))`` over the observable x-range."""
    w = m.windows
    lo, hi = w.observable_x_range
    return float(geo.lower_bound(w, hi)), float(geo.upper_bound(w, lo))


def observable_arrival_mass(m: JourneyModel, t):
    """Arrival mass over upstream times ``x`` for which ``(x, t)`` lies in Zone 2."""
    t = np.asarray(t, dtype=float)
    w = m.windows
    x_lo = np.maximum(w.xs, w.ys - t)
    x_hi = np.minimum(w.xe, w.ye - t)
    ok = (t >= w.t_ff) & (t <= w.t_max) & (x_hi > x_lo)
    return np.where(ok, m.arrival.cdf(x_hi) - m.arrival.cdf(x_lo), 0.0)


def t_breaks(m: JourneyModel) -> np.ndarray:
    """Journey times where the observable arrival mass changes formula."""
    w = m.windows
    t_lo, t_hi = journey_support(m)
    knots = np.asarray(m.arrival.knots, dtype=float)
    cand = np.concatenate([[w.t_ff, w.t_max], w.ys - knots, w.ye - knots])
    return np.unique(np.concatenate([[t_lo, t_hi], cand[(cand > t_lo) & (cand < t_hi)]]))


def marginal_journey_pdf(m: JourneyModel, theta, t, norm: Optional[float] = None):
    """Density of observed journey times, ``g(t) * H(t) / C`` with ``H`` from ``observable_arrival_mass``."""
    t = np.asarray(t, dtype=float)
    if norm is None:
        norm = normalization(m, theta).value
    mass = observable_arrival_mass(m, t)
    with np.errstate(invalid="ignore"):
        return np.where(mass > 0, m.journey(theta).pdf(t) * mass / norm, 0.0)


def _journey_increments(m: JourneyModel, theta, grid):
    """Integrals of ``g * H`` between consecutive points of a sorted grid free of interior kinks."""
    dist = m.journey(theta)
    breaks = np.column_stack([grid[:-1], grid[1:]])
    graded = [0.0] if grid[0] == 0.0 else []

    def integrand(s, rows):
        mass = observable_arrival_mass(m, s)
        with np.errstate(invalid="ignore"):
            return np.where(mass > 0, dist.pdf(s) * mass, 0.0)

    return simpson_rows(integrand, breaks, graded, rtol=1e-12, atol=1e-17)


def normalization_by_journey(m: JourneyModel, theta) -> float:
    """``C(theta)`` with the integration order swapped (journey time outermost).

    Independent of the x-quadrature used by ``normalization``; useful as a cross-check.
    """
    return float(_journey_increments(m, theta, t_breaks(m)).sum())


def marginal_journey_cdf(m: JourneyModel, theta, t, norm: Optional[float] = None):
    """CDF of observed journey times under the truncated model, vectorised over ``t``.

    Equal to ``(1/C) * integral over x of h(x) [G(min(t, b_u(x))) - G(b_l(x))]+``;
    computed as the cumulative integral of ``g * H`` over a grid holding every
    requested ``t`` and every kink of ``H``, so it is nondecreasing by construction.
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if norm is None:
        norm = normalization(m, theta).value
    t_lo, t_hi = journey_support(m)
    inner = ts[(ts > t_lo) & (ts < t_hi)]
    grid = np.union1d(t_breaks(m), inner)
    cum = np.concatenate([[0.0], np.cumsum(_journey_increments(m, theta, grid))])
    F = np.interp(ts, grid, cum) / norm
    F = np.clip(np.where(ts >= t_hi, 1.0, np.where(ts <= t_lo, 0.0, F)), 0.0, 1.0)
    return float(F[0]) if scalar else F


def downstream_arrival_density(m: JourneyModel, theta, y, norm: Optional[float] = None):
    """Density of downstream arrival times ``y = x + t`` among re-identified vehicles.

    For each ``y`` the journey time runs over ``[max(t_ff, y - x_e), min(t_max, y - x_s)]``,
    cut where ``y - t`` crosses an arrival knot; all ``y`` are integrated together.
    """
    scalar = np.ndim(y) == 0
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    w = m.windows
    dist = m.journey(theta)
    if norm is None:
        norm = normalization(m, theta).value
    knots = np.asarray(m.arrival.knots, dtype=float)

    inside = (yv >= w.ys) & (yv <= w.ye)
    lo = np.maximum(w.t_ff, yv - w.xe)
    hi = np.maximum(lo, np.minimum(w.t_max, yv - w.xs))
    lo, hi = np.where(inside, lo, 0.0), np.where(inside, hi, 0.0)
    cuts = np.clip(yv[:, None] - knots[None, :], lo[:, None], hi[:, None])
    breaks = np.sort(np.column_stack([lo, cuts, hi]), axis=1)

    def integrand(t, rows):
        # t stays inside [y - x_e, y - x_s]; clipping only absorbs rounding at the ends
        x = np.clip(yv[rows, None] - t, w.xs, w.xe)
        return m.arrival.pdf(x) * dist.pdf(t)

    graded = [0.0] if w.t_ff == 0.0 else []
    out = simpson_rows(integrand, breaks, graded, rtol=1e-11, atol=1e-14, max_per_piece=4096) / norm
    out = np.where(inside, out, 0.0)
    return float(out[0]) if scalar else out


@dataclass
class ZoneMasses:
    zone1: float
    zone2: float
    zone3: float
    box_mass: float
    n_observed: Optional[int] = None
    population_estimate: Optional[float] = None

    def as_dict(self) -> Dict[str, float]:
        return {
            "zone1": self.zone1,
            "zone2": self.zone2,
            "zone3": self.zone3,
            "box_mass": self.box_mass,
            "n_observed": self.n_observed,
            "population_estimate": self.population_estimate,
        }


def unobserved_mass(m: JourneyModel, theta, n_observed: Optional[int] = None) -> ZoneMasses:
    """Split the interest box (upstream window x [t_ff, t_max]) into Zones 1-3.

    Masses are conditional on the box. With ``n_observed`` the implied number of
    box-resident vehicles ``n_observed / zone2`` is reported too.
    """
    dist = m.journey(theta)
    w = m.windows
    box = m.arrival.total_mass * float(_interval_mass(dist, w.t_ff, w.t_max))
    if not box >= DEGENERATE_MASS:
        raise DegenerateZoneError(f"interest box carries no mass at theta = {list(np.ravel(theta))}")

    def zone1(x):
        return m.arrival.pdf(x) * _interval_mass(dist, w.t_ff, np.minimum(w.t_max, w.ys - x))

    def zone3(x):
        return m.arrival.pdf(x) * _interval_mass(dist, np.maximum(w.t_ff, w.ye - x), w.t_max)

    z1 = float(integrate_x(m, zone1, lo=w.xs, hi=min(w.xe, w.ys - w.t_ff), atol=1e-16).value)
    z3 = float(integrate_x(m, zone3, lo=max(w.xs, w.ye - w.t_max), hi=w.xe, atol=1e-16).value)
    try:
        z2 = normalization(m, theta).value
    except DegenerateZoneError:
        z2 = 0.0
    z1, z2, z3 = z1 / box, z2 / box, z3 / box
    n_hat = None
    if n_observed is not None and z2 > 0:
        n_hat = n_observed / z2
    return ZoneMasses(z1, z2, z3, box, n_observed, n_hat)
