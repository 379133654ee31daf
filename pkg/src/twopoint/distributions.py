"""Untruncated journey-time families and upstream arrival-time densities.

Journey times use the rate parameterisation for the Exponential
(``pdf = rate * exp(-rate * t)``, mean ``1 / rate``) and shape/scale for the
Weibull (mean ``scale * Gamma(1 + 1/shape)``, median ``scale * ln(2)**(1/shape)``).
Both sample by inverse CDF from ``-log1p(-U)`` so that ``Weibull(1, s)`` and
``Exponential(1/s)`` produce the same draws from the same stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

from .errors import DataError


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value}")


@dataclass(frozen=True)
class Exponential:
    rate: float

    family: ClassVar[str] = "exp"
    param_names: ClassVar[tuple] = ("rate",)

    def __post_init__(self):
        _positive("rate", self.rate)

    @classmethod
    def from_params(cls, theta) -> "Exponential":
        return cls(float(theta[0]))

    @classmethod
    def from_mean(cls, mean: float) -> "Exponential":
        _positive("mean", mean)
        return cls(1.0 / mean)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.rate])

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return np.where(t >= 0, self.rate * np.exp(-self.rate * np.maximum(t, 0.0)), 0.0)

    def logpdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, math.log(self.rate) - self.rate * t, -np.inf)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, -np.expm1(-self.rate * np.maximum(t, 0.0)), 0.0)

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, np.exp(-self.rate * np.maximum(t, 0.0)), 1.0)

    def mean(self) -> float:
        return 1.0 / self.rate

    def median(self) -> float:
        return math.log(2.0) / self.rate

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        return -np.log1p(-u) / self.rate


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float

    family: ClassVar[str] = "weibull"
    param_names: ClassVar[tuple] = ("shape", "scale")

    def __post_init__(self):
        _positive("shape", self.shape)
        _positive("scale", self.scale)

    @classmethod
    def from_params(cls, theta) -> "Weibull":
        return cls(float(theta[0]), float(theta[1]))

    @property
    def params(self) -> np.ndarray:
        return np.array([self.shape, self.scale])

    def _z(self, t):
        # (t / scale) ** shape, zero for t <= 0
        return np.power(np.maximum(t, 0.0) / self.scale, self.shape)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = self._z(t)
            dens = (self.shape / self.scale) * np.power(np.maximum(t, 0.0) / self.scale, self.shape - 1.0) * np.exp(-z)
        return np.where(t >= 0, dens, 0.0)

    def logpdf(self, t):
        t = np.asarray(t, dtype=float)
        k, lam = self.shape, self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.log(k / lam) + (k - 1.0) * np.log(np.maximum(t, 0.0) / lam) - self._z(t)
        return np.where(t >= 0, out, -np.inf)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return -np.expm1(-self._z(t))

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-self._z(t))

    def mean(self) -> float:
        return self.scale * math.exp(math.lgamma(1.0 + 1.0 / self.shape))

    def median(self) -> float:
        return self.scale * math.log(2.0) ** (1.0 / self.shape)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        return self.scale * np.power(-np.log1p(-u), 1.0 / self.shape)


JOURNEY_FAMILIES = {"exp": Exponential, "weibull": Weibull}


def journey_family(name: str):
    try:
        return JOURNEY_FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown journey family {name!r}; expected one of {sorted(JOURNEY_FAMILIES)}") from None


# ---------------------------------------------------------------------------
# arrival densities


@dataclass(frozen=True)
class UniformArrival:
    """Constant arrival density on ``[start, end]``.

    ``height`` defaults to ``1 / (end - start)``. Any other positive height is
    accepted; the truncated model divides it back out.
    """

    start: float
    end: float
    height: float = None

    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("uniform arrival needs start < end")
        if self.height is None:
            object.__setattr__(self, "height", 1.0 / (self.end - self.start))
        _positive("height", self.height)

    @property
    def knots(self) -> np.ndarray:
        return np.array([self.start, self.end])

    @property
    def total_mass(self) -> float:
        return self.height * (self.end - self.start)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.start) & (x <= self.end), self.height, 0.0)

    def cdf(self, x):
        """Cumulative mass from ``start`` (un-normalised if ``height`` was overridden)."""
        x = np.clip(np.asarray(x, dtype=float), self.start, self.end)
        return self.height * (x - self.start)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.start, self.end, n)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "start": self.start, "end": self.end, "height": self.height}


@dataclass(frozen=True, eq=False)
class EmpiricalArrival:
    """Piecewise-linear arrival density through ``(times, density)`` knots.

    The first and last knots sit on the window edges, so the trapezoid rule on
    the knots is the exact integral of the density.
    """

    times: np.ndarray
    density: np.ndarray

    kind: ClassVar[str] = "empirical"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if times.ndim != 1 or times.shape != dens.shape or times.size < 2:
            raise ValueError("empirical arrival needs matching 1-D knot arrays of length >= 2")
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        if np.any(dens < 0):
            raise ValueError("arrival density must be nonnegative")
        mass = np.trapezoid(dens, times)
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"arrival density integrates to {mass}, not 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "density", dens)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def knots(self) -> np.ndarray:
        return self.times

    @property
    def total_mass(self) -> float:
        return 1.0

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.start) & (x <= self.end)
        return np.where(inside, np.interp(x, self.times, self.density), 0.0)

    def _cum(self):
        return np.concatenate([[0.0], np.cumsum(0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.times))])

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.start, self.end)
        cum = self._cum()
        i = np.clip(np.searchsorted(self.times, x, side="right") - 1, 0, self.times.size - 2)
        x0 = self.times[i]
        d0 = self.density[i]
        slope = (self.density[i + 1] - d0) / (self.times[i + 1] - x0)
        dx = x - x0
        return cum[i] + d0 * dx + 0.5 * slope * dx * dx

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Exact inverse-CDF draws (a quadratic solve inside the chosen segment)."""
        u = rng.random(n)
        cum = self._cum()
        target = u * cum[-1]
        i = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, self.times.size - 2)
        x0 = self.times[i]
        w = self.times[i + 1] - x0
        d0 = self.density[i]
        d1 = self.density[i + 1]
        slope = (d1 - d0) / w
        r = target - cum[i]
        # solve 0.5*slope*dx^2 + d0*dx - r = 0 with the cancellation-free root
        disc = np.sqrt(np.maximum(d0 * d0 + 2.0 * slope * r, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = np.where(d0 + disc > 0, 2.0 * r / (d0 + disc), 0.0)
        return x0 + np.clip(dx, 0.0, w)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "times": self.times.tolist(), "density": self.density.tolist()}


def build_empirical_arrival(upstream_times: Sequence[float], window, bin_width: float = 0.25) -> EmpiricalArrival:
    """Histogram the upstream arrivals and interpolate linearly between bin centres.

    The window is split into ``ceil(width / bin_width)`` equal bins, so the
    realised bin width can be slightly smaller than requested. The density is
    held flat from each window edge to the nearest bin centre, then the whole
    curve is rescaled to unit mass.
    """
    start, end = float(window[0]), float(window[1])
    if not start < end:
        raise ValueError("arrival window must have start < end")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    times = np.asarray(upstream_times, dtype=float)
    times = times[(times >= start) & (times <= end)]
    if times.size == 0:
        raise DataError(f"no upstream arrivals fall inside [{start}, {end}]")

    nbins = max(1, int(math.ceil((end - start) / bin_width - 1e-9)))
    edges = np.linspace(start, end, nbins + 1)
    counts, _ = np.histogram(times, bins=edges)
    width = edges[1] - edges[0]
    centres = 0.5 * (edges[:-1] + edges[1:])
    dens = counts / (times.size * width)

    knot_t = np.concatenate([[start], centres, [end]])
    knot_d = np.concatenate([[dens[0]], dens, [dens[-1]]])
    knot_d = np.maximum(knot_d, 0.0)
    knot_d = knot_d / np.trapezoid(knot_d, knot_t)
    return EmpiricalArrival(knot_t, knot_d)


def arrival_from_dict(d: dict):
    if d["kind"] == "uniform":
        return UniformArrival(d["start"], d["end"], d.get("height"))
    if d["kind"] == "empirical":
        return EmpiricalArrival(np.array(d["times"]), np.array(d["density"]))
    raise ValueError(f"unknown arrival kind {d['kind']!r}")
