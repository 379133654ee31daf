"""Goodness of fit and replicated datasets for fitted truncated models."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .data import Dataset
from .errors import RunawayRejectionError
from .estimation import FitResult, fit_mle
from .geometry import Zone, classify_many
from .model import JourneyModel, marginal_journey_cdf, normalization

KS_CRITICAL = {0.05: 1.358, 0.01: 1.628}
MIN_ACCEPTANCE = 1e-4
RUNAWAY_PROPOSALS = 100_000


def ks_critical(alpha: float) -> float:
    """Asymptotic Kolmogorov critical constant ``c(alpha)``; reject when ``sqrt(n) D > c``."""
    for a, c in KS_CRITICAL.items():
        if abs(alpha - a) < 1e-12:
            return c
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def kolmogorov_sf(x: float, terms: int = 20) -> float:
    """``P(K > x)`` for the Kolmogorov distribution, by its alternating series."""
    if x <= 0.2:
        # series has not converged here; the true value exceeds 1 - 1e-9
        return 1.0
    s = sum((-1) ** (j - 1) * math.exp(-2.0 * j * j * x * x) for j in range(1, terms + 1))
    return min(1.0, max(0.0, 2.0 * s))


@dataclass
class KsReport:
    statistic: float
    n: int
    alpha: float
    critical_value: float  # on the D scale, c(alpha) / sqrt(n)
    p_value: float
    reject: bool

    def as_dict(self) -> dict:
        return {
            "D_n": self.statistic,
            "n": self.n,
            "alpha": self.alpha,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
        }


def ks_statistic(cdf_values) -> float:
    """``sup |F_n - F|`` given the model CDF evaluated at each observation (any order)."""
    n = len(cdf_values)
    F = np.sort(np.asarray(cdf_values, dtype=float))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_test(d: Dataset, f: FitResult, alpha: float = 0.05) -> KsReport:
    """One-sample K-S test of observed journey times against the fitted truncated marginal."""
    if d.n == 0:
        raise ValueError("K-S test needs at least one record")
    t = np.sort(d.t)
    F = marginal_journey_cdf(f.model, f.theta, t, norm=f.survivor_fraction)
    D = ks_statistic(F)
    c = ks_critical(alpha)
    crit = c / math.sqrt(d.n)
    return KsReport(D, d.n, alpha, crit, kolmogorov_sf(math.sqrt(d.n) * D), D > crit)


@dataclass
class Replicate:
    dataset: Dataset
    proposals: int
    acceptance_rate: float


def sample_truncated(m: JourneyModel, theta, n: int, rng: np.random.Generator,
                     expected_rate: Optional[float] = None) -> Replicate:
    """Draw ``n`` records from the truncated model by rejection.

    Proposals pair an arrival draw with a journey draw; the pair is kept when it
    lands in Zone 2. ``proposals`` counts draws up to the ``n``-th acceptance, so
    ``n / proposals`` is an unbiased-in-the-limit estimate of ``C(theta)``.
    """
    dist = m.journey(theta)
    if n == 0:
        return Replicate(Dataset.empty(m.windows), 0, math.nan)
    rate = expected_rate if expected_rate is not None else normalization(m, theta).value
    xs: List[np.ndarray] = []
    ts: List[np.ndarray] = []
    got = 0
    proposals = 0
    while got < n:
        batch = int(min(5_000_000, max(4096, math.ceil(1.1 * (n - got) / max(rate, MIN_ACCEPTANCE)))))
        x = m.arrival.sample(rng, batch)
        t = dist.sample(rng, batch)
        keep = np.flatnonzero(classify_many(m.windows, x, t) == Zone.ZONE2)
        need = n - got
        if keep.size >= need:
            keep = keep[:need]
            proposals += int(keep[-1]) + 1
        else:
            proposals += batch
        xs.append(x[keep])
        ts.append(t[keep])
        got += keep.size
        if got < n and proposals >= RUNAWAY_PROPOSALS and got / proposals < MIN_ACCEPTANCE:
            raise RunawayRejectionError(f"acceptance rate {got / proposals:.2e} after {proposals} proposals")
    data = Dataset(np.concatenate(xs), np.concatenate(ts), m.windows)
    return Replicate(data, proposals, n / proposals)


def replicate_dataset(f: FitResult, n: int, seed) -> Replicate:
    """A synthetic dataset of ``n`` re-identified vehicles from the fitted model."""
    rng = np.random.default_rng(seed)
    return sample_truncated(f.model, f.theta, n, rng, expected_rate=f.survivor_fraction)


@dataclass
class SelfTestResult:
    rejection_rate: float
    reports: List[KsReport]
    refit: bool


def ks_self_test(f: FitResult, n: int, reps: int = 200, alpha: float = 0.05, seed=0,
                 refit: bool = False) -> SelfTestResult:
    """Parametric self-test: K-S on datasets drawn from the fitted model itself.

    With ``refit=False`` each replicate is tested against ``f`` (a fully
    specified null, nominal size ``alpha``). With ``refit=True`` each replicate is
    refit first, which makes the test conservative.
    """
    seqs = np.random.SeedSequence(seed).spawn(reps)
    reports = []
    for s in seqs:
        rep = replicate_dataset(f, n, s)
        target = fit_mle(rep.dataset, f.model, init=f.theta, inference=False) if refit else f
        reports.append(ks_test(rep.dataset, target, alpha))
    rate = sum(r.reject for r in reports) / reps
    return SelfTestResult(rate, reports, refit)
