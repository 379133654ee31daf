"""Percentile bootstrap on top of maximum-likelihood refits.

Replicate ``j`` draws its resample from the ``j``-th child of
``SeedSequence(master_seed)``, so the replicate values do not depend on how
many workers run them or in which order they finish.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .data import Dataset
from .errors import BootstrapError, NumericalError
from .estimation import FitResult, fit_mle
from .model import JourneyModel

log = logging.getLogger(__name__)

MAX_FAILURE_SHARE = 0.20


@dataclass
class BootstrapSpec:
    resamples: int = 1000  # 0 disables the bootstrap in run configurations
    alpha: float = 0.05
    statistics: Tuple[str, ...] = ()  # empty: every parameter plus "mean"
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.resamples < 0:
            raise ValueError("resamples must be >= 0")


@dataclass
class BootstrapResult:
    intervals: Dict[str, Tuple[float, float]]
    replicates: Dict[str, np.ndarray]
    refit_failures: int
    resamples: int
    alpha: float
    flags: List[str] = field(default_factory=list)


def _replicate(args):
    d, m, init, seq, names = args
    rng = np.random.default_rng(seq)
    idx = rng.integers(0, d.n, d.n)
    try:
        f = fit_mle(d.take(idx), m, init=init, inference=False)
    except NumericalError:
        return None
    if not f.converged:
        return None
    vals = dict(zip(f.param_names, (float(v) for v in f.theta)))
    vals["mean"] = f.mean_journey_time
    return [vals[s] for s in names]


def bootstrap_ci(d: Dataset, m: JourneyModel, spec: BootstrapSpec = BootstrapSpec(),
                 baseline: Optional[FitResult] = None) -> BootstrapResult:
    """Resample ``n`` records with replacement, refit, and take percentile intervals.

    Each refit starts from the baseline estimate. Refits that fail or do not
    converge are dropped and counted; more than 20% failures is an error.
    Intervals need at least 100 resamples.
    """
    if d.n == 0:
        raise ValueError("cannot bootstrap an empty dataset")
    if spec.resamples < 1:
        raise ValueError("need at least one resample")
    if baseline is None:
        baseline = fit_mle(d, m, alpha=spec.alpha)
    if not baseline.converged:
        raise NumericalError("baseline fit did not converge; bootstrap needs a converged start")
    names = tuple(spec.statistics) or (tuple(baseline.param_names) + ("mean",))

    seqs = np.random.SeedSequence(spec.master_seed).spawn(spec.resamples)
    jobs = [(d, m, baseline.theta, s, names) for s in seqs]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=max(1, len(jobs) // (4 * spec.workers))))
    else:
        results = [_replicate(j) for j in jobs]

    ok = [r for r in results if r is not None]
    failures = len(results) - len(ok)
    if failures > MAX_FAILURE_SHARE * spec.resamples:
        raise BootstrapError(f"{failures} of {spec.resamples} bootstrap refits failed")
    values = np.array(ok, dtype=float).reshape(len(ok), len(names))
    replicates = {s: values[:, i] for i, s in enumerate(names)}

    intervals: Dict[str, Tuple[float, float]] = {}
    flags: List[str] = []
    if spec.resamples >= 100:
        point = baseline.params()
        point["mean"] = baseline.mean_journey_time
        q = [spec.alpha / 2.0, 1.0 - spec.alpha / 2.0]
        for s in names:
            lo, hi = np.quantile(replicates[s], q, method="linear")
            intervals[s] = (float(lo), float(hi))
            if not lo <= point[s] <= hi:
                flags.append(f"point estimate of {s} lies outside its bootstrap interval")
    else:
        log.info("fewer than 100 resamples; intervals not computed")
    for msg in flags:
        log.warning(msg)
    return BootstrapResult(intervals, replicates, failures, spec.resamples, spec.alpha, flags)
