"""Monte Carlo two-point surveys and coverage studies.

The simulated universe is the set of vehicles arriving upstream during the
upstream window; each gets an i.i.d. journey time and a zone label, and the
Zone 2 vehicles form the re-identified dataset.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .bootstrap import BootstrapSpec, bootstrap_ci
from .data import Dataset
from .distributions import Exponential, UniformArrival, Weibull
from .errors import NumericalError
from .estimation import fit_mle
from .geometry import SurveyWindows, Zone, classify_many
from .model import JourneyModel

log = logging.getLogger(__name__)


@dataclass
class SimConfig:
    windows: SurveyWindows
    journey: object  # Exponential | Weibull, the true journey-time law
    arrival: object = None  # defaults to uniform over the upstream window
    population: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.population < 0:
            raise ValueError("population must be >= 0")
        if self.arrival is None:
            self.arrival = UniformArrival(self.windows.xs, self.windows.xe)


@dataclass
class SimulatedSurvey:
    x: np.ndarray
    t: np.ndarray
    zone: np.ndarray
    survivors: Dataset
    survivor_fraction: float

    @property
    def population(self) -> int:
        return int(self.x.size)

    def zone_counts(self) -> Dict[int, int]:
        return {int(z): int(np.sum(self.zone == z)) for z in Zone}


def simulate_survey(c: SimConfig, rng: Optional[np.random.Generator] = None) -> SimulatedSurvey:
    """Draw arrivals then journey times (in that order) for ``c.population`` vehicles.

    Journey draws are shifted by the free-flow time when it is positive.
    """
    rng = np.random.default_rng(c.seed) if rng is None else rng
    N = c.population
    x = c.arrival.sample(rng, N)
    t = c.journey.sample(rng, N)
    if c.windows.t_ff > 0:
        t = t + c.windows.t_ff
    zone = classify_many(c.windows, x, t)
    obs = zone == Zone.ZONE2
    survivors = Dataset(x[obs], t[obs], c.windows)
    frac = survivors.n / N if N else math.nan
    return SimulatedSurvey(x, t, zone, survivors, frac)


def study_case(case: int, population: int = 20000, seed: int = 0, max_journey: float = 6.0) -> SimConfig:
    """Monte Carlo study cases: upstream 6-9 AM, downstream 7-10 AM, uniform arrivals.

    Case 1 has Exponential journey times with mean 2 h; case 2 has Weibull(shape 0.75, scale 2).
    """
    windows = SurveyWindows(6.0, 9.0, 7.0, 10.0, 0.0, max_journey)
    if case == 1:
        journey = Exponential.from_mean(2.0)
    elif case == 2:
        journey = Weibull(0.75, 2.0)
    else:
        raise ValueError(f"no study case {case}")
    return SimConfig(windows, journey, None, population, seed)


@dataclass
class CoverageResult:
    coverage: float
    target: str
    truth: float
    method: str
    alpha: float
    replications: int
    failures: int
    records: List[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "target": self.target,
            "truth": self.truth,
            "method": self.method,
            "alpha": self.alpha,
            "replications": self.replications,
            "failures": self.failures,
            "records": self.records,
        }


def coverage_study(c: SimConfig, family: str, replications: int = 200, alpha: float = 0.05,
                   target: str = "mean", method: str = "fisher",
                   bootstrap_resamples: int = 200) -> CoverageResult:
    """Repeat simulate -> fit -> interval and report how often the interval covers the truth.

    ``target`` is ``"mean"`` or a parameter name of ``family``; parameter targets
    need the simulated journey law to belong to ``family``. Replication ``r``
    simulates from the ``r``-th child of ``SeedSequence(c.seed)``.
    """
    if replications < 50:
        raise ValueError("coverage studies need at least 50 replications")
    model = JourneyModel(family, c.arrival, c.windows)
    if target == "mean":
        truth = c.journey.mean()
    else:
        if c.journey.family != family:
            raise ValueError(f"true journey law is {c.journey.family}; cannot score parameter {target!r}")
        truth = float(getattr(c.journey, target))
    if method not in ("fisher", "bootstrap"):
        raise ValueError(f"unknown interval method {method!r}")

    records = []
    failures = 0
    for r, seq in enumerate(np.random.SeedSequence(c.seed).spawn(replications)):
        survey = simulate_survey(c, np.random.default_rng(seq))
        try:
            fit = fit_mle(survey.survivors, model, alpha=alpha)
            if not fit.converged:
                raise NumericalError(fit.message or "fit did not converge")
            if method == "fisher":
                ci = fit.ci_fisher.get(target)
            else:
                spec = BootstrapSpec(resamples=bootstrap_resamples, alpha=alpha, master_seed=r)
                ci = bootstrap_ci(survey.survivors, model, spec, baseline=fit).intervals.get(target)
            if ci is None:
                raise NumericalError(f"no {method} interval for {target!r}")
        except (NumericalError, ValueError) as exc:
            log.info("replication %d failed: %s", r, exc)
            failures += 1
            records.append({"replication": r, "failed": True, "error": str(exc)})
            continue
        estimate = fit.mean_journey_time if target == "mean" else fit.params()[target]
        lo, hi = ci
        records.append({
            "replication": r, "failed": False, "n": survey.survivors.n,
            "estimate": estimate, "lower": lo, "upper": hi, "covered": bool(lo <= truth <= hi),
        })
    done = [rec for rec in records if not rec["failed"]]
    cov = sum(rec["covered"] for rec in done) / len(done) if done else math.nan
    return CoverageResult(cov, target, truth, method, alpha, replications, failures, records)
