"""Show how the naive mean shrinks as the survey windows narrow, and how the fit corrects it.

    python scripts/window_bias.py --widths 1 2 3 4 6
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from typing import List

import numpy as np

from twopoint.distributions import Exponential
from twopoint.errors import NumericalError
from twopoint.estimation import fit_mle
from twopoint.geometry import SurveyWindows
from twopoint.model import normalization, uniform_model
from twopoint.simulation import SimConfig, simulate_survey


@dataclass
class BiasConfig:
    widths: List[float] = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 6.0])
    true_mean: float = 2.0
    offset: float = 1.0  # downstream window starts this many hours after the upstream one
    population: int = 20000
    seeds: int = 20


def run(cfg: BiasConfig) -> None:
    journey = Exponential.from_mean(cfg.true_mean)
    print(f"true mean {cfg.true_mean:.3f} h; averages over {cfg.seeds} surveys")
    print(f"{'width':>6} {'C':>7} {'n':>7} {'naive':>7} {'fitted':>7} {'fit sd':>7}")
    for width in cfg.widths:
        w = SurveyWindows(6.0, 6.0 + width, 6.0 + cfg.offset, 6.0 + cfg.offset + width, 0.0, 24.0)
        C = normalization(uniform_model("exp", w), [1.0 / cfg.true_mean]).value
        naive, fitted, sizes = [], [], []
        for seed in range(cfg.seeds):
            data = simulate_survey(SimConfig(w, journey, population=cfg.population, seed=seed)).survivors
            try:
                fit = fit_mle(data, uniform_model("exp", w), inference=False)
            except NumericalError:
                continue
            naive.append(data.naive_mean())
            fitted.append(fit.mean_journey_time)
            sizes.append(data.n)
        print(f"{width:6.1f} {C:7.4f} {np.mean(sizes):7.0f} {np.mean(naive):7.3f} {np.mean(fitted):7.3f} "
              f"{np.std(fitted, ddof=1):7.3f}")


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--widths", type=float, nargs="+", default=[1.0, 2.0, 3.0, 4.0, 6.0])
    p.add_argument("--true-mean", type=float, default=2.0)
    p.add_argument("--offset", type=float, default=1.0)
    p.add_argument("--population", type=int, default=20000)
    p.add_argument("--seeds", type=int, default=20)
    a = p.parse_args(argv)
    run(BiasConfig(a.widths, a.true_mean, a.offset, a.population, a.seeds))


if __name__ == "__main__":
    main()
