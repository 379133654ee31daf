"""Monte Carlo coverage of Fisher or bootstrap intervals for the study cases.

    python scripts/coverage.py --case 1 -R 200
    python scripts/coverage.py --case 2 --family weibull --target shape
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

from twopoint.simulation import coverage_study, study_case


@dataclass
class CoverageConfig:
    case: int = 1
    family: str = "exp"
    target: str = "mean"
    method: str = "fisher"
    replications: int = 200
    alpha: float = 0.05
    population: int = 20000
    seed: int = 2024
    resamples: int = 200


def run(cfg: CoverageConfig) -> dict:
    sim = study_case(cfg.case, population=cfg.population, seed=cfg.seed)
    res = coverage_study(sim, cfg.family, replications=cfg.replications, alpha=cfg.alpha, target=cfg.target,
                         method=cfg.method, bootstrap_resamples=cfg.resamples)
    summary = {k: v for k, v in res.as_dict().items() if k != "records"}
    summary["config"] = asdict(cfg)
    return summary


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--case", type=int, choices=[1, 2], default=1)
    p.add_argument("--family", choices=["exp", "weibull"], default="exp")
    p.add_argument("--target", default="mean")
    p.add_argument("--method", choices=["fisher", "bootstrap"], default="fisher")
    p.add_argument("-R", "--replications", type=int, default=200)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--population", type=int, default=20000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--resamples", type=int, default=200)
    a = p.parse_args(argv)
    cfg = CoverageConfig(a.case, a.family, a.target, a.method, a.replications, a.alpha, a.population, a.seed,
                         a.resamples)
    print(json.dumps(run(cfg), indent=2))


if __name__ == "__main__":
    main()
