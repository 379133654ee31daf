"""Command-line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical failure (non-convergence, degenerate observable zone).
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .bootstrap import BootstrapSpec, bootstrap_ci
from .errors import DataError, NumericalError
from .estimation import fit_mle
from .evaluation import ks_test, replicate_dataset
from .io import (ConfigError, build_model, fit_to_dict, journey_from_dict, load_config, load_fit,
                 output_dir, parse_records, write_json, write_records, write_table)
from .model import unobserved_mass
from .simulation import SimConfig, coverage_study, simulate_survey
from .tables import downstream_rows, marginal_rows

log = logging.getLogger("twopoint")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _sim_config(cfg) -> SimConfig:
    sim = cfg.simulation
    if not sim or "journey" not in sim:
        raise ConfigError("config needs a 'simulation' section with a 'journey' law")
    return SimConfig(cfg.windows, journey_from_dict(sim["journey"]), None,
                     int(sim.get("population", 20000)), int(sim.get("seed", cfg.seed)))


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    if args.model:
        cfg.model = args.model
    out = output_dir(args.output_dir, cfg)
    parsed = parse_records(args.input, cfg.windows)
    data = parsed.dataset
    if parsed.n_excluded:
        log.warning("%d row(s) outside the observable zone excluded (first lines: %s)", parsed.n_excluded,
                    ", ".join(str(r) for r, _ in parsed.excluded_rows[:10]))
    model = build_model(cfg, data)
    fit = fit_mle(data, model, alpha=cfg.alpha)

    boot = None
    resamples = cfg.bootstrap.resamples if args.resamples is None else args.resamples
    if fit.converged and resamples > 0 and not args.no_bootstrap:
        spec = BootstrapSpec(resamples=resamples, alpha=cfg.alpha, master_seed=cfg.bootstrap.master_seed,
                             workers=args.workers or cfg.bootstrap.workers)
        boot = bootstrap_ci(data, model, spec, baseline=fit)

    write_json(out / "fit.json", fit_to_dict(fit, cfg, data, parsed.n_excluded, boot))
    write_table(out / "marginals.csv",
                ["variable", "value", "fitted_pdf", "fitted_cdf", "empirical_pdf", "empirical_cdf"],
                marginal_rows(fit, data))
    write_table(out / "downstream_rate.csv",
                ["downstream_time", "fitted_density", "fitted_rate", "empirical_density", "empirical_rate"],
                downstream_rows(fit, data))
    write_json(out / "zones.json", unobserved_mass(model, fit.theta, n_observed=data.n).as_dict())
    print(f"{fit.model.name}: n={data.n} mean journey time {fit.mean_journey_time:.4f} h "
          f"(naive {data.naive_mean():.4f} h); wrote {out}")
    if not fit.converged:
        print(f"error: fit did not converge: {fit.message}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sim = _sim_config(cfg)
    if args.population is not None:
        sim.population = args.population
    if args.seed is not None:
        sim.seed = args.seed
    out = output_dir(args.output_dir, cfg)
    survey = simulate_survey(sim)
    write_table(out / "survey.csv", ["upstream_time", "journey_time", "downstream_time", "zone"],
                [(repr(float(x)), repr(float(t)), repr(float(x + t)), int(z))
                 for x, t, z in zip(survey.x, survey.t, survey.zone)])
    s = survey.survivors
    write_records(out / "survivors.csv", s.x, s.x + s.t)
    counts = survey.zone_counts()
    print(f"simulated {survey.population} vehicles, {s.n} re-identified "
          f"(fraction {survey.survivor_fraction:.4f}); zones {counts}; wrote {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    fit, cfg, _ = load_fit(args.fit)
    out = output_dir(args.output_dir, cfg)
    parsed = parse_records(args.input, cfg.windows)
    report = ks_test(parsed.dataset, fit, args.alpha)
    doc = report.as_dict()
    doc["model"] = fit.model.name
    doc["n_excluded"] = parsed.n_excluded
    write_json(out / "ks.json", doc)
    verdict = "reject" if report.reject else "do not reject"
    print(f"K-S D_n={report.statistic:.4f} (critical {report.critical_value:.4f}, p={report.p_value:.3g}): {verdict}")
    return EXIT_OK


def cmd_replicate(args) -> int:
    fit, cfg, _ = load_fit(args.fit)
    if not fit.converged:
        raise NumericalError("cannot replicate from a fit that did not converge")
    out = output_dir(args.output_dir, cfg)
    seed = cfg.seed if args.seed is None else args.seed
    summary = []
    for j, seq in enumerate(np.random.SeedSequence(seed).spawn(args.m)):
        rep = replicate_dataset(fit, args.n, seq)
        name = f"replicate_{j:03d}.csv"
        write_records(out / name, rep.dataset.x, rep.dataset.x + rep.dataset.t)
        summary.append({"file": name, "n": rep.dataset.n, "proposals": rep.proposals,
                        "acceptance_rate": rep.acceptance_rate if rep.proposals else None})
    write_json(out / "replicates.json", {"model": fit.model.name, "seed": seed, "replicates": summary})
    print(f"wrote {args.m} replicated datasets of {args.n} records to {out}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    cfg = load_config(args.config)
    sim = _sim_config(cfg)
    out = output_dir(args.output_dir, cfg)
    res = coverage_study(sim, cfg.family, replications=args.R, alpha=cfg.alpha, target=args.target,
                         method=args.method, bootstrap_resamples=args.resamples)
    doc = res.as_dict()
    doc["config"] = cfg.to_dict()
    write_json(out / "coverage.json", doc)
    print(f"coverage of the {1 - cfg.alpha:.0%} {args.method} interval for {args.target}: "
          f"{res.coverage:.3f} over {args.R - res.failures} replications ({res.failures} failed)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twopoint", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-o", "--output-dir", help="defaults to the config's output_dir, then $TWOPOINT_OUTPUT_DIR, then .")

    sp = sub.add_parser("fit", help="fit a truncated journey-time model to re-identification records")
    sp.add_argument("--config", required=True)
    sp.add_argument("--input", required=True, help="CSV with upstream_time,downstream_time")
    sp.add_argument("--model", choices=["exp-uniform", "exp-empirical", "weibull-uniform", "weibull-empirical"])
    sp.add_argument("--resamples", type=int, help="bootstrap resamples (0 disables)")
    sp.add_argument("--no-bootstrap", action="store_true")
    sp.add_argument("--workers", type=int)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="simulate a two-point survey")
    sp.add_argument("--config", required=True)
    sp.add_argument("--population", type=int)
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("evaluate", help="K-S test of records against a fitted model")
    sp.add_argument("--fit", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--alpha", type=float, default=0.05)
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("replicate", help="draw datasets from a fitted model")
    sp.add_argument("--fit", required=True)
    sp.add_argument("-n", type=int, required=True, help="records per dataset")
    sp.add_argument("-m", type=int, default=1, help="number of datasets")
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_replicate)

    sp = sub.add_parser("coverage", help="Monte Carlo coverage study of interval estimates")
    sp.add_argument("--config", required=True)
    sp.add_argument("-R", type=int, default=200, help="replications")
    sp.add_argument("--target", default="mean")
    sp.add_argument("--method", choices=["fisher", "bootstrap"], default="fisher")
    sp.add_argument("--resamples", type=int, default=200, help="bootstrap resamples per replication")
    common(sp)
    sp.set_defaults(func=cmd_coverage)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
