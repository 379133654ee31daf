"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
import json
import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))
from conftest import ACCEPTANCE_LINES, case1_closed_form, random_model  # noqa: E402

from twopoint.bootstrap import BootstrapSpec, bootstrap_ci  # noqa: E402
from twopoint.cli import main  # noqa: E402
from twopoint.estimation import Likelihood, exp_information, exp_score, fit_mle, numeric_gradient, numeric_hessian  # noqa: E402
from twopoint.evaluation import ks_self_test, sample_truncated  # noqa: E402
from twopoint.geometry import TimeTimePoint, from_downstream_view, to_downstream_view  # noqa: E402
from twopoint.io import parse_records  # noqa: E402
from twopoint.model import downstream_arrival_density, normalization, uniform_model  # noqa: E402
from twopoint.quadrature import simpson  # noqa: E402
from twopoint.simulation import coverage_study, simulate_survey, study_case  # noqa: E402

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


def verdict(number, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {name}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert ok, line


def fit_case(case, seed=42):
    d = simulate_survey(study_case(case, population=20000, seed=seed)).survivors
    return d, fit_mle(d, uniform_model("exp" if case == 1 else "weibull", d.windows))


def test_criterion_01_case1_recovery():
    t0 = time.perf_counter()
    d, f = fit_case(1)
    dt = time.perf_counter() - t0
    err = f.mean_journey_time / 2.0 - 1.0
    verdict(1, "Case 1 recovery", f.converged and abs(err) <= 0.05 and dt < 10,
            f"n={d.n} mean={f.mean_journey_time:.4f} (err {err:+.2%}, limit 5%), {dt:.2f}s (limit 10s)")


def test_criterion_02_case2_recovery():
    t0 = time.perf_counter()
    d, f = fit_case(2)
    dt = time.perf_counter() - t0
    k = f.theta[0]
    err_mean = f.mean_journey_time / 2.38 - 1.0
    err_k = k / 0.75 - 1.0
    verdict(2, "Case 2 recovery", f.converged and abs(err_mean) <= 0.07 and abs(err_k) <= 0.10 and dt < 60,
            f"n={d.n} mean={f.mean_journey_time:.4f} (err {err_mean:+.2%}, limit 7%), shape={k:.4f} "
            f"(err {err_k:+.2%}, limit 10%), {dt:.2f}s (limit 60s)")


def test_criterion_03_survivorship_bias():
    bad = []
    worst_gap = math.inf
    for seed in range(50):
        d, f = fit_case(1, seed=1000 + seed)
        naive = d.naive_mean()
        gap = abs(naive - 2.0) - abs(f.mean_journey_time - 2.0)
        worst_gap = min(worst_gap, gap)
        if not (naive < 2.0 and gap > 0):
            bad.append(seed)
    verdict(3, "survivorship-bias demonstration", not bad,
            f"50 seeds, failing seeds {bad or 'none'}, smallest error reduction {worst_gap:.3f} h")


def test_criterion_04_normalization_oracle():
    m = uniform_model("exp", study_case(1).windows)
    quad = normalization(m, [0.5]).value
    exact = case1_closed_form(0.5)
    n = 10**6
    mc = simulate_survey(study_case(1, population=n, seed=4)).survivor_fraction
    sigma = math.sqrt(exact * (1 - exact) / n)
    z = (mc - quad) / sigma
    verdict(4, "normalization oracle", abs(quad - exact) < 1e-8 and abs(z) < 3,
            f"quadrature {quad:.12f} vs closed form {exact:.12f} (diff {abs(quad - exact):.1e}), "
            f"Monte Carlo {mc:.5f} at 1e6 draws (z={z:+.2f})")


def test_criterion_05_derivatives():
    rng = np.random.default_rng(123)
    worst_s = worst_i = 0.0
    for _ in range(100):
        m, th = random_model(rng, "exp")
        d = sample_truncated(m, th, int(rng.integers(20, 2000)), rng).dataset
        theta = th * np.exp(rng.uniform(-0.5, 0.5))
        ll = Likelihood(d, m, panels=256)
        fd_s = numeric_gradient(ll, theta)[0]
        fd_i = -numeric_hessian(ll, theta)[0, 0]
        worst_s = max(worst_s, abs(exp_score(d, m, theta[0]) - fd_s) / abs(fd_s))
        worst_i = max(worst_i, abs(exp_information(d, m, theta[0]) - fd_i) / abs(fd_i))
    verdict(5, "score/information vs finite differences", worst_s < 1e-5 and worst_i < 1e-4,
            f"100 configs, worst rel. error score {worst_s:.1e} (limit 1e-5), information {worst_i:.1e} (limit 1e-4)")


def test_criterion_06_fisher_coverage():
    t0 = time.perf_counter()
    res = coverage_study(study_case(1, population=20000, seed=2024), "exp", replications=200, alpha=0.05)
    dt = time.perf_counter() - t0
    ok = 0.90 <= res.coverage <= 0.98 and dt < 300 and res.failures == 0
    verdict(6, "Fisher CI coverage", ok,
            f"coverage {res.coverage:.3f} over 200 replications (band 0.90-0.98), {res.failures} failures, "
            f"{dt:.1f}s (limit 300s)")


def test_criterion_07_bootstrap():
    d, f = fit_case(1)
    spec = BootstrapSpec(resamples=500, master_seed=7)
    a = bootstrap_ci(d, f.model, spec, baseline=f)
    b = bootstrap_ci(d, f.model, spec, baseline=f)
    same = a.intervals == b.intervals and all(np.array_equal(a.replicates[k], b.replicates[k]) for k in a.replicates)
    lo, hi = a.intervals["mean"]
    verdict(7, "bootstrap determinism and sanity", same and lo <= 2.0 <= hi,
            f"repeat run bit-identical: {same}; 95% CI for mean [{lo:.4f}, {hi:.4f}] (m=500)")


def test_criterion_08_mass_and_affine():
    notes, ok = [], True
    w = study_case(1).windows
    for fam, th in (("exp", [0.5]), ("weibull", [0.75, 2.0])):
        m = uniform_model(fam, w)
        C = normalization(m, th).value
        mass = float(simpson(lambda y: downstream_arrival_density(m, th, y, norm=C), [7.0, 9.0, 10.0],
                             graded=[9.0], rtol=1e-10).value)
        ok &= abs(mass - 1.0) <= 1e-6
        notes.append(f"{fam} mass {mass:.9f}")

    m = uniform_model("exp", w)
    C = normalization(m, [0.5]).value
    n = 10**6
    rep = sample_truncated(m, [0.5], n, np.random.default_rng(17), expected_rate=C).dataset
    edges = np.linspace(7, 10, 21)
    counts, _ = np.histogram(rep.x + rep.t, bins=edges)
    p = np.array([float(simpson(lambda y: downstream_arrival_density(m, [0.5], y, norm=C), [a, b]).value)
                  for a, b in zip(edges[:-1], edges[1:])])
    zmax = float(np.max(np.abs(counts / n - p) / np.sqrt(p * (1 - p) / n)))
    ok &= zmax <= 3.0
    notes.append(f"histogram max |z| {zmax:.2f} (limit 3)")

    rng = np.random.default_rng(8)
    # binary-exact times (2^-20 h, about 3.4 ms) so x + t is representable
    x = np.round(rng.uniform(0, 24, 1000) * 2**20) / 2**20
    t = np.round(rng.exponential(2.0, 1000) * 2**20) / 2**20
    pts = [TimeTimePoint(float(a), float(b)) for a, b in zip(x, t)]
    exact = all(from_downstream_view(to_downstream_view(p)) == p for p in pts)
    xr, tr = rng.uniform(0, 24, 1000), rng.exponential(2.0, 1000)
    ulps = max(abs(from_downstream_view(to_downstream_view(TimeTimePoint(a, b))).x - a) / np.spacing(a + b)
               for a, b in zip(xr, tr))
    ok &= exact
    notes.append(f"round trip exact on 1000 points: {exact} (arbitrary doubles within {ulps:.0f} ulp)")
    verdict(8, "affine and mass preservation", ok, "; ".join(notes))


def test_criterion_09_ks_self_consistency():
    _, f = fit_case(1)
    res = ks_self_test(f, n=2000, reps=200, alpha=0.05, seed=0)
    verdict(9, "K-S self-consistency", 0.005 <= res.rejection_rate <= 0.10,
            f"rejection rate {res.rejection_rate:.3f} over 200 replicates of 2000 records (band 0.005-0.10)")


FIT_SCHEMA = {"schema_version": int, "library_version": str, "config": dict, "seed": int, "model": str,
              "arrival": dict, "n": int, "params": dict, "mean_journey_time": float, "loglik": float,
              "survivor_fraction": float, "converged": bool, "ci_fisher": dict, "ci_bootstrap": dict}
KS_SCHEMA = {"D_n": float, "n": int, "alpha": float, "critical_value": float, "p_value": float, "reject": bool}


def schema_ok(doc, schema):
    return all(isinstance(doc.get(k), typ) for k, typ in schema.items())


def test_criterion_10_cli_pipeline(tmp_path, capsys):
    cfg = tmp_path / "case1.json"
    cfg.write_text(json.dumps({
        "windows": {"upstream_start": "06:00", "upstream_end": "09:00", "downstream_start": "07:00",
                    "downstream_end": "10:00", "free_flow_time": 0, "max_journey": 6},
        "model": "exp-uniform", "seed": 42, "bootstrap": {"resamples": 200},
        "simulation": {"journey": {"family": "exp", "mean": 2.0}, "population": 20000}}))
    out = tmp_path / "out"
    codes = [main(["simulate", "--config", str(cfg), "-o", str(out)])]
    codes.append(main(["fit", "--config", str(cfg), "--input", str(out / "survivors.csv"), "-o", str(out)]))
    codes.append(main(["evaluate", "--fit", str(out / "fit.json"), "--input", str(out / "survivors.csv"),
                       "-o", str(out)]))
    codes.append(main(["replicate", "--fit", str(out / "fit.json"), "-n", "1000", "-m", "2", "-o", str(out)]))
    fit = json.loads((out / "fit.json").read_text())
    ks = json.loads((out / "ks.json").read_text())
    valid = schema_ok(fit, FIT_SCHEMA) and schema_ok(ks, KS_SCHEMA) and (out / "replicate_001.csv").exists()

    truth = simulate_survey(study_case(1, population=20000, seed=42)).survivors
    parsed = parse_records(out / "survivors.csv", truth.windows).dataset
    drift = max(np.max(np.abs(parsed.x - truth.x)), np.max(np.abs(parsed.t - truth.t)))
    ok = codes == [0, 0, 0, 0] and valid and drift <= 1e-6 and abs(fit["mean_journey_time"] / 2 - 1) <= 0.05
    verdict(10, "end-to-end CLI", ok,
            f"exit codes {codes}, schemas valid: {valid}, fitted mean {fit['mean_journey_time']:.4f}, "
            f"round-trip drift {drift:.1e} h (limit 1e-6)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
