"""Record files, run configuration and result serialisation.

Record files are comma-separated with the header ``upstream_time,downstream_time``.
Times are decimal hours (``6.6``) or clock times (``06:36``); lines starting
with ``#`` and blank lines are ignored. All outputs use decimal hours.
"""
from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from . import __version__
from .bootstrap import BootstrapResult, BootstrapSpec
from .data import Dataset
from .distributions import Exponential, Weibull, arrival_from_dict, build_empirical_arrival, UniformArrival
from .errors import DataError, MalformedRowError
from .estimation import FitResult
from .geometry import SurveyWindows, Zone, classify_many
from .model import MODEL_NAMES, JourneyModel, normalization

SCHEMA_VERSION = 1
RECORD_HEADER = ("upstream_time", "downstream_time")
OUTPUT_DIR_ENV = "TWOPOINT_OUTPUT_DIR"
_CLOCK = re.compile(r"^(\d{1,3}):([0-5]\d)$")


class ConfigError(ValueError):
    pass


def parse_time(text) -> float:
    """Decimal hours from ``"6.6"``, ``6.6`` or ``"06:36"``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    m = _CLOCK.match(s)
    if m:
        return int(m.group(1)) + int(m.group(2)) / 60.0
    if not re.fullmatch(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?", s):
        raise ValueError(f"not a time: {text!r}")
    return float(s)


@dataclass
class ParsedRecords:
    dataset: Dataset
    excluded_rows: List[Tuple[int, int]]  # (line number, zone)

    @property
    def n_excluded(self) -> int:
        return len(self.excluded_rows)


def parse_records(path, windows: SurveyWindows) -> ParsedRecords:
    """Read a record file; rows outside the observable zone are dropped and reported.

    Raises ``MalformedRowError`` for unparseable rows or non-positive journey
    times, and ``DataError`` when no usable row remains.
    """
    xs, ys, lines = [], [], []
    header_seen = False
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in next(csv.reader([line]))]
            if not header_seen:
                if tuple(c.lower() for c in cells) != RECORD_HEADER:
                    raise MalformedRowError(lineno, line, "expected header 'upstream_time,downstream_time'")
                header_seen = True
                continue
            if len(cells) != 2:
                raise MalformedRowError(lineno, line, "expected two fields")
            try:
                x, y = parse_time(cells[0]), parse_time(cells[1])
            except ValueError as exc:
                raise MalformedRowError(lineno, line, str(exc)) from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise MalformedRowError(lineno, line, "non-finite time")
            if not y > x:
                raise MalformedRowError(lineno, line, "downstream time must be after upstream time")
            xs.append(x)
            ys.append(y)
            lines.append(lineno)
    if not header_seen:
        raise DataError(f"{path}: no header row")
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    t = y - x
    zone = classify_many(windows, x, t)
    keep = zone == Zone.ZONE2
    excluded = [(lines[i], int(zone[i])) for i in np.flatnonzero(~keep)]
    if not keep.any():
        raise DataError(f"{path}: no records inside the observable zone ({len(excluded)} excluded)")
    return ParsedRecords(Dataset(x[keep], t[keep], windows), excluded)


def read_upstream_times(path) -> np.ndarray:
    """One upstream detection time per line (header ``upstream_time`` optional)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip().split(",")[0].strip()
            if not line or line.startswith("#") or line.lower() == "upstream_time":
                continue
            try:
                out.append(parse_time(line))
            except ValueError as exc:
                raise MalformedRowError(lineno, raw.strip(), str(exc)) from None
    return np.array(out, dtype=float)


def write_records(path, x, y) -> None:
    """Write a record file; ``repr`` floats keep the round trip exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_HEADER)
        for a, b in zip(x, y):
            w.writerow([repr(float(a)), repr(float(b))])


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    windows: SurveyWindows
    model: str = "exp-uniform"
    alpha: float = 0.05
    bootstrap: BootstrapSpec = field(default_factory=BootstrapSpec)
    seed: int = 0
    output_dir: Optional[str] = None
    arrival_bin_width: float = 0.25
    arrivals_file: Optional[str] = None
    simulation: Optional[dict] = None

    @property
    def family(self) -> str:
        return self.model.split("-")[0]

    @property
    def arrival_kind(self) -> str:
        return self.model.split("-")[1]

    def to_dict(self) -> dict:
        return {
            "windows": self.windows.to_dict(),
            "model": self.model,
            "alpha": self.alpha,
            "bootstrap": {"resamples": self.bootstrap.resamples, "seed": self.bootstrap.master_seed,
                          "workers": self.bootstrap.workers},
            "seed": self.seed,
            "output_dir": self.output_dir,
            "arrival_bin_width": self.arrival_bin_width,
            "arrivals_file": self.arrivals_file,
            "simulation": self.simulation,
        }


def windows_from_dict(d: dict) -> SurveyWindows:
    try:
        return SurveyWindows(
            parse_time(d["upstream_start"]),
            parse_time(d["upstream_end"]),
            parse_time(d["downstream_start"]),
            parse_time(d["downstream_end"]),
            parse_time(d.get("free_flow_time", 0.0)),
            parse_time(d.get("max_journey", 24.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"windows: missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"windows: {exc}") from None


def config_from_dict(d: dict) -> RunConfig:
    if "windows" not in d:
        raise ConfigError("config needs a 'windows' section")
    model = str(d.get("model", "exp-uniform")).lower()
    if model not in MODEL_NAMES:
        raise ConfigError(f"model must be one of {', '.join(MODEL_NAMES)}; got {model!r}")
    b = d.get("bootstrap") or {}
    seed = int(d.get("seed", 0))
    alpha = float(d.get("alpha", 0.05))
    try:
        spec = BootstrapSpec(resamples=int(b.get("resamples", 1000)), alpha=alpha,
                             master_seed=int(b.get("seed", seed)), workers=int(b.get("workers", 1)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        windows=windows_from_dict(d["windows"]),
        model=model,
        alpha=alpha,
        bootstrap=spec,
        seed=seed,
        output_dir=d.get("output_dir"),
        arrival_bin_width=float(d.get("arrival_bin_width", 0.25)),
        arrivals_file=d.get("arrivals_file"),
        simulation=d.get("simulation"),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    cfg = config_from_dict(raw)
    if cfg.arrivals_file and not os.path.isabs(cfg.arrivals_file):
        cfg.arrivals_file = str(Path(path).parent / cfg.arrivals_file)
    return cfg


def journey_from_dict(d: dict):
    """``{"family": "exp", "mean": 2}`` or ``{"family": "weibull", "shape": .., "scale": ..}``."""
    fam = d.get("family")
    if fam == "exp":
        if "mean" not in d:
            raise ConfigError("exp journey law is configured by its mean")
        return Exponential.from_mean(float(d["mean"]))
    if fam == "weibull":
        return Weibull(float(d["shape"]), float(d["scale"]))
    raise ConfigError(f"unknown journey family {fam!r}")


def output_dir(cli_value: Optional[str], cfg: Optional[RunConfig] = None) -> Path:
    d = cli_value or (cfg.output_dir if cfg else None) or os.environ.get(OUTPUT_DIR_ENV) or "."
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------------------
# fit results


def _interval(ci):
    if ci is None:
        return None
    return [ci[0], ci[1] if math.isfinite(ci[1]) else None]


def fit_to_dict(fit: FitResult, cfg: RunConfig, data: Dataset, n_excluded: int = 0,
                boot: Optional[BootstrapResult] = None) -> dict:
    dist = fit.journey
    return {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "model": fit.model.name,
        "arrival": fit.model.arrival.to_dict(),
        "n": fit.n,
        "n_excluded": n_excluded,
        "params": fit.params(),
        "mean_journey_time": fit.mean_journey_time,
        "median_journey_time": dist.median(),
        "naive_mean_journey_time": data.naive_mean(),
        "loglik": fit.loglik,
        "observed_info": None if fit.observed_info is None else fit.observed_info.tolist(),
        "info_positive_definite": fit.info_pd,
        "se": None if fit.se is None else dict(zip(fit.param_names, fit.se.tolist())),
        "alpha": fit.alpha,
        "ci_fisher": {k: _interval(v) for k, v in fit.ci_fisher.items()} if fit.ci_fisher else None,
        "ci_bootstrap": {k: list(v) for k, v in boot.intervals.items()} if boot else None,
        "bootstrap_resamples": boot.resamples if boot else 0,
        "bootstrap_refit_failures": boot.refit_failures if boot else None,
        "survivor_fraction": fit.survivor_fraction,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "message": fit.message,
    }


def load_fit(path) -> Tuple[FitResult, RunConfig, dict]:
    """Rebuild a ``FitResult`` from ``fit.json``; ``C(theta)`` is recomputed from the stored model."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    cfg = config_from_dict(doc["config"])
    family = doc["model"].split("-")[0]
    model = JourneyModel(family, arrival_from_dict(doc["arrival"]), cfg.windows)
    names = model.dist_class.param_names
    theta = np.array([doc["params"][k] for k in names], dtype=float)
    info = doc.get("observed_info")
    fit = FitResult(
        model=model, theta=theta, loglik=doc["loglik"], n=doc["n"],
        observed_info=None if info is None else np.array(info), se=None,
        survivor_fraction=normalization(model, theta).value, converged=doc["converged"],
        iterations=doc["iterations"], alpha=doc.get("alpha", 0.05),
        info_pd=bool(doc.get("info_positive_definite", False)), message=doc.get("message", ""),
    )
    return fit, cfg, doc


def build_model(cfg: RunConfig, data: Dataset) -> JourneyModel:
    w = cfg.windows
    if cfg.arrival_kind == "uniform":
        arrival = UniformArrival(w.xs, w.xe)
    else:
        times = read_upstream_times(cfg.arrivals_file) if cfg.arrivals_file else data.x
        arrival = build_empirical_arrival(times, (w.xs, w.xe), cfg.arrival_bin_width)
    return JourneyModel(cfg.family, arrival, w)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in r])
