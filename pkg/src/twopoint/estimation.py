"""Maximum likelihood for the truncated journey-time model.

Exponential fits use the closed-form score and information, with the
arrival-weighted integrals

    v = int h(x) [exp(-r b_l) - exp(-r b_u)] dx          (= C)
    u = int h(x) [b_l exp(-r b_l) - b_u exp(-r b_u)] dx
    w = int h(x) [b_l^2 exp(-r b_l) - b_u^2 exp(-r b_u)] dx

giving ``score = n/r - sum(t) + n u/v`` and
``information = n/r^2 + n (w v - u^2) / v^2``.

Weibull fits maximise the log-likelihood by Nelder-Mead in log-parameter
space; the score and information come from central differences. During a
Weibull fit the normalisation quadrature uses a frozen panel count so that
the likelihood surface is smooth enough to difference.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Dict, Optional, Tuple

import numpy as np

from .data import Dataset
from .errors import DataError, DegenerateZoneError, InsufficientDataError
from .model import JourneyModel, integrate_x, normalization
from . import geometry as geo
from .optimize import nelder_mead

log = logging.getLogger(__name__)

RATE_BRACKET = (1e-6, 1e3)
MIN_RECORDS = {"exp": 1, "weibull": 3}
SCORE_STEP = 1e-6
HESS_STEP = 1e-4


class Likelihood:
    """Log-likelihood of one dataset under one model, with a per-instance ``C`` memo.

    ``panels`` freezes the quadrature (subintervals per piece); ``None`` means adaptive.
    """

    def __init__(self, data: Dataset, model: JourneyModel, panels: Optional[int] = None):
        if data.windows != model.windows:
            raise DataError("dataset and model use different survey windows")
        self.data = data
        self.model = model
        self.panels = panels
        self.n = data.n
        self.sum_t = float(data.t.sum())
        with np.errstate(divide="ignore"):
            self.sum_log_h = float(np.log(model.arrival.pdf(data.x)).sum()) if data.n else 0.0
        if data.n and model.family == "weibull":
            self.log_t = np.log(data.t)
        self._memo: Dict[Tuple[float, ...], float] = {}

    def norm(self, theta) -> float:
        key = tuple(float(v) for v in np.ravel(theta))
        if key not in self._memo:
            self._memo[key] = normalization(self.model, key, fixed=self.panels).value
        return self._memo[key]

    def __call__(self, theta) -> float:
        if self.n == 0:
            return 0.0
        theta = np.asarray(theta, dtype=float)
        n = self.n
        if self.model.family == "exp":
            rate = theta[0]
            ll_g = n * math.log(rate) - rate * self.sum_t
        else:
            k, lam = theta
            z = np.exp(k * (self.log_t - math.log(lam)))
            ll_g = n * math.log(k / lam) + (k - 1.0) * float((self.log_t - math.log(lam)).sum()) - float(z.sum())
        value = self.sum_log_h + ll_g - n * math.log(self.norm(theta))
        if not math.isfinite(value):
            raise DataError("log-likelihood is not finite; some record has zero density")
        return value

    def safe(self, theta) -> float:
        """Like ``__call__`` but ``-inf`` where the observable zone degenerates."""
        try:
            return self(theta)
        except (DegenerateZoneError, ValueError, OverflowError):
            return -math.inf


def total_log_likelihood(d: Dataset, m: JourneyModel, theta) -> float:
    return Likelihood(d, m)(theta)


# ---------------------------------------------------------------------------
# Exponential closed forms


def exp_integrals(m: JourneyModel, rate: float, panels: Optional[int] = None):
    """Return ``(v, u, w)`` for the Exponential family at ``rate``."""
    win = m.windows

    def integrand(x):
        bl = geo.lower_bound(win, x)
        bu = geo.upper_bound(win, x)
        el = np.exp(-rate * bl)
        eu = np.exp(-rate * bu)
        h = m.arrival.pdf(x)
        return np.stack([h * (el - eu), h * (bl * el - bu * eu), h * (bl * bl * el - bu * bu * eu)])

    q = integrate_x(m, integrand, fixed=panels, atol=1e-300)
    v, u, w = (float(a) for a in q.value)
    if not v >= 1e-300:
        raise DegenerateZoneError(f"observable zone carries no mass at rate {rate:g}")
    return v, u, w


def exp_score(d: Dataset, m: JourneyModel, rate: float) -> float:
    v, u, _ = exp_integrals(m, rate)
    return d.n / rate - float(d.t.sum()) + d.n * u / v


def exp_information(d: Dataset, m: JourneyModel, rate: float) -> float:
    """Observed information ``-d2 LL / d rate^2``."""
    v, u, w = exp_integrals(m, rate)
    return d.n / rate**2 + d.n * (w * v - u * u) / (v * v)


# ---------------------------------------------------------------------------
# finite differences


def _steps(theta, rel):
    return rel * np.maximum(1.0, np.abs(theta))


def numeric_gradient(f, theta, rel=SCORE_STEP) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    hs = _steps(theta, rel)
    g = np.empty_like(theta)
    for j, h in enumerate(hs):
        e = np.zeros_like(theta)
        e[j] = h
        g[j] = (f(theta + e) - f(theta - e)) / (2.0 * h)
    return g


def numeric_hessian(f, theta, rel=HESS_STEP) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    hs = _steps(theta, rel)
    f0 = f(theta)
    H = np.empty((p, p))
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = hs[i]
        H[i, i] = (f(theta + ei) - 2.0 * f0 + f(theta - ei)) / hs[i] ** 2
        for j in range(i + 1, p):
            ej = np.zeros(p)
            ej[j] = hs[j]
            H[i, j] = (f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)) / (4.0 * hs[i] * hs[j])
            H[j, i] = H[i, j]
    return 0.5 * (H + H.T)


def score(d: Dataset, m: JourneyModel, theta, panels: Optional[int] = None) -> np.ndarray:
    """Gradient of the total log-likelihood with respect to the natural parameters."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise ValueError("parameters must be strictly positive")
    if m.family == "exp":
        return np.array([exp_score(d, m, theta[0])])
    if panels is None:
        panels = _weibull_panels(m, theta)
    return numeric_gradient(Likelihood(d, m, panels), theta)


def observed_information(d: Dataset, m: JourneyModel, theta, panels: Optional[int] = None) -> np.ndarray:
    """Negative Hessian of the total log-likelihood, symmetrised."""
    theta = np.asarray(theta, dtype=float)
    if m.family == "exp":
        return np.array([[exp_information(d, m, theta[0])]])
    if panels is None:
        panels = _weibull_panels(m, theta)
    return -numeric_hessian(Likelihood(d, m, panels), theta)


# ---------------------------------------------------------------------------
# fitting


@dataclass
class FitResult:
    model: JourneyModel
    theta: np.ndarray
    loglik: float
    n: int
    observed_info: Optional[np.ndarray]
    se: Optional[np.ndarray]
    survivor_fraction: float
    converged: bool
    iterations: int
    alpha: float = 0.05
    info_pd: bool = False
    ci_fisher: Dict[str, Optional[Tuple[float, float]]] = field(default_factory=dict)
    message: str = ""

    @property
    def param_names(self) -> tuple:
        return self.model.dist_class.param_names

    @property
    def journey(self):
        return self.model.journey(self.theta)

    @property
    def mean_journey_time(self) -> float:
        return self.journey.mean()

    def params(self) -> Dict[str, float]:
        return dict(zip(self.param_names, (float(v) for v in self.theta)))


def _weibull_panels(m: JourneyModel, theta) -> int:
    return max(16, normalization(m, theta).per_piece)


def _default_init(d: Dataset, family: str) -> np.ndarray:
    mean_t = float(d.t.mean())
    mean_t = mean_t if mean_t > 0 else 1e-3
    if family == "exp":
        return np.array([1.0 / mean_t])
    return np.array([1.0, mean_t])


def _fit_exp(d: Dataset, m: JourneyModel, init) -> Tuple[np.ndarray, bool, int, str]:
    """Safeguarded Newton on the score in ``eta = log(rate)``, kept inside a sign bracket."""
    n = d.n
    sum_t = float(d.t.sum())
    lo, hi = math.log(RATE_BRACKET[0]), math.log(RATE_BRACKET[1])

    def s_eta(eta):
        r = math.exp(eta)
        v, u, w = exp_integrals(m, r)
        s = n / r - sum_t + n * u / v
        ds = -(n / r**2 + n * (w * v - u * u) / (v * v))
        return r * s, r * r * ds + r * s, s

    def sweep():
        grid = np.linspace(lo, hi, 97)
        vals = [s_eta(e)[0] for e in grid]
        roots = [(grid[i], grid[i + 1]) for i in range(len(grid) - 1) if vals[i] > 0 >= vals[i + 1]]
        return roots

    s_lo, s_hi = s_eta(lo)[0], s_eta(hi)[0]
    unique = True
    if not (s_lo > 0 > s_hi):
        roots = sweep()
        if not roots:
            eta = lo if s_lo <= 0 else hi
            return np.array([math.exp(eta)]), False, 0, "score has no sign change on the rate bracket"
        unique = len(roots) == 1
        lo, hi = roots[0]

    eta = float(np.clip(math.log(init[0]), lo, hi))
    for it in range(1, 101):
        se, dse, s_nat = s_eta(eta)
        if abs(s_nat) <= 1e-10 * n * max(1.0, math.exp(eta)):
            return np.array([math.exp(eta)]), unique, it, "" if unique else "multiple score roots; smallest rate returned"
        if se > 0:
            lo = eta
        else:
            hi = eta
        step = -se / dse if dse < 0 else math.nan
        cand = eta + step
        if not (lo < cand < hi) or not math.isfinite(cand):
            cand = 0.5 * (lo + hi)
        if abs(cand - eta) < 1e-15 * max(1.0, abs(eta)):
            return np.array([math.exp(cand)]), unique, it, ""
        eta = cand
    return np.array([math.exp(eta)]), False, 100, "Newton iterations exhausted"


def _polish(f, eta, max_steps=8):
    """Newton steps on finite-difference derivatives of ``f(eta)``; keeps only improvements."""
    best = f(eta)
    for _ in range(max_steps):
        g = numeric_gradient(f, eta, rel=1e-5)
        H = numeric_hessian(f, eta, rel=1e-4)
        try:
            if np.any(np.linalg.eigvalsh(H) >= 0):
                break
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        cand = eta + step
        val = f(cand)
        if not val > best:
            break
        eta, best = cand, val
        if np.max(np.abs(step)) < 1e-12:
            break
    return eta


def _fit_weibull(d: Dataset, m: JourneyModel, init, freeze: Dict[int, float]):
    free = [j for j in range(m.n_params) if j not in freeze]
    theta0 = np.array(init, dtype=float)
    for j, v in freeze.items():
        theta0[j] = v

    def full(eta_free):
        th = theta0.copy()
        th[free] = np.exp(eta_free)
        return th

    panels = _weibull_panels(m, theta0)
    eta = np.log(theta0[free])
    total_iter = 0
    for _ in range(3):
        ll = Likelihood(d, m, panels)
        res = nelder_mead(lambda e: -ll.safe(full(e)), eta)
        total_iter += res.iterations
        eta = res.x
        if res.converged:
            eta = _polish(lambda e: ll.safe(full(e)), eta)
        needed = _weibull_panels(m, full(eta))
        if needed <= panels:
            return full(eta), res.converged, total_iter, panels, "" if res.converged else "Nelder-Mead iterations exhausted"
        panels = needed
    return full(eta), False, total_iter, panels, "quadrature panel count did not settle"


def fit_mle(d: Dataset, m: JourneyModel, init=None, alpha: float = 0.05,
            freeze: Optional[Dict[str, float]] = None, inference: bool = True) -> FitResult:
    """Maximum-likelihood fit, with observed information and Fisher intervals.

    ``freeze`` pins named parameters (Weibull only), e.g. ``{"shape": 1.0}``.
    ``inference=False`` skips the information matrix and intervals.
    """
    need = MIN_RECORDS[m.family]
    if d.n < need:
        raise InsufficientDataError(f"{m.family} fit needs at least {need} records, got {d.n}")
    if d.windows != m.windows:
        raise DataError("dataset and model use different survey windows")
    init = _default_init(d, m.family) if init is None else np.asarray(init, dtype=float)
    names = m.dist_class.param_names
    freeze_idx = {names.index(k): float(v) for k, v in (freeze or {}).items()}

    panels = None
    if m.family == "exp":
        if freeze_idx:
            raise ValueError("nothing to freeze in a one-parameter family")
        theta, converged, iters, msg = _fit_exp(d, m, init)
    else:
        theta, converged, iters, panels, msg = _fit_weibull(d, m, init, freeze_idx)

    ll = Likelihood(d, m, panels)
    loglik = ll(theta)
    fit = FitResult(
        model=m, theta=theta, loglik=loglik, n=d.n, observed_info=None, se=None,
        survivor_fraction=normalization(m, theta).value, converged=converged,
        iterations=iters, alpha=alpha, message=msg,
    )
    if not inference:
        return fit
    info = observed_information(d, m, theta, panels=panels)
    if freeze_idx:
        keep = [j for j in range(m.n_params) if j not in freeze_idx]
        info = info[np.ix_(keep, keep)]
    fit.observed_info = info
    eig = np.linalg.eigvalsh(info)
    fit.info_pd = bool(np.all(eig > 0))
    if fit.info_pd and not freeze_idx:
        fit.se = np.sqrt(np.diag(np.linalg.inv(info)))
        fit.ci_fisher = fisher_ci(fit, alpha)
    elif not fit.info_pd:
        log.warning("observed information is not positive definite; Fisher intervals suppressed")
    return fit


def z_quantile(alpha: float) -> float:
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def fisher_ci(f: FitResult, alpha: float = 0.05) -> Dict[str, Optional[Tuple[float, float]]]:
    """Wald intervals ``theta_j +/- z * se_j`` plus a mean-journey-time interval.

    The Exponential mean interval maps the rate endpoints through ``1 / rate``;
    for the Weibull it is ``None`` (use the bootstrap).
    """
    if f.observed_info is None or not f.info_pd:
        raise DegenerateZoneError("observed information is not positive definite")
    z = z_quantile(alpha)
    se = np.sqrt(np.diag(np.linalg.inv(f.observed_info)))
    out: Dict[str, Optional[Tuple[float, float]]] = {}
    for name, th, s in zip(f.param_names, f.theta, se):
        out[name] = (float(th - z * s), float(th + z * s))
    if f.model.family == "exp":
        lo, hi = out["rate"]
        out["mean"] = (1.0 / hi, 1.0 / lo if lo > 0 else math.inf)
    else:
        out["mean"] = None
    return out
