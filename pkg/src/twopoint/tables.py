"""Plot-ready grids comparing a fitted model with the observed records."""
from __future__ import annotations

import numpy as np

from . import geometry as geo
from .data import Dataset
from .estimation import FitResult
from .model import (_interval_mass, downstream_arrival_density, journey_support,
                    marginal_journey_cdf, marginal_journey_pdf)

GRID = 201
BINS = 40


def _hist_at(values, lo, hi, grid):
    counts, edges = np.histogram(values, bins=BINS, range=(lo, hi))
    dens = counts / (max(len(values), 1) * (edges[1] - edges[0]))
    idx = np.clip(np.searchsorted(edges, grid, side="right") - 1, 0, BINS - 1)
    return dens[idx]


def _ecdf(values, grid):
    v = np.sort(values)
    return np.searchsorted(v, grid, side="right") / max(v.size, 1)


def marginal_rows(fit: FitResult, d: Dataset):
    """Rows ``(variable, value, fitted_pdf, fitted_cdf, empirical_pdf, empirical_cdf)``.

    ``variable`` is ``journey_time`` or ``arrival_time``; both are marginals of
    the observed (truncated) records.
    """
    m, theta, C = fit.model, fit.theta, fit.survivor_fraction
    rows = []

    t_lo, t_hi = journey_support(m)
    tg = np.linspace(t_lo, t_hi, GRID)
    f_pdf = marginal_journey_pdf(m, theta, tg, norm=C)
    f_cdf = marginal_journey_cdf(m, theta, tg, norm=C)
    e_pdf = _hist_at(d.t, t_lo, t_hi, tg)
    e_cdf = _ecdf(d.t, tg)
    rows += [("journey_time", *r) for r in zip(tg, f_pdf, f_cdf, e_pdf, e_cdf)]

    w = m.windows
    xg = np.linspace(w.xs, w.xe, GRID)
    dist = m.journey(theta)
    a_pdf = m.arrival.pdf(xg) * _interval_mass(dist, geo.lower_bound(w, xg), geo.upper_bound(w, xg)) / C
    a_cdf = np.concatenate([[0.0], np.cumsum(0.5 * (a_pdf[1:] + a_pdf[:-1]) * np.diff(xg))])
    a_cdf = a_cdf / a_cdf[-1] if a_cdf[-1] > 0 else a_cdf
    rows += [("arrival_time", *r) for r in zip(xg, a_pdf, a_cdf, _hist_at(d.x, w.xs, w.xe, xg), _ecdf(d.x, xg))]
    return [(v, float(a), float(b), float(c), float(e), float(g)) for v, a, b, c, e, g in rows]


def downstream_rows(fit: FitResult, d: Dataset):
    """Rows ``(downstream_time, fitted_density, fitted_rate, empirical_density, empirical_rate)``.

    Rates are vehicles per hour at the downstream station among re-identified vehicles.
    """
    w = fit.model.windows
    yg = np.linspace(w.ys, w.ye, GRID)
    dens = downstream_arrival_density(fit.model, fit.theta, yg, norm=fit.survivor_fraction)
    emp = _hist_at(d.x + d.t, w.ys, w.ye, yg)
    return [(float(y), float(a), float(a * d.n), float(b), float(b * d.n)) for y, a, b in zip(yg, dens, emp)]
