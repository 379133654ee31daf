"""Nelder-Mead simplex minimiser for low-dimensional smooth objectives."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def nelder_mead(f, x0, step=0.1, ftol=1e-9, max_iter=2000,
                reflect=1.0, expand=2.0, contract=0.5, shrink=0.5) -> SimplexResult:
    """Minimise ``f`` starting from a right-angled simplex of edge ``step`` at ``x0``.

    Stops when ``max(f) - min(f)`` over the simplex drops below ``ftol``.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    simplex = np.vstack([x0] + [x0 + step * np.eye(dim)[i] for i in range(dim)])
    fvals = np.array([f(p) for p in simplex])
    nfev = dim + 1

    for it in range(1, max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if fvals[-1] - fvals[0] < ftol:
            return SimplexResult(simplex[0].copy(), float(fvals[0]), it - 1, nfev, True)

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + reflect * (centroid - worst)
        fr = f(xr)
        nfev += 1
        if fr < fvals[0]:
            xe = centroid + expand * (xr - centroid)
            fe = f(xe)
            nfev += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        # contraction: outside if the reflected point beats the worst, else inside
        if fr < fvals[-1]:
            xc = centroid + contract * (xr - centroid)
        else:
            xc = centroid + contract * (worst - centroid)
        fc = f(xc)
        nfev += 1
        if fc < min(fr, fvals[-1]):
            simplex[-1], fvals[-1] = xc, fc
            continue
        best = simplex[0]
        simplex[1:] = best + shrink * (simplex[1:] - best)
        fvals[1:] = [f(p) for p in simplex[1:]]
        nfev += dim

    order = np.argsort(fvals, kind="stable")
    return SimplexResult(simplex[order[0]].copy(), float(fvals[order[0]]), max_iter, nfev, False)
