"""Scalar search utilities: uniform grid scan with golden-section refinement."""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["golden_section_min", "grid_refine_min", "grid_refine_max"]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_min(
    fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> float:
    """Golden-section minimizer of a unimodal function on [lo, hi].

    Returns the abscissa of the bracket midpoint once the bracket is shorter
    than ``tol`` (absolute, in argument units).
    """
    if hi < lo:
        lo, hi = hi, lo
    dist = hi - lo
    if dist <= tol:
        return (lo + hi) / 2.0
    n = int(math.ceil(math.log(tol / dist) / math.log(_INV_PHI)))
    c = lo + _INV_PHI_SQ * dist
    d = lo + _INV_PHI * dist
    yc = fn(c)
    yd = fn(d)
    for _ in range(max(n - 1, 0)):
        if yc < yd:
            hi, d, yd = d, c, yc
            dist *= _INV_PHI
            c = lo + _INV_PHI_SQ * dist
            yc = fn(c)
        else:
            lo, c, yc = c, d, yd
            dist *= _INV_PHI
            d = lo + _INV_PHI * dist
            yd = fn(d)
    return (lo + d) / 2.0 if yc < yd else (c + hi) / 2.0


def grid_refine_min(
    fn: Callable[[float], float], lo: float, hi: float, grid_points: int
) -> tuple[float, float]:
    """Minimize on [lo, hi]: uniform scan, then one golden-section pass.

    The golden-section pass runs on the bracket around the grid argmin; the
    final answer is the best of {refined point, grid argmin, both interval
    endpoints}, so an optimum sitting exactly on a boundary is returned
    exactly rather than to within the refinement tolerance.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    if hi <= lo:
        return lo, fn(lo)
    step = (hi - lo) / (grid_points - 1)
    xs = [lo + i * step for i in range(grid_points)]
    xs[-1] = hi
    ys = [fn(x) for x in xs]
    i = min(range(grid_points), key=ys.__getitem__)
    b_lo = xs[max(i - 1, 0)]
    b_hi = xs[min(i + 1, grid_points - 1)]
    refined = golden_section_min(fn, b_lo, b_hi, tol=max((hi - lo) * 1e-12, 1e-15))
    candidates = [refined, xs[i], lo, hi]
    best = min(candidates, key=fn)
    return best, fn(best)


def grid_refine_max(
    fn: Callable[[float], float], lo: float, hi: float, grid_points: int
) -> tuple[float, float]:
    """Maximize on [lo, hi] via :func:`grid_refine_min` on the negated function."""
    x, neg = grid_refine_min(lambda t: -fn(t), lo, hi, grid_points)
    return x, -neg
