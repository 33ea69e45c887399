"""Sequence extrapolation for exhaustion limits.

Values are always given from the coarsest to the finest scale, with the scale
parameter (radius or strip half-width) multiplied by ``ratio`` at each step.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import NotConverged
from .estimate import Estimate

__all__ = ["richardson", "richardson_table", "fitted_exponent", "check_converged"]


def richardson_table(values: Sequence[float], ratio: float = 2.0, orders: Sequence[float] = (1, 2)):
    """Neville-style Richardson table.

    Level ``m`` removes an error term proportional to ``h**orders[m-1]``.
    Returns the list of levels, level 0 being the input.
    """
    levels = [np.asarray(values, dtype=float)]
    for p in orders:
        prev = levels[-1]
        if len(prev) < 2:
            break
        f = ratio ** p
        levels.append((f * prev[1:] - prev[:-1]) / (f - 1.0))
    return levels


def richardson(values: Sequence[float], ratio: float = 2.0, orders: Sequence[float] = (1, 2)) -> Estimate:
    """Extrapolate assuming ``v(h) = v + c_1 h^{p_1} + c_2 h^{p_2} + ...``.

    The error is the gap between the highest level and the best entry one
    level down, which is a (usually generous) estimate of the remainder.
    """
    values = [float(v) for v in values]
    if len(values) == 1:
        return Estimate(values[0], math.inf, "direct", {"sequence": values})
    levels = richardson_table(values, ratio, orders)
    best = float(levels[-1][-1])
    err = abs(best - float(levels[-2][-1]))
    return Estimate(best, err, "extrapolated",
                    {"sequence": values, "ratio": ratio, "orders": list(orders)[: len(levels) - 1]})


def fitted_exponent(values: Sequence[float], ratio: float = 2.0) -> Estimate:
    """Aitken extrapolation from the last three values with a fitted exponent.

    Assumes ``v(h) = v + c h^beta``; ``beta`` is recovered from the ratio of
    successive differences.  The error combines the disagreement with a
    first-order Richardson step at the nearest half-integer exponent and a 5%
    share of the applied correction.
    """
    values = [float(v) for v in values]
    if len(values) < 3:
        raise ValueError("fitted extrapolation needs at least three values")
    a, b, c = values[-3:]
    d1, d2 = b - a, c - b
    details = {"sequence": values, "ratio": ratio}
    if d2 == 0.0:
        return Estimate(c, 0.0, "extrapolated", details | {"beta": math.inf})
    r = d1 / d2
    if r <= 1.0:
        # not a monotone geometric approach; fall back to the last value
        details["beta"] = None
        return Estimate(c, abs(d2) + abs(d1), "extrapolated", details)
    beta = math.log(r) / math.log(ratio)
    limit = c + d2 / (r - 1.0)
    p = max(0.5, round(2 * beta) / 2)
    f = ratio ** p
    r1 = (f * c - b) / (f - 1.0)
    err = max(abs(limit - r1), 0.05 * abs(limit - c))
    details["beta"] = beta
    return Estimate(limit, err, "extrapolated", details)


def check_converged(values: Sequence[float], tol: float, what: str = "sequence", estimate=None):
    """Raise NotConverged unless the last two values agree to relative ``tol``."""
    if len(values) < 2:
        return
    a, b = float(values[-2]), float(values[-1])
    scale = max(abs(b), 1e-300)
    if abs(b - a) > tol * scale:
        raise NotConverged(
            f"{what} not converged: last step changed by {abs(b - a) / scale:.3g} (relative), tol {tol:g}",
            estimate=estimate,
        )
