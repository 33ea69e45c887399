"""Escape probabilities from the slit plane and the discrete square roots v, u.

``v`` vanishes on Z_+ = {0, 1, 2, ...}, is discrete harmonic off Z_+, and
behaves like (4/pi) Im sqrt(z) with the branch theta in [0, 2 pi).  ``u`` is its
harmonic conjugate, obtained by reflection.  ``v_eta``/``u_eta`` vanish on a
SAW eta and are q-harmonic off it; the strip versions are q-Poisson kernels of
the strip A_n to the points -n and +n.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DivideByZero, InvalidWalk, NotConverged
from .estimate import Estimate
from .extrapolate import check_converged, fitted_exponent, richardson
from .lattice import Saw, Site
from .linops import DomainSolver, FiniteDomain, SlitCorrection, TransparentStrip
from .signed_field import STANDARD, ZIPPER

__all__ = [
    "DEFAULT_RADII",
    "theta",
    "sqrt_branch",
    "slit_disk",
    "escape_prob",
    "f_R",
    "v",
    "u",
    "v_table",
    "v_eta",
    "u_eta",
    "v_eta_strip",
    "u_eta_strip",
    "strip_solver",
    "pi_over_4_diagnostic",
    "HarmonicTable",
]

DEFAULT_RADII = (64, 128, 256)


def theta(x, y):
    """arg(x + iy) in [0, 2 pi), vectorised."""
    return np.mod(np.arctan2(y, x), 2 * np.pi)


def sqrt_branch(x, y):
    """sqrt(z) with arg z in [0, 2 pi); returns (Re, Im)."""
    r = np.sqrt(np.hypot(x, y))
    t = theta(x, y) / 2
    return r * np.cos(t), r * np.sin(t)


def _on_slit(z) -> bool:
    return z[1] == 0 and z[0] >= 0


def _check_d2(z):
    z = Site(z)
    if len(z) != 2:
        raise DimensionError("harmonic functions are defined on Z^2")
    return z


# ---------------------------------------------------------------------------
# Dirichlet problems on D_R minus Z_+


def slit_disk(R: float) -> FiniteDomain:
    """D_R with the nonnegative real axis removed."""
    Ri = math.ceil(R) + 1
    xs = np.arange(-Ri, Ri + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    mask = (X * X + Y * Y < R * R) & ~((Y == 0) & (X >= 0))
    return FiniteDomain(mask, (Ri, Ri), f"slit_disk({R:g})")


@lru_cache(maxsize=4)
def _slit_solver(R: float, exact: bool = False) -> DomainSolver:
    return DomainSolver(slit_disk(R), STANDARD, exact)


def _circle_data(R: float, g):
    """Boundary data g(w) on C_R and 0 on the slit, vectorised."""

    def data(c):
        x, y = c[:, 0], c[:, 1]
        outer = x * x + y * y >= R * R
        return np.where(outer, g(x, y), 0.0)

    data.vectorized = True
    return data


@lru_cache(maxsize=16)
def _solution(R: float, what: str):
    s = _slit_solver(R)
    if what == "escape":
        g = lambda x, y: np.ones_like(x, dtype=float)
    elif what == "f":
        g = lambda x, y: sqrt_branch(x, y)[1]
    elif what == "sin":
        g = lambda x, y: np.sin(theta(x, y) / 2)
    else:  # pragma: no cover
        raise ValueError(what)
    return s.harmonic(_circle_data(R, g))


def _at(R: float, vec, z) -> float:
    i = _slit_solver(R).domain.index_of(z)
    return float(vec[i]) if i >= 0 else 0.0


def escape_prob(z, R: float, exact: bool = False):
    """P^z{ the walk reaches C_R before Z_+ }, i.e. sigma_R < tau_+."""
    z = _check_d2(z)
    if z.norm2() >= R * R:
        raise ValueError("escape_prob needs |z| < R")
    if _on_slit(z):
        return Fraction(0) if exact else 0.0
    if exact:
        s = _slit_solver(R, True)
        R2 = R * R
        return s.value(s.harmonic(lambda w: 1 if w.norm2() >= R2 else 0), z)
    return _at(R, _solution(R, "escape"), z)


def f_R(z, R: float) -> float:
    """E^z[ f(S(sigma_R ^ tau_+)) ] with f = Im sqrt and f = 0 on Z_+."""
    z = _check_d2(z)
    if z.norm2() >= R * R:
        raise ValueError("f_R needs |z| < R")
    return _at(R, _solution(R, "f"), z)


def pi_over_4_diagnostic(z, R: float) -> float:
    """E^z[ sin(theta/2) at the exit point | sigma_R < tau_+ ]."""
    z = _check_d2(z)
    e = escape_prob(z, R)
    if e == 0.0:
        raise DivideByZero(f"{z} lies on Z_+, the conditioning event is empty")
    return _at(R, _solution(R, "sin"), z) / e


# ---------------------------------------------------------------------------
# v and u


def _extrapolate_v(values, radii, route):
    ratio = radii[1] / radii[0] if len(radii) > 1 else 2.0
    # harmonic route: O(1/R) with a regular expansion; escape route carries an
    # additional (|z|/R)^{1/2} term
    orders = (1, 2) if route == "harmonic" else (0.5, 1)
    return richardson(values, ratio, orders)


def _v_sequence(z, radii, route):
    if route == "harmonic":
        return [4 / math.pi * f_R(z, R) for R in radii]
    if route == "escape":
        return [math.sqrt(R) * escape_prob(z, R) for R in radii]
    raise ValueError(f"unknown route {route!r}")


def v(z, radii: Sequence[float] = DEFAULT_RADII, route: str = "harmonic", tol: float = 5e-2) -> Estimate:
    """v(z) = lim R^{1/2} P^z{sigma_R < tau_+}.

    The default route uses v = lim (4/pi) f_R, whose error is O(1/R)
    uniformly; ``route="escape"`` uses the defining limit directly.
    """
    z = _check_d2(z)
    if _on_slit(z):
        return Estimate(0.0, 0.0, "exact")
    radii = list(radii)
    vals = _v_sequence(z, radii, route)
    est = _extrapolate_v(vals, radii, route)
    est = Estimate(est.value, est.error, est.mode, est.details | {"radii": radii, "route": route})
    check_converged(vals, tol, f"v{tuple(z)}", estimate=est)
    return est


def _reflect(z):
    """u(x+iy) = v(-x+iy) for y >= 0 and -v(-x+iy) for y < 0."""
    x, y = z
    return Site(-x, y), (1.0 if y >= 0 else -1.0)


def u(z, radii: Sequence[float] = DEFAULT_RADII, route: str = "harmonic", tol: float = 5e-2) -> Estimate:
    z = _check_d2(z)
    w, s = _reflect(z)
    e = v(w, radii, route, tol)
    return Estimate(s * e.value if e.value else 0.0, e.error, e.mode, e.details)


@dataclass(frozen=True)
class HarmonicTable:
    """Values of one of v, u, v_eta, ... on a window of sites."""

    function: str
    params: dict
    values: dict = field(default_factory=dict)  # Site -> Estimate

    def __getitem__(self, z) -> Estimate:
        return self.values[Site(z)]

    def to_csv(self, extra: dict | None = None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "y", "value", "error"])
        for z, e in sorted(self.values.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            wr.writerow([z[0], z[1], repr(float(e.value)), repr(float(e.error))])
        return buf.getvalue()


def v_table(sites: Iterable, radii: Sequence[float] = DEFAULT_RADII, route: str = "harmonic",
            function: str = "v") -> HarmonicTable:
    """v (or u with ``function="u"``) at many sites from one solve per radius.

    Convergence is not enforced here; each entry carries its extrapolation
    error instead.
    """
    radii = list(radii)
    sites = [_check_d2(s) for s in sites]
    out = {}
    for z in sites:
        w, sgn = (_reflect(z) if function == "u" else (z, 1.0))
        if max(abs(w[0]), abs(w[1])) * math.sqrt(2) >= radii[0]:
            raise ValueError(f"site {tuple(z)} too far out for radius {radii[0]}")
        if _on_slit(w):
            out[z] = Estimate(0.0, 0.0, "exact")
            continue
        vals = _v_sequence(w, radii, route)
        e = _extrapolate_v(vals, radii, route)
        out[z] = Estimate(sgn * e.value, e.error, e.mode)
    return HarmonicTable(function, {"radii": radii, "route": route}, out)


# ---------------------------------------------------------------------------
# slit corrections v_eta, u_eta


def _require_canonical(eta: Saw):
    if eta.d != 2:
        raise DimensionError("v_eta is defined on Z^2")
    if eta.k >= 1 and eta.at(1) != Site(1, 0):
        raise InvalidWalk("v_eta needs eta_1 = 1; apply canonicalize_first_step first")


@lru_cache(maxsize=8)
def _slit_eta_solution(R: float, vertices: tuple, which: str):
    dom = FiniteDomain.disk(R).without(vertices)
    s = DomainSolver(dom, ZIPPER)
    k = 1 if which == "v" else 0
    data = _circle_data(R, lambda x, y: 4 / math.pi * sqrt_branch(x, y)[k])
    return s, s.harmonic(data)


def _eta_value(eta: Saw, z, which: str, R: float) -> float:
    s, vec = _slit_eta_solution(R, eta.vertices, which)
    i = s.domain.index_of(z)
    return float(vec[i]) if i >= 0 else 0.0


def v_eta(eta: Saw, z, radii: Sequence[float] = DEFAULT_RADII, which: str = "v", tol: float = 5e-2) -> Estimate:
    """v_eta(z) = v(z) - sum_{y in eta} H^q_{Z^2 minus eta}(z, y) v(y).

    On D_R this equals the q-harmonic function on D_R minus eta that vanishes
    on eta and matches v on C_R; v on C_R is replaced by (4/pi) Im sqrt, and
    the result is extrapolated in 1/R.
    """
    _require_canonical(eta)
    z = _check_d2(z)
    if z in eta:
        return Estimate(0.0, 0.0, "exact")
    radii = list(radii)
    vals = [_eta_value(eta, z, which, R) for R in radii]
    ratio = radii[1] / radii[0] if len(radii) > 1 else 2.0
    est = richardson(vals, ratio, (1, 2))
    est = Estimate(est.value, est.error, est.mode, est.details | {"radii": radii})
    check_converged(vals, tol, f"{which}_eta{tuple(z)}", estimate=est)
    return est


def u_eta(eta: Saw, z, radii: Sequence[float] = DEFAULT_RADII, tol: float = 5e-2) -> Estimate:
    return v_eta(eta, z, radii, "u", tol)


# ---------------------------------------------------------------------------
# strip versions


def _band(*extra_sites) -> int:
    top = max((abs(s[1]) for s in extra_sites), default=0)
    return max(6, top + 3)


@lru_cache(maxsize=8)
def strip_solver(n: int, Y0: int = 6) -> TransparentStrip:
    """Factored q-solver for the strip A_n (cached)."""
    return TransparentStrip(n, ZIPPER, Y0)


def strip_slit(n: int, eta: Saw, *extra) -> tuple[TransparentStrip, SlitCorrection]:
    for s in eta.vertices:
        if abs(s[0]) >= n:
            raise ValueError(f"eta does not fit in the strip A_{n}")
    base = strip_solver(n, _band(*eta.vertices, *extra))
    return base, SlitCorrection(base, eta.vertices)


def _strip_value(n, eta, z, side):
    _require_canonical(eta)
    z = _check_d2(z)
    if z in eta:
        return 0.0
    if abs(z[0]) >= n:
        return 1.0 if tuple(z) == (side * n, 0) else 0.0
    base, slit = strip_slit(n, eta, z)
    return slit.harmonic(base.poisson_vector(side), z)


def v_eta_strip(n: int, eta: Saw, z) -> float:
    """v_eta^(n)(z) = H^q_{A_n minus eta}(z, -n)."""
    return _strip_value(n, eta, z, -1)


def u_eta_strip(n: int, eta: Saw, z) -> float:
    """u_eta^(n)(z) = H^q_{A_n minus eta}(z, +n)."""
    return _strip_value(n, eta, z, +1)
