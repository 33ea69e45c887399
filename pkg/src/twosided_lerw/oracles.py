"""Independent exact computations used to validate the solvers and samplers.

* ``walk_sum_green`` / ``walk_sum_poisson``: explicit sums over walks of
  bounded length (dynamic programming over lengths, exact rationals) with a
  rigorous bound on the neglected tail.
* ``exact_V_A``, ``exact_phat_A``, ``exact_phi_A``: probabilities of the
  two-walk events on small domains, summing over the possible loop-erasures
  with the product-of-Green's-functions law of a loop-erased walk.
* ``loop_erase_naive``: a quadratic reference implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .lattice import Saw, Site, origin
from .linops import DomainSolver, FiniteDomain
from .signed_field import STANDARD, WeightField, weight

__all__ = [
    "WalkSum",
    "walk_sum_green",
    "walk_sum_poisson",
    "walk_sums_from",
    "loop_erase_naive",
    "saws_to_boundary",
    "exact_V_A",
    "exact_phat_A",
    "exact_phi_A",
]


@dataclass(frozen=True)
class WalkSum:
    value: Fraction  # sum over walks with at most `length` steps
    tail: float      # bound on the absolute value of the remaining terms
    length: int


def _transfer(sites: list, field: WeightField):
    idx = {s: i for i, s in enumerate(sites)}
    Q = [dict() for _ in sites]
    for i, z in enumerate(sites):
        for w in z.neighbors():
            j = idx.get(w)
            if j is not None:
                Q[i][j] = weight(field, z, w)
    return idx, Q


def _tail_bound(sites, field, L: int) -> float:
    """sum_{m > L} || |Q|^m ||_inf via the contraction of |Q|^s, s = |A|."""
    c = _contraction(tuple(sites), field)
    if c >= 1.0:
        return math.inf
    s = len(sites)
    return s * c ** ((L + 1) // s) / (1.0 - c)


@lru_cache(maxsize=256)
def _contraction(sites: tuple, field: WeightField) -> float:
    """|| |Q|^s ||_inf with s = |A|, rounded up."""
    n = len(sites)
    _, Q = _transfer(sites, STANDARD if not field.signed else field)
    absQ = [{j: abs(v) for j, v in row.items()} for row in Q]
    # rows of |Q|^s
    P = [{i: Fraction(1)} for i in range(n)]
    for _ in range(n):
        P = [_row_times(r, absQ) for r in P]
    return math.nextafter(max((float(sum(r.values())) for r in P), default=0.0), math.inf)


def _row_times(row: dict, Q: list) -> dict:
    out: dict = {}
    for k, a in row.items():
        for j, q in Q[k].items():
            out[j] = out.get(j, 0) + a * q
    return out


def walk_sums_from(domain: FiniteDomain, field: WeightField, z, tol: float = 1e-12,
                   max_length: int = 5000) -> tuple[dict, dict, float, int]:
    """Walk sums from ``z`` to every site and every boundary point in one pass.

    Returns ``(green, poisson, tail, L)`` where ``green[w]`` sums walks
    z -> w in A of length <= L and ``poisson[b]`` sums walks z -> b whose
    earlier vertices lie in A, with at most L + 1 steps.  ``tail`` bounds
    the neglected remainder of every entry.
    """
    sites = domain.sites
    idx, Q = _transfer(sites, field)
    z = Site(z)
    bnd = domain.boundary
    into = [(b, [(idx[x], weight(field, x, b)) for x in b.neighbors() if x in idx]) for b in bnd]
    L = _choose_length(sites, field, tol, max_length)
    green = {w: Fraction(0) for w in sites}
    pois = {b: Fraction(0) for b in bnd}
    row = {idx[z]: Fraction(1)}
    for step in range(L + 1):
        if step:
            row = _row_times(row, Q)
        for i, a in row.items():
            green[sites[i]] += a
        for b, edges in into:
            pois[b] += sum((row.get(i, 0) * q for i, q in edges), Fraction(0))
    return green, pois, _tail_bound(sites, field, L), L


def walk_sum_green(domain: FiniteDomain, field: WeightField, z, w, tol: float = 1e-12,
                   max_length: int = 5000) -> WalkSum:
    """sum over walks z -> w inside A of the walk weight, truncated at a length with tail < tol."""
    z, w = Site(z), Site(w)
    if z not in domain or w not in domain:
        return WalkSum(Fraction(0), 0.0, 0)
    green, _, tail, L = walk_sums_from(domain, field, z, tol, max_length)
    return WalkSum(green[w], tail, L)


def walk_sum_poisson(domain: FiniteDomain, field: WeightField, z, b, tol: float = 1e-12,
                     max_length: int = 5000) -> WalkSum:
    """sum over walks z -> b whose vertices before b stay in A."""
    z, b = Site(z), Site(b)
    if z not in domain:
        return WalkSum(Fraction(int(z == b)), 0.0, 0)
    _, pois, tail, L = walk_sums_from(domain, field, z, tol, max_length)
    return WalkSum(pois.get(b, Fraction(0)), tail, L + 1)


def _choose_length(sites, field, tol, max_length) -> int:
    L = len(sites)
    while L < max_length and _tail_bound(sites, field, L) > tol:
        L *= 2
    return min(L, max_length)


def loop_erase_naive(walk: Sequence) -> list:
    out: list = []
    for s in walk:
        s = Site(s)
        if s in out:
            out = out[: out.index(s) + 1]
        else:
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# exact two-walk events


def saws_to_boundary(domain: FiniteDomain, start, avoid: Iterable = ()) -> list[tuple]:
    """SAWs from ``start`` whose intermediate vertices lie in A minus ``avoid`` and
    whose last vertex is the first one outside A (and not in ``avoid``)."""
    avoid = frozenset(Site(a) for a in avoid)
    start = Site(start)
    out = []

    def rec(path, seen):
        for w in path[-1].neighbors():
            if w in seen or w in avoid:
                continue
            if w in domain:
                rec(path + [w], seen | {w})
            else:
                out.append(tuple(path + [w]))

    rec([start], frozenset([start]))
    return out


class _Exact:
    """Exact Green's functions and escape probabilities on A with sites removed."""

    def __init__(self, domain: FiniteDomain):
        self.domain = domain
        self.d = domain.d
        self.p = Fraction(1, 2 * self.d)
        self._solvers: dict = {}

    def solver(self, removed: frozenset) -> DomainSolver:
        if removed not in self._solvers:
            self._solvers[removed] = DomainSolver(self.domain.without(removed), STANDARD, exact=True)
        return self._solvers[removed]

    def green(self, removed: frozenset, x) -> Fraction:
        if x in removed or x not in self.domain:
            return Fraction(0)
        return self.solver(removed).green(x, x)

    def le_prob(self, gamma: Sequence, removed: frozenset, loops_at_start: bool) -> Fraction:
        """P(LE(S) = gamma and S avoids ``removed``) for S started at gamma[0]."""
        prob = self.p ** (len(gamma) - 1)
        rem = set(removed)
        for i, x in enumerate(gamma[:-1]):
            if i == 0 and not loops_at_start:
                rem.add(x)
                continue
            prob *= self.green(frozenset(rem), x)
            rem.add(x)
        return prob

    def avoid_prob(self, start, blocked: frozenset) -> Fraction:
        """P^start(S[1, T_A] avoids ``blocked``)."""
        total = Fraction(0)
        dom = self.domain
        for w in Site(start).neighbors():
            if w in blocked:
                continue
            if w not in dom:
                total += self.p
                continue
            removed = frozenset(b for b in blocked if b in dom)
            s = self.solver(removed)
            h = s.value(s.harmonic(lambda y: 0 if y in blocked else 1), w)
            total += self.p * h
        return total


def exact_V_A(domain: FiniteDomain) -> Fraction:
    """P[V_A] = P[ LE(S1[0, T1]) does not meet S2[1, T2] ]."""
    ex = _Exact(domain)
    zero = origin(domain.d)
    total = Fraction(0)
    for g in saws_to_boundary(domain, zero):
        total += ex.le_prob(g, frozenset(), True) * ex.avoid_prob(zero, frozenset(g))
    return total


def exact_phat_A(domain: FiniteDomain, eta: Saw) -> Fraction:
    """p-hat_A(eta) = P[V_A, eta < eta-tilde] / P[V_A] with
    eta-tilde = reverse(LE(S1)) + LE(S2)."""
    ex = _Exact(domain)
    zero = origin(domain.d)
    minus = [eta.at(-i) for i in range(eta.j + 1)]
    plus = [eta.at(i) for i in range(eta.k + 1)]
    num = Fraction(0)
    for g1 in saws_to_boundary(domain, zero):
        if len(g1) < len(minus) or list(g1[: len(minus)]) != minus:
            continue
        p1 = ex.le_prob(g1, frozenset(), True)
        if p1 == 0:
            continue
        block = frozenset(g1)
        for g2 in saws_to_boundary(domain, zero, avoid=block - {zero}):
            if len(g2) < len(plus) or list(g2[: len(plus)]) != plus:
                continue
            # S2 avoids g1 after time 0, so it never returns to the origin
            removed = frozenset(b for b in block if b in domain)
            num += p1 * ex.le_prob(g2, removed, False)
    return num / exact_V_A(domain)


def exact_phi_A(domain: FiniteDomain, eta: Saw) -> Fraction:
    """phi_A(eta) for eta in W_{0,k}: S1 from eta_+ and S2 from 0 leave A without
    revisiting eta, and LE(S1) avoids S2[1, T2]."""
    if eta.j != 0:
        raise ValueError("phi_A is defined for eta in W_{0,k}")
    ex = _Exact(domain)
    zero = origin(domain.d)
    eset = frozenset(eta.vertices)
    total = Fraction(0)
    for g1 in saws_to_boundary(domain, eta.plus, avoid=eset - {eta.plus}):
        removed = frozenset(v for v in eset if v in domain)
        p1 = ex.le_prob(g1, removed, False)
        if p1 == 0:
            continue
        total += p1 * ex.avoid_prob(zero, eset | frozenset(g1))
    return total
