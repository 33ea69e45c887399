"""Monte Carlo estimators built on the compiled kernels."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import InsufficientAcceptance, MaxTriesExceeded, NotConverged
from ..estimate import Estimate
from ..lattice import Saw, Site, origin
from ..linops import DomainSolver, FiniteDomain
from ..signed_field import STANDARD
from . import kernels
from .rng import RngStream

__all__ = [
    "McEstimate",
    "Grid",
    "loop_erase",
    "VARecord",
    "sample_V_A",
    "phat_A_empirical",
    "phi_estimate",
    "phi_ratio",
    "chordal_lerw_conditioned",
    "chordal_probability",
    "lerw_endpoints",
    "STEP_CAP",
]

STEP_CAP = 10**6
CHUNK = 4096


@dataclass(frozen=True)
class McEstimate:
    value: float
    standard_error: float
    n_samples: int
    n_accepted: int
    details: dict = field(default_factory=dict, compare=False)

    def to_estimate(self) -> Estimate:
        return Estimate(self.value, self.standard_error, "monte-carlo",
                        {"n_samples": self.n_samples, "n_accepted": self.n_accepted} | self.details)

    def to_dict(self) -> dict:
        return {"value": self.value, "standard_error": self.standard_error,
                "n_samples": self.n_samples, "n_accepted": self.n_accepted} | (
                    {"details": self.details} if self.details else {})


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LERW_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# grid plumbing


class Grid:
    """Flat-index view of a FiniteDomain for the kernels."""

    def __init__(self, domain: FiniteDomain):
        self.domain = domain
        self.inside = np.ascontiguousarray(domain.mask.ravel())
        st = domain.strides
        self.offsets = np.concatenate([st, -st]).astype(np.int64)
        # direction order: +e_1..+e_d, -e_1..-e_d
        self.nbits = max(1, math.ceil(math.log2(len(self.offsets))))
        self.size = self.inside.shape[0]

    def flat(self, z) -> int:
        p = self.domain._grid_pos(Site(z))
        if p is None:
            raise ValueError(f"{Site(z)} is outside the grid")
        return int(np.ravel_multi_index(p, self.domain.mask.shape))

    def site(self, f: int) -> Site:
        return Site(tuple(self.domain.coords(np.array([f]))[0]))

    def work(self) -> np.ndarray:
        w = np.empty((2, self.size), np.int64)
        w[0] = 0
        w[1] = -1
        return w

    def direction_vectors(self) -> list[Site]:
        d = self.domain.d
        e = [Site(tuple(1 if i == a else 0 for i in range(d))) for a in range(d)]
        return e + [-x for x in e]


def _run(chunk_fn: Callable, stream: RngStream, n_trials: int | None, target: int | None,
         accepted_col: int, max_trials: int, chunk: int = CHUNK):
    """Run ``chunk_fn(generator, ntrial)`` over chunks until the trial budget or
    the acceptance target is met.  Chunks are reduced in index order so the
    result is independent of the thread count."""
    threads = _threads()
    total = None
    c = 0
    done = 0
    budget = n_trials if n_trials is not None else max_trials
    with ThreadPoolExecutor(threads) as pool:
        while done < budget:
            sizes = []
            for i in range(threads):
                s = min(chunk, budget - done - sum(sizes))
                if s <= 0:
                    break
                sizes.append(s)
            futs = [pool.submit(chunk_fn, stream.generator(c + i), s) for i, s in enumerate(sizes)]
            for i, f in enumerate(futs):
                res = f.result()
                total = res.copy() if total is None else total + res
                done += sizes[i]
                if target is not None and total[accepted_col] >= target:
                    return total, True
            c += len(sizes)
    return total, target is None


# ---------------------------------------------------------------------------
# loop erasure


def loop_erase(walk: Sequence) -> list[Site]:
    """Chronological loop erasure."""
    out: list[Site] = []
    pos: dict = {}
    for s in walk:
        s = Site(s)
        p = pos.get(s)
        if p is not None:
            for q in out[p + 1:]:
                del pos[q]
            del out[p + 1:]
        else:
            pos[s] = len(out)
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# two walks from the origin: V_A and p-hat_A


@dataclass(frozen=True)
class VARecord:
    holds: bool
    exit1: Site
    exit2: Site
    eta_tilde: Saw | None
    le1: tuple
    le2: tuple


def _walk(grid: Grid, gen, start: int) -> list[int]:
    path = np.empty(STEP_CAP + 2, np.int64)
    buf = np.zeros(2, np.int64)
    L = kernels.walk_to_exit(gen, buf, grid.inside, grid.offsets, grid.nbits, start, path, STEP_CAP)
    if L < 0:
        raise MaxTriesExceeded("walk exceeded the step cap")
    return path[:L].tolist()


def sample_V_A(domain: FiniteDomain, rng: RngStream, index: int = 0) -> VARecord:
    """One draw of (S1, S2) from the origin to the boundary of ``domain``.

    V_A holds iff LE(S1[0, T1]) does not meet S2[1, T2]; then
    eta-tilde = reverse(LE(S1)) + LE(S2) with the origin at position |LE(S1)| - 1.
    """
    grid = Grid(domain)
    gen = rng.generator(index)
    o = grid.flat(origin(domain.d))
    w1 = [grid.site(f) for f in _walk(grid, gen, o)]
    w2 = [grid.site(f) for f in _walk(grid, gen, o)]
    le1 = loop_erase(w1)
    holds = not (set(le1) & set(w2[1:]))
    eta_tilde = None
    le2 = loop_erase(w2)
    if holds:
        eta_tilde = Saw(tuple(le1[::-1]) + tuple(le2[1:]), len(le1) - 1)
    return VARecord(holds, w1[-1], w2[-1], eta_tilde, tuple(le1), tuple(le2))


def _eta_arrays(grid: Grid, eta: Saw):
    minus = np.array([grid.flat(eta.at(-i)) for i in range(eta.j + 1)], np.int64)
    plus = np.array([grid.flat(eta.at(i)) for i in range(eta.k + 1)], np.int64)
    return minus, plus


def phat_A_empirical(domain: FiniteDomain, eta: Saw, rng: RngStream, n: int, a=None, b=None,
                     min_accepted: int = 100) -> McEstimate:
    """p-hat_A(eta) = P[V_A, eta < eta-tilde] / P[V_A] from n walk pairs.

    ``a``/``b`` condition on the exit points of S1/S2.  Both counts come from
    the same pairs, so the ratio is a binomial proportion among the V_A
    samples and its delta-method error is sqrt(p(1-p)/N_V).
    """
    grid = Grid(domain)
    for v in eta.vertices:
        if v not in domain:
            raise ValueError(f"{v} is not inside the domain")
    minus, plus = _eta_arrays(grid, eta)
    o = grid.flat(origin(domain.d))
    ae = grid.flat(a) if a is not None else -1
    be = grid.flat(b) if b is not None else -1

    def fn(gen, m):
        return kernels.pair_chunk(gen, grid.inside, grid.offsets, grid.nbits, o, minus, plus, ae, be,
                                  m, STEP_CAP, grid.work())

    tot, _ = _run(fn, rng, n, None, 1, n)
    trials, nv, neta, aborted = (int(x) for x in tot)
    if nv < min_accepted:
        raise InsufficientAcceptance(f"only {nv} samples in V_A (need {min_accepted})")
    p = neta / nv
    se = math.sqrt(max(p * (1 - p), 0.0) / nv)
    return McEstimate(p, se, trials, nv, {"numerator": neta, "aborted": aborted, "P[V_A]": nv / trials})


# ---------------------------------------------------------------------------
# phi_A and ratios


def phi_estimate(eta: Saw, domain: FiniteDomain, rng: RngStream, target_accepted: int | None = None,
                 n_trials: int | None = None, max_trials: int = 10**9) -> McEstimate:
    """phi_A(eta) for eta in W_{0,k}: binomial estimate of the non-intersection event."""
    if eta.j != 0:
        raise ValueError("phi_A is defined for eta in W_{0,k}")
    if (target_accepted is None) == (n_trials is None):
        raise ValueError("give exactly one of target_accepted and n_trials")
    grid = Grid(domain)
    for v in eta.vertices:
        if v not in domain:
            raise ValueError(f"{v} is not inside the domain")
    mask = np.zeros(grid.size, dtype=np.bool_)
    for v in eta.vertices:
        mask[grid.flat(v)] = True
    o = grid.flat(origin(domain.d))
    tip = grid.flat(eta.plus)

    def fn(gen, m):
        return kernels.phi_chunk(gen, grid.inside, grid.offsets, grid.nbits, o, tip, mask, m, STEP_CAP,
                                 grid.work())

    tot, reached = _run(fn, rng, n_trials, target_accepted, 1, max_trials)
    trials, acc, aborted = (int(x) for x in tot)
    if not reached:
        raise MaxTriesExceeded(f"phi: {acc} accepted in {trials} trials", acceptance_rate=acc / max(trials, 1))
    p = acc / trials
    se = math.sqrt(p * (1 - p) / trials)
    return McEstimate(p, se, trials, acc, {"aborted": aborted})


def _ratio(num: McEstimate, den: McEstimate) -> tuple[float, float]:
    if num.n_accepted == 0 or den.n_accepted == 0:
        raise InsufficientAcceptance("no accepted samples")
    r = num.value / den.value
    rel2 = (1 - num.value) / (num.n_samples * num.value) + (1 - den.value) / (den.n_samples * den.value)
    return r, abs(r) * math.sqrt(rel2)


def phi_ratio(eta: Saw, domains, rng: RngStream, target_accepted: int = 10**5, tol: float | None = None,
              baseline: dict | None = None) -> McEstimate:
    """phi_A(eta) / phi_A(0) with independent streams for numerator and baseline.

    ``domains`` is a FiniteDomain or a sequence of them (increasing); the value
    is that of the last one and ``details['sequence']`` holds all ratios.
    ``baseline`` optionally caches phi_A(0) estimates keyed by domain name.
    """
    if isinstance(domains, FiniteDomain):
        domains = [domains]
    zero = Saw((origin(eta.d),), 0)
    seq = []
    last = None
    for dom in domains:
        if eta.length == 0:
            last = McEstimate(1.0, 0.0, 0, 0, {"domain": dom.name})
            seq.append((dom.name, 1.0, 0.0))
            continue
        key = dom.name
        if baseline is not None and key in baseline:
            den = baseline[key]
        else:
            den = phi_estimate(zero, dom, rng.child(f"phi|{zero.format()}|{key}"), target_accepted)
            if baseline is not None:
                baseline[key] = den
        num = phi_estimate(eta, dom, rng.child(f"phi|{eta.format()}|{key}"), target_accepted)
        r, se = _ratio(num, den)
        seq.append((dom.name, r, se))
        last = McEstimate(r, se, num.n_samples + den.n_samples, min(num.n_accepted, den.n_accepted),
                          {"phi_eta": num.to_dict(), "phi_0": den.to_dict(), "domain": dom.name})
    if tol is not None and len(seq) >= 2:
        (_, r0, s0), (_, r1, s1) = seq[-2], seq[-1]
        if abs(r1 - r0) > tol * abs(r1) + 3 * math.hypot(s0, s1):
            raise NotConverged("phi ratio did not settle across the domain sequence", estimate=last)
    return McEstimate(last.value, last.standard_error, last.n_samples, last.n_accepted,
                      last.details | {"sequence": seq})


# ---------------------------------------------------------------------------
# chordal LERW in the strip


def _strip_grid(n: int, height_cap: int | None) -> tuple[Grid, int]:
    H = 2 * n if height_cap is None else int(height_cap)
    return Grid(FiniteDomain.strip(n, H)), H


def _h_values(grid: Grid, n: int) -> np.ndarray:
    s = DomainSolver(grid.domain, STANDARD)
    h = s.poisson_vector((n, 0))
    out = np.zeros(grid.size)
    out[grid.domain.flat] = h
    out[grid.flat((n, 0))] = 1.0
    return out


def _chordal_setup(n, height_cap, method):
    if n < 2:
        raise ValueError("strip half-width must be at least 2")
    grid, H = _strip_grid(n, height_cap)
    if method == "rejection":
        h = np.zeros(1)
    elif method == "h-transform":
        h = _h_values(grid, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return grid, H, h


def chordal_probability(n: int, eta: Saw, rng: RngStream, target_accepted: int = 10**4,
                        max_tries: int = 10**10, height_cap: int | None = None,
                        method: str = "rejection") -> McEstimate:
    """p^(n)(eta): fraction of LERWs from -n to +n in A_n through 0 that contain eta.

    A_n is truncated to |y| <= height_cap (default 2n); walks leaving through
    the caps are rejected along with those exiting anywhere but +n.
    """
    grid, H, h = _chordal_setup(n, height_cap, method)
    for v in eta.vertices:
        if v not in grid.domain:
            raise ValueError(f"{v} is not inside the strip")
    minus, plus = _eta_arrays(grid, eta)
    a, first, b = grid.flat((-n, 0)), grid.flat((-n + 1, 0)), grid.flat((n, 0))
    o = grid.flat((0, 0))
    use_h = method == "h-transform"

    def fn(gen, m):
        return kernels.chordal_chunk(gen, grid.inside, grid.offsets, grid.nbits, a, first, b, o, minus, plus,
                                     m, STEP_CAP, grid.work(), h, use_h)

    tot, reached = _run(fn, rng, None, target_accepted, 2, max_tries, chunk=CHUNK * (1 if use_h else 16))
    trials, exits, through, hits, aborted = (int(x) for x in tot)
    if not reached:
        raise MaxTriesExceeded(f"chordal LERW: {through} accepted in {trials} tries",
                               acceptance_rate=through / max(trials, 1))
    p = hits / through
    se = math.sqrt(p * (1 - p) / through)
    return McEstimate(p, se, trials, through,
                      {"exit_rate": exits / trials, "through_origin_rate": through / max(exits, 1),
                       "aborted": aborted, "height_cap": H, "method": method})


def chordal_lerw_conditioned(n: int, rng: RngStream, max_tries: int = 10**8, height_cap: int | None = None,
                             method: str = "rejection", index: int = 0) -> Saw:
    """One LERW from -n to +n in A_n conditioned to pass through 0, indexed with eta_0 = 0."""
    grid, H, h = _chordal_setup(n, height_cap, method)
    gen = rng.generator(index)
    buf = np.zeros(2, np.int64)
    lepos = np.full(grid.size, -1, np.int64)
    path = np.empty(STEP_CAP + 3, np.int64)
    a, first, b = grid.flat((-n, 0)), grid.flat((-n + 1, 0)), grid.flat((n, 0))
    o = grid.flat((0, 0))
    for tries in range(1, max_tries + 1):
        path[0] = a
        L = kernels.walk_to_exit(gen, buf, grid.inside, grid.offsets, grid.nbits, first, path[1:], STEP_CAP) \
            if method == "rejection" else _h_walk(gen, grid, h, first, path[1:])
        if L < 0 or path[L] != b:
            continue
        M = kernels.loop_erase_inplace(path, L + 1, lepos)
        verts = path[:M].tolist()
        if o in verts:
            sites = [grid.site(f) for f in verts]
            return Saw(tuple(sites), verts.index(o))
    raise MaxTriesExceeded(f"no accepted sample in {max_tries} tries", acceptance_rate=0.0)


def _h_walk(gen, grid: Grid, h: np.ndarray, start: int, path: np.ndarray) -> int:
    x = start
    path[0] = x
    L = 1
    offs = grid.offsets
    while grid.inside[x]:
        if L > STEP_CAP:
            return -1
        w = h[x + offs]
        x = x + offs[int(np.searchsorted(np.cumsum(w), gen.random() * w.sum(), side="right"))]
        path[L] = x
        L += 1
    return L


# ---------------------------------------------------------------------------
# unconditioned LERW endpoints


def lerw_endpoints(domain: FiniteDomain, rng: RngStream, n: int) -> dict:
    """Histogram of LE(S[0, T_A]) endpoints for walks from the origin."""
    grid = Grid(domain)
    o = grid.flat(origin(domain.d))
    counts: dict = {}
    path = np.empty(STEP_CAP + 2, np.int64)
    lepos = np.full(grid.size, -1, np.int64)
    done = 0
    c = 0
    while done < n:
        gen = rng.generator(c)
        buf = np.zeros(2, np.int64)
        for _ in range(min(CHUNK, n - done)):
            L = kernels.walk_to_exit(gen, buf, grid.inside, grid.offsets, grid.nbits, o, path, STEP_CAP)
            M = kernels.loop_erase_inplace(path, L, lepos)
            end = int(path[M - 1])
            counts[end] = counts.get(end, 0) + 1
            done += 1
        c += 1
    return {grid.site(f): k for f, k in sorted(counts.items())}
