"""Transition probabilities of the two-sided LERW by two independent routes.

Determinant route (Z^2 only):

    p(eta^zeta | eta) = (1/4) G^q_{Z^2 minus eta}(zeta, zeta) |D^q(eta^zeta) / D^q(eta)|

with D^q the 2x2 determinant of L^q v_eta, L^q u_eta at the two tips, for
eta_1 = 1.  Both factors are evaluated in strips A_n, n in a dyadic schedule,
and extrapolated in 1/n.

Green/phi route (any d):

    p-hat(eta) = (2d)^{-|eta|} F_eta phi(eta)

evaluated on a common disk A = D_R for F_eta and the phi_A ratio; for eta in
W_{0,k} the finite-A identity p-hat_A(eta^R) = (2d)^{-k} F_eta(A hat)
phi_A(eta) / phi_A(0) holds exactly, so only the R -> infinity limit remains.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import __version__
from .errors import DegenerateDeterminant, DimensionError, NotNeighbor, SelfIntersection
from .estimate import Estimate
from .extrapolate import richardson
from .harmonic import DEFAULT_RADII, _band, _slit_eta_solution, strip_solver
from .lattice import Saw, Site, canonicalize_first_step, concat_step, origin, translate_to_origin
from .linops import DomainSolver, FiniteDomain, SlitCorrection, green_diag_slit_plane, loop_term
from .montecarlo import RngStream, phi_ratio
from .signed_field import STANDARD, ZIPPER

__all__ = [
    "DEFAULT_STRIPS",
    "TransitionResult",
    "MCParams",
    "dq_det",
    "dq_entries_strip",
    "transition_prob_det",
    "phat_det",
    "phat_green_phi",
    "transition_prob_green",
]

DEFAULT_STRIPS = (64, 128, 256)
_DEGENERATE = 1e-10


@dataclass(frozen=True)
class TransitionResult:
    probability: Estimate
    route: str  # "determinant" or "green-phi"
    components: dict = field(default_factory=dict)
    eta: Saw | None = None
    zeta: Site | None = None

    @property
    def value(self) -> float:
        return float(self.probability.value)

    @property
    def error(self) -> float:
        return self.probability.error

    def to_dict(self) -> dict:
        comps = {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in self.components.items()}
        return {
            "eta": self.eta.format() if self.eta is not None else None,
            "zeta": repr(self.zeta) if self.zeta is not None else None,
            "route": self.route,
            "probability": float(self.probability.value),
            "error": float(self.probability.error),
            "mode": self.probability.mode,
            "components": comps,
            "version": __version__,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# D^q in the strip


def _lq_tip(slit: SlitCorrection, h: np.ndarray, tip, n: int, side: int) -> float:
    """L^q h at a tip of eta, where h vanishes: sum_w q(tip, w) h(w)."""
    target = (side * n, 0)
    total = 0.0
    for w in Site(tip).neighbors():
        q = float(ZIPPER.weight(tip, w))
        total += q * slit.harmonic(h, w, outside=lambda z: 1.0 if tuple(z) == target else 0.0)
    return total


def dq_entries_strip(n: int, eta: Saw, band: int | None = None) -> np.ndarray:
    """[[L^q v(eta_-), L^q v(eta_+)], [L^q u(eta_-), L^q u(eta_+)]] for the strip A_n."""
    _check_canonical(eta)
    band = band if band is not None else _band(*eta.vertices)
    return _dq_entries_cached(n, eta, band).copy()


@lru_cache(maxsize=4096)
def _dq_entries_cached(n: int, eta: Saw, band: int) -> np.ndarray:
    for s in eta.vertices:
        if abs(s[0]) >= n - 1:
            raise ValueError(f"eta does not fit in A_{n}")
    base = strip_solver(n, band)
    slit = SlitCorrection(base, eta.vertices)
    hv, hu = base.poisson_vector(-1), base.poisson_vector(+1)
    return np.array([
        [_lq_tip(slit, hv, eta.minus, n, -1), _lq_tip(slit, hv, eta.plus, n, -1)],
        [_lq_tip(slit, hu, eta.minus, n, +1), _lq_tip(slit, hu, eta.plus, n, +1)],
    ])


def _det(m: np.ndarray) -> float:
    d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0])
    if scale == 0.0 or abs(d) <= _DEGENERATE * scale:
        raise DegenerateDeterminant(f"D^q vanishes to working precision (entries {m.ravel().tolist()})")
    return float(d)


def _check_canonical(eta: Saw):
    if eta.d != 2:
        raise DimensionError("the determinant route lives on Z^2")
    if eta.k < 1 or eta.at(1) != Site(1, 0):
        raise ValueError("D^q needs eta_1 = 1; apply canonicalize_first_step first")


def _lq_tip_disk(solver, vec, tip) -> float:
    total = 0.0
    for w in Site(tip).neighbors():
        i = solver.domain.index_of(w)
        if i >= 0:
            total += float(ZIPPER.weight(tip, w)) * vec[i]
    return total


def dq_det(eta: Saw, mode: str = "strip", n: int | None = None, schedule: Sequence[int] | None = None) -> Estimate:
    """D^q(eta) for canonical eta (eta_1 = 1).

    ``mode="strip"`` returns D^q_n at a single half-width ``n`` (default 64);
    its normalisation is n-dependent and cancels in ratios.
    ``mode="infinite"`` builds v_eta, u_eta on disks D_R (radii from
    ``schedule``) and extrapolates the determinant in 1/R.
    """
    _check_canonical(eta)
    if mode == "strip":
        n = 64 if n is None else n
        m = dq_entries_strip(n, eta)
        return Estimate(_det(m), 0.0, "direct", {"n": n, "entries": m.tolist()})
    if mode == "infinite":
        radii = list(schedule or DEFAULT_RADII)
        dets = []
        for R in radii:
            sv, vv = _slit_eta_solution(R, eta.vertices, "v")
            su, vu = _slit_eta_solution(R, eta.vertices, "u")
            m = np.array([[_lq_tip_disk(sv, vv, eta.minus), _lq_tip_disk(sv, vv, eta.plus)],
                          [_lq_tip_disk(su, vu, eta.minus), _lq_tip_disk(su, vu, eta.plus)]])
            dets.append(_det(m))
        est = richardson(dets, radii[1] / radii[0] if len(radii) > 1 else 2.0, (1, 2))
        return Estimate(est.value, est.error, est.mode, est.details | {"radii": radii})
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# determinant-route transition probabilities


def _prepare(eta: Saw, zeta) -> tuple[Saw, Site, dict]:
    """Map (eta, zeta) to an equivalent pair with eta_1 = 1."""
    zeta = Site(zeta)
    if eta.d != 2:
        raise DimensionError("the determinant route lives on Z^2")
    if eta.plus.l1(zeta) != 1:
        raise NotNeighbor(f"{zeta} is not a neighbour of eta_+ = {eta.plus}")
    if zeta in eta:
        raise SelfIntersection(f"{zeta} lies on eta")
    info = {}
    work = eta
    if eta.k == 0:
        # no eta_1: use translation invariance, eta -> eta^o
        shift = eta.minus
        work = translate_to_origin(eta)
        zeta = zeta - shift
        info["translated_by"] = repr(-shift)
    canon, g = canonicalize_first_step(work)
    info["symmetry"] = repr(g)
    return canon, g(zeta), info


def _strip_sequences(eta: Saw, zeta: Site, ns: Sequence[int]):
    gs, ratios = [], []
    ext = concat_step(eta, zeta)
    band = _band(*ext.vertices)
    for n in ns:
        base = strip_solver(n, band)
        g = SlitCorrection(base, eta.vertices).green(zeta, zeta)
        d0 = _det(dq_entries_strip(n, eta, band))
        d1 = _det(dq_entries_strip(n, ext, band))
        gs.append(g)
        ratios.append(abs(d1 / d0))
    return gs, ratios


def transition_prob_det(eta: Saw, zeta, ns: Sequence[int] = DEFAULT_STRIPS, green_source: str = "strip",
                        radii: Sequence[int] = DEFAULT_RADII) -> TransitionResult:
    """p(eta^zeta | eta) from the signed-weight determinant formula.

    ``green_source="disk"`` takes G^q from disks D_R instead of the strips.
    """
    zeta = Site(zeta)
    if eta.length == 0:
        if zeta.l1() != 1:
            raise NotNeighbor(f"{zeta} is not a neighbour of the origin")
        return TransitionResult(Estimate(0.25, 0.0, "exact"), "determinant", {}, eta, zeta)
    canon, z, info = _prepare(eta, zeta)
    ns = list(ns)
    gs, ratios = _strip_sequences(canon, z, ns)
    ratio = ns[1] / ns[0] if len(ns) > 1 else 2.0
    if green_source == "strip":
        g_est = richardson(gs, ratio, (1, 2))
    elif green_source == "disk":
        g_est = green_diag_slit_plane(canon, ZIPPER, z, radii)
    else:
        raise ValueError(f"unknown green_source {green_source!r}")
    r_est = richardson(ratios, ratio, (1, 2))
    prob = 0.25 * (g_est * r_est)
    prob = Estimate(prob.value, prob.error, "extrapolated" if len(ns) > 1 else "direct")
    comps = {
        "green_q": g_est,
        "dq_ratio": r_est,
        "strips": ns,
        "green_q_sequence": gs,
        "dq_ratio_sequence": ratios,
        "canonical_eta": canon.format(),
        "canonical_zeta": repr(z),
    } | info
    return TransitionResult(prob, "determinant", comps, eta, zeta)


def phat_det(eta: Saw, ns: Sequence[int] = DEFAULT_STRIPS) -> Estimate:
    """p-hat(eta) = (1/4) prod_{j=1}^{k-1} p([0..eta_j], eta_{j+1}) on the translated walk."""
    if eta.d != 2:
        raise DimensionError("the determinant route lives on Z^2")
    if eta.length == 0:
        return Estimate(1.0, 0.0, "exact")
    if eta.length == 1:
        return Estimate(0.25, 0.0, "exact")
    walk = translate_to_origin(eta)
    canon, _ = canonicalize_first_step(walk)
    ns = list(ns)
    ratio = ns[1] / ns[0] if len(ns) > 1 else 2.0
    band = _band(*canon.vertices)
    # per strip: D^q of every prefix and G^q at every next vertex
    steps = []
    for n in ns:
        base = strip_solver(n, band)
        dets = [_det(dq_entries_strip(n, canon.prefix(m), band)) for m in range(1, canon.k + 1)]
        seq = []
        for m in range(1, canon.k):
            g = SlitCorrection(base, canon.prefix(m).vertices).green(canon.at(m + 1), canon.at(m + 1))
            seq.append(0.25 * g * abs(dets[m] / dets[m - 1]))
        steps.append(seq)
    factors = [richardson([steps[i][m] for i in range(len(ns))], ratio, (1, 2)) for m in range(canon.k - 1)]
    value = 0.25 * math.prod(float(f.value) for f in factors)
    rel = math.sqrt(sum(f.rel_error ** 2 for f in factors))
    return Estimate(value, abs(value) * rel, "extrapolated" if len(ns) > 1 else "direct",
                    {"steps": [f.to_dict() for f in factors], "strips": ns, "canonical_eta": canon.format()})


# ---------------------------------------------------------------------------
# Green / phi route


@dataclass(frozen=True)
class MCParams:
    """Monte Carlo settings for the Green/phi route.

    The disk D_radius is the matched domain; D_truncation_radius gives the
    finite-volume correction estimate |p_R - p_R'|.
    """

    radius: float = 16
    truncation_radius: float | None = 8
    target_accepted: int = 10**5
    seed: int = 0
    stream_id: int = 0

    def stream(self) -> RngStream:
        return RngStream(self.seed, self.stream_id)


def _one_sided(eta: Saw) -> Saw:
    return translate_to_origin(eta)


def _green_phi_at(walk: Saw, R: float, params: MCParams, baseline: dict, stream: RngStream):
    dom = FiniteDomain.disk(R, walk.d)
    F = loop_term(walk, dom)
    r = phi_ratio(walk, dom, stream, params.target_accepted, baseline=baseline)
    pref = (1.0 / (2 * walk.d)) ** walk.length
    value = pref * float(F.value) * r.value
    return value, pref * float(F.value) * r.standard_error, F, r


def phat_green_phi(eta: Saw, params: MCParams = MCParams(), baseline: dict | None = None) -> TransitionResult:
    """p-hat(eta) = (2d)^{-|eta|} F_eta phi(eta) on matched disks.

    Uses eta^o in W_{0,k} (translation invariance) and the exact finite-A
    identity for the reversed walk (reversal invariance of the limit).
    """
    if eta.length == 0:
        return TransitionResult(Estimate(1.0, 0.0, "exact"), "green-phi", {"F": 1.0, "phi_ratio": 1.0}, eta)
    walk = _one_sided(eta)
    baseline = {} if baseline is None else baseline
    stream = params.stream()
    val, se, F, r = _green_phi_at(walk, params.radius, params, baseline, stream)
    comps = {"F": F, "phi_ratio": r.to_estimate(), "radius": params.radius, "walk": walk.format()}
    trunc = 0.0
    if params.truncation_radius:
        v2, se2, _, _ = _green_phi_at(walk, params.truncation_radius, params, baseline, stream)
        trunc = abs(val - v2)
        comps["truncation"] = {"radius": params.truncation_radius, "value": v2, "standard_error": se2}
    comps["standard_error"] = se
    comps["truncation_error"] = trunc
    prob = Estimate(val, math.hypot(se, trunc), "monte-carlo")
    return TransitionResult(prob, "green-phi", comps, eta)


def transition_prob_green(eta: Saw, zeta, params: MCParams = MCParams(), baseline: dict | None = None,
                          ) -> TransitionResult:
    """(1/2d) G_{A minus eta}(zeta, zeta) phi_A(eta^zeta) / phi_A(eta) on matched disks A = D_R.

    The error combines the Monte Carlo standard error with |p_R - p_R'|.
    """
    zeta = Site(zeta)
    if eta.plus.l1(zeta) != 1:
        raise NotNeighbor(f"{zeta} is not a neighbour of eta_+ = {eta.plus}")
    if zeta in eta:
        raise SelfIntersection(f"{zeta} lies on eta")
    shift = eta.minus
    walk = _one_sided(eta)
    z = zeta - shift
    ext = concat_step(walk, z)
    baseline = {} if baseline is None else baseline
    stream = params.stream()

    def at(R):
        dom = FiniteDomain.disk(R, walk.d)
        g = DomainSolver(dom.without(walk.vertices), STANDARD).green(z, z)
        num = phi_ratio(ext, dom, stream, params.target_accepted, baseline=baseline)
        den = phi_ratio(walk, dom, stream, params.target_accepted, baseline=baseline)
        pref = 1.0 / (2 * walk.d)
        if walk.length == 0:
            r, rel = num.value, num.standard_error / num.value
        else:
            a, b = num.details["phi_eta"], den.details["phi_eta"]
            pa, pb = a["value"], b["value"]
            r = pa / pb
            rel = math.sqrt((1 - pa) / (a["n_samples"] * pa) + (1 - pb) / (b["n_samples"] * pb))
        return pref * g * r, pref * g * r * rel, g, r

    val, se, g, r = at(params.radius)
    comps = {"green": g, "phi_ratio": r, "radius": params.radius}
    trunc = 0.0
    if params.truncation_radius:
        v2, se2, _, _ = at(params.truncation_radius)
        trunc = abs(val - v2)
        comps["truncation"] = {"radius": params.truncation_radius, "value": v2, "standard_error": se2}
    comps["standard_error"] = se
    comps["truncation_error"] = trunc
    return TransitionResult(Estimate(val, math.hypot(se, trunc), "monte-carlo"), "green-phi", comps, eta, zeta)
