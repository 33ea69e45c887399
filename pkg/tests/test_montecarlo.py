from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twosided_lerw import Saw, Site
from twosided_lerw.errors import MaxTriesExceeded
from twosided_lerw.linops import DomainSolver, FiniteDomain
from twosided_lerw.montecarlo import (
    RngStream,
    chordal_lerw_conditioned,
    chordal_probability,
    lerw_endpoints,
    loop_erase,
    phat_A_empirical,
    phi_estimate,
    phi_ratio,
    sample_V_A,
)
from twosided_lerw.oracles import loop_erase_naive
from twosided_lerw.signed_field import STANDARD

D2 = FiniteDomain.disk(2)


def within(est, exact, k=4.0):
    return abs(est.value - float(exact)) <= k * est.standard_error


def test_streams_are_reproducible_and_distinct():
    a = RngStream(7, 1).generator(3).integers(0, 2**62, 5)
    b = RngStream(7, 1).generator(3).integers(0, 2**62, 5)
    c = RngStream(7, 2).generator(3).integers(0, 2**62, 5)
    d = RngStream(7, 1).child("x").generator(3).integers(0, 2**62, 5)
    assert (a == b).all() and not (a == c).all() and not (a == d).all()
    with pytest.raises(ValueError):
        RngStream(-1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1)]), max_size=60))
def test_loop_erasure_matches_naive(steps):
    walk = [Site(0, 0)]
    for s in steps:
        walk.append(walk[-1] + s)
    le = loop_erase(walk)
    assert le == loop_erase_naive(walk)
    assert len(set(le)) == len(le) and le[0] == walk[0] and le[-1] == walk[-1]


# exact values on the 3 x 3 block come from the enumeration oracle (tests/test_oracles.py)
def test_phat_empirical_matches_exact_oracle():
    rng = RngStream(11)
    est = phat_A_empirical(D2, Saw.of([0, 1, 1 + 1j]), rng, 200000)
    assert within(est, Fraction(1423, 21688))
    assert est.details["P[V_A]"] == pytest.approx(2711 / 6272, abs=0.01)
    assert within(phat_A_empirical(D2, Saw.line(1), rng.child("b"), 100000), Fraction(1, 4))


def test_phi_estimates_match_exact_oracle():
    rng = RngStream(3)
    assert within(phi_estimate(Saw.line(1), D2, rng, n_trials=200000), Fraction(2711, 10864))
    assert within(phi_estimate(Saw.of([0]), D2, rng.child("0"), n_trials=200000), Fraction(2711, 9408))
    r = phi_ratio(Saw.line(1), D2, rng, target_accepted=20000)
    assert abs(r.value - 9408 / 10864) <= 4 * r.standard_error
    with pytest.raises(ValueError):
        phi_estimate(Saw.of([-1, 0]), D2, rng, n_trials=10)


def test_thread_count_does_not_change_results(monkeypatch):
    dom = FiniteDomain.disk(6)
    eta = Saw.line(2)
    monkeypatch.setenv("LERW_THREADS", "1")
    a = phi_estimate(eta, dom, RngStream(5), target_accepted=3000)
    monkeypatch.setenv("LERW_THREADS", "3")
    b = phi_estimate(eta, dom, RngStream(5), target_accepted=3000)
    assert a == b


def test_sample_V_A_record():
    rec = sample_V_A(FiniteDomain.disk(5), RngStream(2), index=4)
    assert rec.exit1 not in FiniteDomain.disk(5)
    if rec.holds:
        assert rec.eta_tilde.at(0) == (0, 0)
        assert rec.eta_tilde.minus == rec.exit1 and rec.eta_tilde.plus == rec.exit2
    assert sample_V_A(FiniteDomain.disk(5), RngStream(2), index=4) == rec


def test_chordal_samples_pass_through_origin():
    for i in range(5):
        s = chordal_lerw_conditioned(6, RngStream(9), index=i)
        assert s.at(0) == (0, 0)
        assert s.minus == (-6, 0) and s.plus == (6, 0)
    with pytest.raises(MaxTriesExceeded):
        chordal_lerw_conditioned(30, RngStream(9), max_tries=2)


def test_chordal_samplers_agree():
    a = chordal_probability(6, Saw.line(1), RngStream(1), target_accepted=3000)
    b = chordal_probability(6, Saw.line(1), RngStream(2), target_accepted=3000, method="h-transform")
    assert abs(a.value - b.value) <= 4 * np.hypot(a.standard_error, b.standard_error)


def test_lerw_endpoints_follow_harmonic_measure():
    dom = FiniteDomain.disk(4)
    counts = lerw_endpoints(dom, RngStream(4), 20000)
    assert sum(counts.values()) == 20000
    assert set(counts) <= set(dom.boundary)
    s = DomainSolver(dom, STANDARD)
    for b, k in counts.items():
        p = s.poisson((0, 0), b)
        assert abs(k / 20000 - p) <= 5 * np.sqrt(p * (1 - p) / 20000) + 1e-4
