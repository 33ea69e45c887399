import math
from fractions import Fraction

import pytest

from twosided_lerw import Saw
from twosided_lerw.errors import DimensionError, DivideByZero, InvalidWalk
from twosided_lerw.harmonic import (
    escape_prob,
    f_R,
    pi_over_4_diagnostic,
    slit_disk,
    u,
    u_eta_strip,
    v,
    v_eta,
    v_eta_strip,
    v_table,
)
from twosided_lerw.oracles import walk_sums_from
from twosided_lerw.signed_field import STANDARD


def test_escape_prob_exact_value():
    # DERIVED: exact rational Dirichlet solve on the slit disk of radius 2
    assert escape_prob((-1, 0), 2, exact=True) == Fraction(64, 97)
    assert escape_prob((-1, 0), 2) == pytest.approx(64 / 97, abs=1e-14)


def test_escape_prob_against_walk_sums():
    dom = slit_disk(2)
    _, pois, tail, _ = walk_sums_from(dom, STANDARD, (-1, 0))
    outer = sum(float(p) for b, p in pois.items() if b[0] ** 2 + b[1] ** 2 >= 4)
    assert abs(outer - 64 / 97) <= tail + 1e-13


def test_escape_prob_edge_cases():
    assert escape_prob((3, 0), 10) == 0.0
    assert escape_prob((0, 0), 10, exact=True) == 0
    with pytest.raises(ValueError):
        escape_prob((0, 10), 10)
    with pytest.raises(DimensionError):
        escape_prob((0, 1, 0), 10)
    with pytest.raises(DivideByZero):
        pi_over_4_diagnostic((2, 0), 16)


def test_v_vanishes_on_positive_axis():
    for x in range(0, 4):
        assert v((x, 0)).value == 0.0
    assert f_R((1, 0), 32) == 0.0


def test_v_routes_agree():
    h = v((-1, 0))
    e = v((-1, 0), route="escape", radii=(64, 128, 256))
    assert h.value == pytest.approx(1.02703, abs=2e-4)
    assert abs(h.value - e.value) <= 3 * (h.error + e.error) + 1e-3


def test_u_is_reflected_v():
    assert u((1, 0)).value == pytest.approx(v((-1, 0)).value)
    assert u((-3, 0)).value == 0.0
    assert u((2, -1)).value == pytest.approx(-v((-2, -1)).value)


def test_v_is_harmonic_off_the_slit():
    sites = [(-3, 2), (-2, 2), (-4, 2), (-3, 3), (-3, 1)]
    t = v_table(sites)
    lap = 0.25 * sum(t[s].value for s in sites[1:]) - t[sites[0]].value
    assert abs(lap) < 1e-5


def test_v_close_to_asymptotic_form():
    z = (-8, 5)
    val = v(z).value
    r = math.hypot(*z)
    th = math.atan2(z[1], z[0]) % (2 * math.pi)
    assert val == pytest.approx(4 / math.pi * math.sqrt(r) * math.sin(th / 2), rel=2e-2)


def test_pi_over_4_diagnostic_decreases():
    errs = [abs(pi_over_4_diagnostic((-1, 0), R) - math.pi / 4) for R in (32, 64, 128)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-3


def test_v_eta_vanishes_on_eta_and_needs_canonical_walk():
    eta = Saw.line(2)
    assert v_eta(eta, (1, 0)).value == 0.0
    assert v_eta(eta, (-2, 1), radii=(32, 64, 128)).value > 0
    with pytest.raises(InvalidWalk):
        v_eta(Saw.of([0, 1j]), (-2, 0))


def test_strip_functions():
    eta = Saw.line(1)
    assert v_eta_strip(32, eta, (1, 0)) == 0.0
    assert v_eta_strip(32, eta, (-32, 0)) == 1.0
    assert u_eta_strip(32, eta, (32, 0)) == 1.0
    vals = [n ** 1.5 * v_eta_strip(n, eta, (-2, 0)) for n in (32, 64, 128)]
    assert abs(vals[2] / vals[1] - 1) < 0.05
