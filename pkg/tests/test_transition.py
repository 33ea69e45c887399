import json
import math

import numpy as np
import pytest

from twosided_lerw import SYMMETRIES, Saw
from twosided_lerw.errors import DegenerateDeterminant, NotNeighbor, SelfIntersection
from twosided_lerw.lattice import reverse, translate_to_origin
from twosided_lerw.transition import (
    MCParams,
    _det,
    dq_det,
    dq_entries_strip,
    phat_det,
    phat_green_phi,
    transition_prob_det,
    transition_prob_green,
)

SQ = math.sqrt(2) - 1
NS = (32, 64, 128)


def test_straight_line_transition():
    # PAPER: the straight-line transition probability is sqrt(2) - 1
    r = transition_prob_det(Saw.line(1), (2, 0))
    assert r.value == pytest.approx(SQ, abs=1e-4)
    assert r.error < 1e-3
    assert r.components["green_q"].value == pytest.approx(4 * SQ, rel=1e-4)


def test_straight_line_law():
    # PAPER: p-hat(eta_k) = (1/4)(sqrt 2 - 1)^(k-1)
    for k in (1, 2, 3):
        assert phat_det(Saw.line(k)).value == pytest.approx(0.25 * SQ ** (k - 1), rel=1e-4)


def test_trivial_and_invalid_inputs():
    assert transition_prob_det(Saw.of([0]), (0, 1)).value == 0.25
    with pytest.raises(NotNeighbor):
        transition_prob_det(Saw.line(1), (3, 0))
    with pytest.raises(SelfIntersection):
        transition_prob_det(Saw.line(1), (0, 0))
    with pytest.raises(DegenerateDeterminant):
        _det(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(ValueError):
        dq_entries_strip(64, Saw.of([0, 1j]))


@pytest.mark.parametrize("eta", [Saw.line(1), Saw.of([0, 1, 1 + 1j]), Saw.of([-1, 0]), Saw.of([-1j, 0, 1])])
def test_kolmogorov_consistency(eta):
    zs = [w for w in eta.plus.neighbors() if w not in eta]
    total = sum(transition_prob_det(eta, z, NS).value for z in zs)
    assert total == pytest.approx(1.0, abs=2e-3)


def test_phat_symmetries():
    eta = Saw.of([-1j, 0, 1, 1 + 1j])
    base = phat_det(eta, NS).value
    for g in SYMMETRIES:
        assert phat_det(eta.map(g), NS).value == pytest.approx(base, abs=2e-4)
    assert phat_det(reverse(eta), NS).value == pytest.approx(base, abs=2e-4)
    assert phat_det(translate_to_origin(eta), NS).value == pytest.approx(base, abs=1e-12)


def test_dq_det_modes():
    eta = Saw.line(2)
    s = dq_det(eta, "strip", n=32)
    assert s.mode == "direct" and s.value != 0
    inf = dq_det(eta, "infinite", schedule=(32, 64, 128))
    assert inf.mode == "extrapolated" and inf.value != 0


def test_transition_result_json():
    r = transition_prob_det(Saw.line(1), (2, 0), NS)
    d = json.loads(r.to_json())
    assert {"eta", "zeta", "route", "probability", "error", "components", "version"} <= set(d)
    assert d["eta"] == "(0,0);(1,0)" and d["zeta"] == "(2,0)"


def test_green_route_small_run():
    params = MCParams(radius=8, truncation_radius=None, target_accepted=20000, seed=5)
    r = transition_prob_green(Saw.line(1), (2, 0), params)
    # matched-domain value on D_8; the finite-volume bias is a few percent
    assert r.value == pytest.approx(SQ, abs=0.05)
    p = phat_green_phi(Saw.line(1), params)
    assert p.value == pytest.approx(0.25, abs=0.02)
    again = phat_green_phi(Saw.line(1), params)
    assert again.value == p.value
