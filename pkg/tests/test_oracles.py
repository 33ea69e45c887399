from fractions import Fraction

import pytest

from twosided_lerw import STANDARD, ZIPPER, Saw
from twosided_lerw.linops import DomainSolver, FiniteDomain, loop_term
from twosided_lerw.oracles import (
    exact_phat_A,
    exact_phi_A,
    exact_V_A,
    loop_erase_naive,
    saws_to_boundary,
    walk_sum_green,
    walk_sum_poisson,
)

D2 = FiniteDomain.disk(2)


def test_walk_sums_tiny_domain():
    dom = FiniteDomain.from_sites([(0, 0), (1, 0)])
    # G(0,0) = 1 / (1 - 1/16) for the two-site domain
    ws = walk_sum_green(dom, STANDARD, (0, 0), (0, 0))
    assert abs(float(ws.value) - 16 / 15) <= ws.tail
    assert ws.tail < 1e-12
    p = walk_sum_poisson(dom, STANDARD, (0, 0), (-1, 0))
    assert abs(float(p.value) - (1 / 4) * 16 / 15) <= p.tail
    assert walk_sum_poisson(dom, STANDARD, (5, 5), (5, 5)).value == 1


def test_zipper_walk_sums_carry_signs():
    dom = FiniteDomain.from_sites([(1, 0), (1, -1)])
    ws = walk_sum_green(dom, ZIPPER, (1, 0), (1, -1))
    # G = -1/4 / (1 - 1/16)
    assert abs(float(ws.value) + 4 / 15) <= ws.tail
    assert DomainSolver(dom, ZIPPER, exact=True).green((1, 0), (1, -1)) == Fraction(-4, 15)


def test_saws_to_boundary():
    paths = saws_to_boundary(D2, (0, 0))
    assert len(paths) == 92
    assert all(p[-1] not in D2 and all(q in D2 for q in p[:-1]) for p in paths)


def test_loop_erase_naive():
    w = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0), (-1, 0)]
    assert loop_erase_naive(w) == [(0, 0), (-1, 0)]


def test_two_walk_identities_exact():
    # P[V_A] = G_A(0,0) phi_A(0), all exact on the 3 x 3 block
    pv = exact_V_A(D2)
    assert pv == Fraction(2711, 6272)
    phi0 = exact_phi_A(D2, Saw.of([0]))
    assert phi0 == Fraction(2711, 9408)
    assert pv == DomainSolver(D2, STANDARD, exact=True).green((0, 0), (0, 0)) * phi0


@pytest.mark.parametrize("eta, value", [
    (Saw.line(1), Fraction(1, 4)),
    (Saw.of([0, 1, 1 + 1j]), Fraction(1423, 21688)),
    (Saw.of([0, 1, 1 - 1j, -1j]), Fraction(45, 5422)),
])
def test_finite_volume_product_formula(eta, value):
    phat = exact_phat_A(D2, eta)
    assert phat == value
    F = loop_term(eta, D2, exact=True).value
    ratio = exact_phi_A(D2, eta) / exact_phi_A(D2, Saw.of([0]))
    assert phat == Fraction(1, 4) ** eta.length * F * ratio
