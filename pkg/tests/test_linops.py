from fractions import Fraction

import numpy as np
import pytest

from twosided_lerw import STANDARD, ZIPPER, Saw
from twosided_lerw.errors import Singular
from twosided_lerw.linops import (
    DomainSolver,
    FiniteDomain,
    SlitCorrection,
    TransparentStrip,
    _ExactLU,
    exact_det,
    green,
    green_diag_slit_plane,
    laplacian_apply,
    loop_term,
    loop_term_det,
    poisson,
)
from twosided_lerw.oracles import walk_sums_from

D2 = FiniteDomain.disk(2)  # the 3 x 3 block around the origin


def test_domains():
    assert len(D2) == 9
    assert (0, 0) in D2 and (2, 0) not in D2
    assert set(D2.boundary) == {(x, y) for x in range(-2, 3) for y in range(-2, 3)
                                if max(abs(x), abs(y)) == 2 and min(abs(x), abs(y)) < 2}
    s = FiniteDomain.slit_square(3)
    assert (1, 0) not in s and (-1, 0) in s and (0, 0) not in s
    assert (0, 0) not in D2.without([(0, 0)])


# exact rationals frozen from the walk-sum enumeration oracle
def test_exact_green_d2():
    s = DomainSolver(D2, STANDARD, exact=True)
    assert s.green((0, 0), (0, 0)) == Fraction(3, 2)
    assert s.green((1, 0), (1, 0)) == Fraction(37, 28)
    assert s.green((1, -1), (1, 0)) == Fraction(11, 28)
    q = DomainSolver(D2, ZIPPER, exact=True)
    assert q.green((0, 0), (0, 0)) == Fraction(97, 67)
    assert q.green((1, 0), (1, 0)) == Fraction(8288, 6499)
    assert q.green((1, -1), (1, 0)) == Fraction(-30, 97)


@pytest.mark.parametrize("field", [STANDARD, ZIPPER])
def test_float_solver_matches_walk_sums(field):
    dom = FiniteDomain.from_sites([(x, y) for x in range(0, 3) for y in (-1, 0)])
    s = DomainSolver(dom, field)
    g, p, tail, _ = walk_sums_from(dom, field, (1, 0))
    for w in dom.sites:
        assert abs(s.green((1, 0), w) - float(g[w])) <= tail + 1e-14
    for b in dom.boundary:
        assert abs(s.poisson((1, 0), b) - float(p[b])) <= tail + 1e-14


def test_green_symmetry_and_laplacian():
    dom = FiniteDomain.disk(6)
    s = DomainSolver(dom, STANDARD)
    assert s.green((1, 2), (-3, 0)) == pytest.approx(s.green((-3, 0), (1, 2)), abs=1e-13)
    # (I - P) G(., w) = delta_w
    col = lambda z: s.green(z, (1, 1))
    assert -laplacian_apply(STANDARD, col, (1, 1)) == pytest.approx(1.0)
    assert laplacian_apply(STANDARD, col, (2, 1)) == pytest.approx(0.0, abs=1e-13)


def test_harmonic_measure_sums_to_one():
    dom = FiniteDomain.disk(5)
    s = DomainSolver(dom, STANDARD)
    total = sum(s.poisson((1, -2), b) for b in dom.boundary)
    assert total == pytest.approx(1.0, abs=1e-12)
    assert poisson(dom, STANDARD, (0, 0), (5, 0)) == pytest.approx(s.poisson((0, 0), (5, 0)))
    assert green(dom, STANDARD, (0, 0), (0, 0)) == pytest.approx(s.green((0, 0), (0, 0)))


def test_exact_det():
    assert exact_det([[Fraction(1, 2), 1], [3, 4]]) == Fraction(-1)
    assert exact_det([[0, 1], [1, 0]]) == -1
    m = np.random.default_rng(1).integers(-5, 6, (5, 5))
    assert float(exact_det(m.tolist())) == pytest.approx(np.linalg.det(m), rel=1e-9)


def test_singular_systems_raise():
    with pytest.raises(Singular):
        _ExactLU([{0: 1, 1: 1}, {0: 1, 1: 1}])
    base = DomainSolver(FiniteDomain.disk(4), STANDARD)
    with pytest.raises(Singular):
        SlitCorrection(base, [(0, 0), (0, 0)])


@pytest.mark.parametrize("field", [STANDARD, ZIPPER])
def test_transparent_strip_matches_tall_strip(field):
    T = TransparentStrip(16, field, 6)
    S = DomainSolver(FiniteDomain.strip(16, 200), field)
    for z, w in [((2, 0), (2, 0)), ((2, 0), (-3, 1)), ((5, -2), (0, 4))]:
        assert T.green_column(w)[T.index_of(z)] == pytest.approx(S.green(z, w), abs=1e-12)


def test_slit_correction_matches_direct_solve():
    base = DomainSolver(FiniteDomain.disk(10), ZIPPER)
    removed = [(0, 0), (1, 0), (1, 1)]
    corr = SlitCorrection(base, removed)
    direct = DomainSolver(FiniteDomain.disk(10).without(removed), ZIPPER)
    for z in [(2, 1), (-1, -1), (0, 3)]:
        assert corr.green(z, z) == pytest.approx(direct.green(z, z), abs=1e-12)
    assert corr.green((1, 0), (2, 0)) == 0.0


def test_loop_term_identity_exact():
    dom = FiniteDomain.disk(3)
    for eta in [Saw.line(2), Saw.of([-1j, 0, 1, 1 + 1j]), Saw.of([0, 1j, -1 + 1j])]:
        fwd = loop_term(eta, dom, exact=True).value
        assert fwd == loop_term(eta, dom, order="reverse", exact=True).value
        assert fwd == loop_term_det(eta, dom, exact=True)
        assert isinstance(fwd, Fraction)


def test_green_diag_slit_plane_converges():
    est = green_diag_slit_plane(Saw.line(1), ZIPPER, (2, 0), (32, 64, 128), tol=5e-2)
    assert est.value == pytest.approx(4 * (2 ** 0.5 - 1), rel=2e-3)
    with pytest.raises(ValueError):
        green_diag_slit_plane(Saw.line(1), ZIPPER, (1, 0))
