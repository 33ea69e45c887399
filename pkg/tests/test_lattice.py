import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twosided_lerw import SYMMETRIES, Saw, Site
from twosided_lerw.errors import InvalidWalk, NoForwardStep, NotNeighbor, SelfIntersection
from twosided_lerw.lattice import (
    Symmetry,
    canonicalize_first_step,
    concat_step,
    enumerate_saws,
    is_prefix,
    reverse,
    symmetry_classes,
    translate_to_origin,
)


def test_site_arithmetic():
    a = Site(1, 2)
    assert a + (1, -1) == Site(2, 1)
    assert -a == Site(-1, -2)
    assert a.l1() == 3 and a.norm2() == 5
    assert Site.from_complex(2 - 1j) == Site(2, -1)
    assert sorted(Site(0, 0).neighbors()) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert repr(Site(-1, 0)) == "(-1,0)"


def test_parse_and_format_roundtrip():
    eta = Saw.parse("(-1,0);(0,0);(1,0);(1,1)")
    assert eta.j == 1 and eta.k == 2
    assert eta.minus == (-1, 0) and eta.plus == (1, 1)
    assert Saw.parse(eta.format()) == eta


def test_invalid_walks():
    with pytest.raises(NotNeighbor):
        Saw.of([0, 2])
    with pytest.raises(SelfIntersection):
        Saw.of([0, 1, 1 + 1j, 1j, 0])
    with pytest.raises(InvalidWalk):
        Saw.of([1, 2])


def test_concat_step():
    assert concat_step(Saw.of([0]), (1, 0)) == Saw.of([0, 1])
    assert concat_step(Saw.of([0, 1]), (2, 0)) == Saw.line(2)
    with pytest.raises(SelfIntersection):
        concat_step(Saw.of([0, 1]), (0, 0))
    with pytest.raises(NotNeighbor):
        concat_step(Saw.of([0, 1]), (3, 0))


def test_reverse_and_translate():
    r = reverse(Saw.of([0, 1]))
    assert r.vertices == ((1, 0), (0, 0)) and r.origin_index == 1
    assert reverse(Saw.of([-1j, 0, 1])).vertices == ((1, 0), (0, 0), (0, -1))
    assert translate_to_origin(Saw.of([-1, 0])) == Saw.of([0, 1])
    t = translate_to_origin(Saw.of([-1j, 0, 1]))
    assert t == Saw.of([0, 1j, 1 + 1j], 0)


def test_is_prefix():
    assert is_prefix(Saw.of([0]), Saw.line(3))
    assert is_prefix(Saw.of([0, 1]), Saw.of([-1, 0, 1, 1 + 1j]))
    assert not is_prefix(Saw.of([0, 1j]), Saw.line(2))


def test_canonicalize_first_step():
    eta, g = canonicalize_first_step(Saw.of([0, 1j]))
    assert eta == Saw.of([0, 1]) and g == Symmetry(3)
    eta, g = canonicalize_first_step(Saw.of([0, -1, -1 + 1j]))
    assert eta.at(1) == (1, 0) and g.rotation == 2
    with pytest.raises(NoForwardStep):
        canonicalize_first_step(Saw.of([-1, 0]))


def test_symmetry_group():
    assert len(set(SYMMETRIES)) == 8
    for g in SYMMETRIES:
        assert g.compose(g.inverse()).is_identity
        for h in SYMMETRIES:
            z = Site(2, 1)
            assert g.compose(h)(z) == g(h(z))


def test_enumeration_counts():
    # SAWs through 0 with at most 2 edges: 1 + 4 + (12 one-sided + 12 two-sided)
    saws = enumerate_saws(2)
    assert sum(s.length == 0 for s in saws) == 1
    assert sum(s.length == 1 for s in saws) == 8
    assert sum(s.length == 2 for s in saws) == 36
    assert len(enumerate_saws(3, one_sided=True)) == 1 + 4 + 12 + 36
    assert len(symmetry_classes(enumerate_saws(1))) == 3


@st.composite
def saws(draw, max_len=8):
    steps = draw(st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1)]), max_size=max_len))
    path = [Site(0, 0)]
    for s in steps:
        nxt = path[-1] + s
        if nxt in path:
            break
        path.append(nxt)
    shift = draw(st.integers(0, len(path) - 1))
    base = path[shift]
    return Saw(tuple(p - base for p in path), shift)


@settings(max_examples=200, deadline=None)
@given(saws(), st.sampled_from(SYMMETRIES))
def test_invariants(eta, g):
    assert reverse(reverse(eta)) == eta
    t = translate_to_origin(eta)
    assert translate_to_origin(t) == t
    assert eta.map(g).map(g.inverse()) == eta
    for z in eta.plus.neighbors():
        if z not in eta:
            assert concat_step(eta, z).prefix(eta.k) == eta
