from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twosided_lerw import STANDARD, ZIPPER, WeightField
from twosided_lerw.errors import DimensionError, NotLoop, NotNeighbor
from twosided_lerw.signed_field import cut_crossings, walk_weight, weight, winding_parity


def test_standard_weights():
    assert weight(STANDARD, (0, 0), (1, 0)) == Fraction(1, 4)
    assert weight(STANDARD, (0, 0, 0), (0, 0, 1)) == Fraction(1, 6)


def test_zipper_edges():
    assert ZIPPER((1, 0), (1, -1)) == Fraction(-1, 4)
    assert ZIPPER((3, -1), (3, 0)) == Fraction(-1, 4)
    assert ZIPPER((0, 0), (0, -1)) == Fraction(1, 4)
    assert ZIPPER((1, 0), (2, 0)) == Fraction(1, 4)
    assert ZIPPER((1, -1), (1, -2)) == Fraction(1, 4)


def test_errors():
    with pytest.raises(NotNeighbor):
        weight(STANDARD, (0, 0), (1, 1))
    with pytest.raises(DimensionError):
        weight(ZIPPER, (1, 0, 0), (1, 0, 1))
    with pytest.raises(NotLoop):
        winding_parity([(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        WeightField.parse("bogus")


def test_vectorised_weights_match_scalar():
    rng = np.random.default_rng(0)
    x1 = rng.integers(-3, 4, 200)
    y1 = rng.integers(-3, 4, 200)
    d = rng.integers(0, 4, 200)
    dx = np.array([1, -1, 0, 0])[d]
    dy = np.array([0, 0, 1, -1])[d]
    w = ZIPPER.weights(x1, y1, x1 + dx, y1 + dy)
    for i in range(200):
        assert w[i] == float(ZIPPER((x1[i], y1[i]), (x1[i] + dx[i], y1[i] + dy[i])))


def test_winding():
    loop = [(1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)]
    assert winding_parity(loop) == -1
    assert cut_crossings(loop) == -1
    assert cut_crossings(list(reversed(loop))) == 1
    small = [(2, 1), (3, 1), (3, 0), (2, 0), (2, 1)]  # does not enclose the origin
    assert winding_parity(small) == 1
    assert walk_weight(ZIPPER, loop) == Fraction(-1, 4**8)
    assert walk_weight(STANDARD, [(0, 0)]) == 1


@given(st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1)]), max_size=30))
def test_parity_is_sign_of_weight(steps):
    path = [(0, 0)]
    for dx, dy in steps:
        path.append((path[-1][0] + dx, path[-1][1] + dy))
    # close the walk along straight segments
    x, y = path[-1]
    while y:
        y -= 1 if y > 0 else -1
        path.append((x, y))
    while x:
        x -= 1 if x > 0 else -1
        path.append((x, y))
    w = walk_weight(ZIPPER, path)
    assert winding_parity(path) == (1 if w > 0 else -1)
    assert abs(w) == walk_weight(STANDARD, path)
