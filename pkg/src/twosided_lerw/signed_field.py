"""Standard and zipper edge weights on Z^d.

The zipper field flips the sign of the vertical edges ``(k, k - i)`` for
``k = 1, 2, ...``, i.e. the edges crossing the cut ``{x - i/2 : x >= 1/2}``
just below the positive real axis.  Weights are exact rationals; the vectorised
helpers return floats for the sparse solvers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotLoop, NotNeighbor
from .lattice import Site

__all__ = [
    "FieldKind",
    "WeightField",
    "STANDARD",
    "ZIPPER",
    "weight",
    "walk_weight",
    "winding_parity",
    "cut_crossings",
]


class FieldKind(enum.Enum):
    STANDARD = "standard"
    ZIPPER = "zipper"


def _is_zipper_edge(z, w) -> bool:
    # vertical edge between (k, 0) and (k, -1) with k >= 1
    return z[0] == w[0] and z[0] >= 1 and {z[1], w[1]} == {0, -1}


@dataclass(frozen=True)
class WeightField:
    kind: FieldKind = FieldKind.STANDARD

    @property
    def signed(self) -> bool:
        return self.kind is FieldKind.ZIPPER

    def weight(self, z, w) -> Fraction:
        return weight(self, z, w)

    def __call__(self, z, w) -> Fraction:
        return weight(self, z, w)

    def weights(self, x1, y1, x2, y2) -> np.ndarray:
        """Float weights for arrays of d = 2 edges ``(x1,y1) -> (x2,y2)``."""
        x1 = np.asarray(x1)
        if not self.signed:
            return np.full(x1.shape, 0.25)
        y1, x2, y2 = np.asarray(y1), np.asarray(x2), np.asarray(y2)
        neg = (x1 == x2) & (x1 >= 1) & (np.minimum(y1, y2) == -1) & (np.maximum(y1, y2) == 0)
        return np.where(neg, -0.25, 0.25)

    def sign(self, z, w) -> int:
        return -1 if self.signed and _is_zipper_edge(z, w) else 1

    def __repr__(self):
        return f"WeightField({self.kind.value})"

    @classmethod
    def parse(cls, name: str) -> "WeightField":
        try:
            return cls(FieldKind(name.lower()))
        except ValueError:
            raise ValueError(f"unknown weight field {name!r}; use 'standard' or 'zipper'") from None


STANDARD = WeightField(FieldKind.STANDARD)
ZIPPER = WeightField(FieldKind.ZIPPER)


def weight(field: WeightField, z, w) -> Fraction:
    """p(z,w) = 1/(2d); q(z,w) = -1/4 across the zipper and 1/4 otherwise."""
    z, w = Site(z), Site(w)
    if len(z) != len(w):
        raise DimensionError("dimension mismatch")
    if z.l1(w) != 1:
        raise NotNeighbor(f"{z} and {w} are not nearest neighbours")
    if field.signed:
        if len(z) != 2:
            raise DimensionError("the zipper field is defined on Z^2 only")
        return Fraction(-1, 4) if _is_zipper_edge(z, w) else Fraction(1, 4)
    return Fraction(1, 2 * len(z))


def walk_weight(field: WeightField, walk: Sequence) -> Fraction:
    """Product of the edge weights; the length-0 walk has weight 1."""
    out = Fraction(1)
    sites = [Site(s) for s in walk]
    for a, b in zip(sites, sites[1:]):
        out *= weight(field, a, b)
    return out


def cut_crossings(loop: Sequence) -> int:
    """Signed number of crossings of the cut (downward +1, upward -1)."""
    sites = [Site(s) for s in loop]
    total = 0
    for a, b in zip(sites, sites[1:]):
        if a.l1(b) != 1:
            raise NotNeighbor(f"{a} and {b} are not nearest neighbours")
        if _is_zipper_edge(a, b):
            total += 1 if a[1] > b[1] else -1
    return total


def winding_parity(loop: Sequence) -> int:
    """(-1)^J for a closed walk, J the number of zipper edges traversed."""
    sites = [Site(s) for s in loop]
    if not sites or sites[0] != sites[-1]:
        raise NotLoop("a loop must start and end at the same site")
    for s in sites:
        if len(s) != 2:
            raise DimensionError("winding parity is defined on Z^2 only")
    sign = 1
    for a, b in zip(sites, sites[1:]):
        if a.l1(b) != 1:
            raise NotNeighbor(f"{a} and {b} are not nearest neighbours")
        if _is_zipper_edge(a, b):
            sign = -sign
    return sign
