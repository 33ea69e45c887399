"""Lattice sites, two-sided self-avoiding walks and the dihedral group of Z^2.

A two-sided walk ``eta = [eta_{-j}, ..., eta_0 = 0, ..., eta_k]`` is stored as
the plain vertex tuple together with the position of the origin; the signed
index arithmetic is derived from that pair.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import (
    DimensionError,
    InvalidWalk,
    NoForwardStep,
    NotNeighbor,
    SelfIntersection,
)

__all__ = [
    "Site",
    "Saw",
    "Symmetry",
    "SYMMETRIES",
    "origin",
    "unit_vectors",
    "concat_step",
    "reverse",
    "translate_to_origin",
    "is_prefix",
    "canonicalize_first_step",
    "apply_symmetry",
    "enumerate_saws",
    "symmetry_classes",
]


class Site(tuple):
    """A point of Z^d with exact integer coordinates.

    Behaves like a tuple (hashable, comparable with plain tuples) but
    ``+``/``-`` act as vector operations.
    """

    __slots__ = ()

    def __new__(cls, *coords):
        if len(coords) == 1 and not isinstance(coords[0], (int,)) and hasattr(coords[0], "__iter__"):
            coords = tuple(coords[0])
        if isinstance(coords, Site):
            return coords
        try:
            values = tuple(operator.index(c) for c in coords)
        except TypeError as exc:
            raise InvalidWalk(f"site coordinates must be integers: {coords!r}") from exc
        if not values:
            raise InvalidWalk("a site needs at least one coordinate")
        return super().__new__(cls, values)

    @classmethod
    def from_complex(cls, z) -> "Site":
        z = complex(z)
        if z.real != int(z.real) or z.imag != int(z.imag):
            raise InvalidWalk(f"{z!r} is not a Gaussian integer")
        return cls(int(z.real), int(z.imag))

    @property
    def d(self) -> int:
        return len(self)

    @property
    def x(self) -> int:
        return self[0]

    @property
    def y(self) -> int:
        if len(self) < 2:
            raise DimensionError("y is only defined for d >= 2")
        return self[1]

    def as_complex(self) -> complex:
        if len(self) != 2:
            raise DimensionError("complex view requires d = 2")
        return complex(self[0], self[1])

    def __add__(self, other):
        if len(other) != len(self):
            raise DimensionError("dimension mismatch")
        return Site(a + b for a, b in zip(self, other))

    __radd__ = __add__

    def __sub__(self, other):
        if len(other) != len(self):
            raise DimensionError("dimension mismatch")
        return Site(a - b for a, b in zip(self, other))

    def __rsub__(self, other):
        return Site(other) - self

    def __neg__(self):
        return Site(-a for a in self)

    def l1(self, other=None) -> int:
        if other is None:
            return sum(abs(a) for a in self)
        return sum(abs(a - b) for a, b in zip(self, other))

    def norm2(self) -> int:
        return sum(a * a for a in self)

    def is_neighbor(self, other) -> bool:
        return len(other) == len(self) and self.l1(other) == 1

    def neighbors(self) -> list["Site"]:
        out = []
        for e in unit_vectors(len(self)):
            out.append(self + e)
            out.append(self - e)
        return out

    def __repr__(self):
        return "(" + ",".join(str(c) for c in self) + ")"


def origin(d: int = 2) -> Site:
    return Site((0,) * d)


def unit_vectors(d: int = 2) -> list[Site]:
    return [Site(tuple(1 if i == j else 0 for i in range(d))) for j in range(d)]


# ---------------------------------------------------------------------------
# dihedral symmetries


@dataclass(frozen=True)
class Symmetry:
    """Element of the dihedral group of Z^2.

    Acts as ``z -> i**rotation * (conj(z) if reflect else z)``, i.e. an
    optional reflection in the real axis followed by ``rotation`` quarter
    turns counter-clockwise.
    """

    rotation: int = 0
    reflect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rotation", self.rotation % 4)

    def __call__(self, z):
        z = Site(z)
        if len(z) != 2:
            raise DimensionError("dihedral symmetries act on Z^2 only")
        x, y = z
        if self.reflect:
            y = -y
        for _ in range(self.rotation):
            x, y = -y, x
        return Site(x, y)

    def compose(self, other: "Symmetry") -> "Symmetry":
        """Return ``self o other`` (apply ``other`` first)."""
        # r_a s_a r_b s_b = r_a r_b^{±1} s_a s_b, since s r = r^{-1} s
        rot = other.rotation if not self.reflect else -other.rotation
        return Symmetry(self.rotation + rot, self.reflect != other.reflect)

    def inverse(self) -> "Symmetry":
        if self.reflect:
            return self
        return Symmetry(-self.rotation, False)

    @property
    def is_identity(self) -> bool:
        return self.rotation == 0 and not self.reflect

    def __repr__(self):
        name = f"rot{90 * self.rotation}"
        return f"Symmetry({name}{'+reflect' if self.reflect else ''})"


SYMMETRIES: tuple[Symmetry, ...] = tuple(
    Symmetry(r, s) for s in (False, True) for r in range(4)
)


# ---------------------------------------------------------------------------
# self-avoiding walks

_PAIR = re.compile(r"\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)")


@dataclass(frozen=True)
class Saw:
    """A finite self-avoiding walk through the origin.

    ``vertices[origin_index]`` is the origin; in the two-sided notation the
    walk lies in W_{j,k} with ``j = origin_index`` and
    ``k = len(vertices) - 1 - origin_index``.
    """

    vertices: tuple
    origin_index: int = 0

    def __post_init__(self):
        verts = tuple(Site(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if not verts:
            raise InvalidWalk("a SAW needs at least one vertex")
        d = len(verts[0])
        if any(len(v) != d for v in verts):
            raise DimensionError("mixed dimensions in walk")
        if not 0 <= self.origin_index < len(verts):
            raise InvalidWalk("origin_index out of range")
        if verts[self.origin_index] != origin(d):
            raise InvalidWalk(f"vertex {self.origin_index} must be the origin, got {verts[self.origin_index]}")
        for a, b in zip(verts, verts[1:]):
            if a.l1(b) != 1:
                raise NotNeighbor(f"{a} and {b} are not nearest neighbours")
        if len(set(verts)) != len(verts):
            raise SelfIntersection("walk revisits a vertex")

    # -- constructors -------------------------------------------------------

    @classmethod
    def of(cls, points: Iterable, origin_index: int | None = None) -> "Saw":
        """Build from sites, tuples or Gaussian integers (complex numbers)."""
        verts = []
        for p in points:
            if isinstance(p, (complex, float)) or (isinstance(p, int) and not isinstance(p, bool)):
                verts.append(Site.from_complex(p))
            else:
                verts.append(Site(p))
        if origin_index is None:
            zero = origin(len(verts[0])) if verts else None
            if zero not in verts:
                raise InvalidWalk("walk does not visit the origin")
            origin_index = verts.index(zero)
        return cls(tuple(verts), origin_index)

    @classmethod
    def parse(cls, text: str) -> "Saw":
        """Parse the ``"(-1,0);(0,0);(1,0)"`` text format."""
        parts = [p for p in text.replace(" ", "").split(";") if p]
        verts = []
        for p in parts:
            m = _PAIR.fullmatch(p)
            if m is None:
                raise InvalidWalk(f"cannot parse site {p!r}")
            verts.append(Site(int(c) for c in m.group(1).split(",")))
        if not verts:
            raise InvalidWalk("empty walk")
        return cls.of(verts)

    @classmethod
    def line(cls, k: int, d: int = 2) -> "Saw":
        """The straight line ``[0, 1, ..., k]`` along the first axis."""
        e = unit_vectors(d)[0]
        return cls(tuple(Site(tuple(i * c for c in e)) for i in range(k + 1)), 0)

    def format(self) -> str:
        return ";".join(repr(v) for v in self.vertices)

    # -- views ----------------------------------------------------------------

    @property
    def d(self) -> int:
        return len(self.vertices[0])

    @property
    def j(self) -> int:
        return self.origin_index

    @property
    def k(self) -> int:
        return len(self.vertices) - 1 - self.origin_index

    @property
    def length(self) -> int:
        """Number of edges, |eta|."""
        return len(self.vertices) - 1

    @property
    def minus(self) -> Site:
        return self.vertices[0]

    @property
    def plus(self) -> Site:
        return self.vertices[-1]

    def at(self, n: int) -> Site:
        """Vertex ``eta_n`` for ``-j <= n <= k``."""
        if not -self.j <= n <= self.k:
            raise IndexError(f"index {n} outside [-{self.j}, {self.k}]")
        return self.vertices[self.origin_index + n]

    @cached_property
    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    def __contains__(self, z) -> bool:
        return Site(z) in self.vertex_set

    def __iter__(self) -> Iterator[Site]:
        return iter(self.vertices)

    def __repr__(self):
        return f"Saw({self.format()!r}, origin_index={self.origin_index})"

    # -- operations as methods ----------------------------------------------

    def concat(self, zeta) -> "Saw":
        return concat_step(self, zeta)

    def reversed(self) -> "Saw":
        return reverse(self)

    def translated(self) -> "Saw":
        return translate_to_origin(self)

    def prefix(self, k: int) -> "Saw":
        """``[eta_{-j}, ..., eta_k]`` for ``0 <= k <= self.k``."""
        if not 0 <= k <= self.k:
            raise IndexError(k)
        return Saw(self.vertices[: self.origin_index + k + 1], self.origin_index)

    def map(self, g: Symmetry) -> "Saw":
        return apply_symmetry(g, self)


def concat_step(eta: Saw, zeta) -> Saw:
    """eta^zeta = eta (+) [eta_+, zeta]."""
    zeta = Site(zeta)
    if eta.plus.l1(zeta) != 1 or len(zeta) != eta.d:
        raise NotNeighbor(f"{zeta} is not a neighbour of {eta.plus}")
    if zeta in eta:
        raise SelfIntersection(f"{zeta} already on the walk")
    return Saw(eta.vertices + (zeta,), eta.origin_index)


def reverse(eta: Saw) -> Saw:
    return Saw(eta.vertices[::-1], len(eta.vertices) - 1 - eta.origin_index)


def translate_to_origin(eta: Saw) -> Saw:
    """eta^o in W_{0, j+k}: shift so that eta_- sits at the origin."""
    shift = eta.minus
    return Saw(tuple(v - shift for v in eta.vertices), 0)


def is_prefix(eta: Saw, eta_tilde: Saw) -> bool:
    """eta < eta_tilde: eta is the segment of eta_tilde with the same indices."""
    if eta.d != eta_tilde.d or eta.j > eta_tilde.j or eta.k > eta_tilde.k:
        return False
    return all(eta.at(n) == eta_tilde.at(n) for n in range(-eta.j, eta.k + 1))


def apply_symmetry(g: Symmetry, eta: Saw) -> Saw:
    return Saw(tuple(g(v) for v in eta.vertices), eta.origin_index)


def canonicalize_first_step(eta: Saw) -> tuple[Saw, Symmetry]:
    """Rotate eta so that eta_1 = 1; the rotation (never a reflection) is returned."""
    if eta.d != 2:
        raise DimensionError("canonicalization is defined on Z^2")
    if eta.k < 1:
        raise NoForwardStep("eta ends at the origin; eta_1 does not exist")
    first = eta.at(1)
    target = Site(1, 0)
    for r in range(4):
        g = Symmetry(r, False)
        if g(first) == target:
            return apply_symmetry(g, eta), g
    raise AssertionError("unreachable: eta_1 is a unit vector")


# ---------------------------------------------------------------------------
# enumeration helpers


def _walks_from(start: Site, steps: int, avoid: frozenset, allowed) -> Iterator[tuple]:
    if steps == 0:
        yield (start,)
        return
    for w in start.neighbors():
        if w in avoid or (allowed is not None and not allowed(w)):
            continue
        for rest in _walks_from(w, steps - 1, avoid | {w}, allowed):
            yield (start,) + rest


def enumerate_saws(max_length: int, d: int = 2, within=None, one_sided: bool = False) -> list[Saw]:
    """All SAWs through the origin with at most ``max_length`` edges.

    ``within`` is an optional predicate restricting the vertices.  With
    ``one_sided`` only walks in W_{0,k} are returned.
    """
    zero = origin(d)
    out = []
    for length in range(max_length + 1):
        for path in _walks_from(zero, length, frozenset([zero]), within):
            if one_sided:
                out.append(Saw(path, 0))
                continue
            # every position of the origin along a path of this shape
            for i in range(length + 1):
                shift = path[i]
                verts = tuple(v - shift for v in path)
                if within is not None and not all(within(v) for v in verts):
                    continue
                out.append(Saw(verts, i))
    # the loop above produces each two-sided walk exactly once per starting
    # shape; drop duplicates coming from translated copies
    seen = set()
    unique = []
    for s in out:
        key = (s.vertices, s.origin_index)
        if key not in seen:
            seen.add(key)
            unique.append(s)
    return unique


def symmetry_classes(saws: Sequence[Saw]) -> list[Saw]:
    """One representative per orbit of the 8 dihedral symmetries."""
    seen = set()
    reps = []
    for s in saws:
        key = min((tuple(g(v) for v in s.vertices), s.origin_index) for g in SYMMETRIES)
        if key in seen:
            continue
        seen.add(key)
        reps.append(s)
    return reps
