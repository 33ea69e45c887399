"""Discrete Laplacians, Green's functions and Poisson kernels on finite domains.

Domains are boolean masks on a bounding grid.  ``DomainSolver`` assembles
``I - Q`` for a weight field and factors it once (scipy ``splu`` in floating
point, sparse Gaussian elimination over the rationals in exact mode).

Infinite strips are handled by ``TransparentStrip``, which keeps a finite band
of rows and closes it with the exact discrete Dirichlet-to-Neumann map of the
half-strip.  Removing a small set (a SAW) from a factored domain is done by a
capacitance (Schur complement) correction, see ``SlitCorrection``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionError, NotConverged, Singular
from .estimate import Estimate
from .extrapolate import check_converged, fitted_exponent, richardson
from .lattice import Saw, Site, origin
from .signed_field import STANDARD, WeightField, weight

try:  # gmpy2 rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

__all__ = [
    "FiniteDomain",
    "Kernel",
    "DomainSolver",
    "TransparentStrip",
    "SlitCorrection",
    "laplacian_apply",
    "green",
    "poisson",
    "boundary_poisson",
    "green_diag_slit_plane",
    "loop_term",
    "loop_term_det",
    "exact_det",
]


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


# ---------------------------------------------------------------------------
# domains


class FiniteDomain:
    """A finite set of lattice sites stored as a mask on a bounding grid.

    ``mask[z + offset]`` is True for interior sites.  The grid always keeps a
    one-site margin so that every boundary site has a grid position.
    """

    def __init__(self, mask: np.ndarray, offset: Sequence[int], name: str = "domain"):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim < 1:
            raise DimensionError("mask must have at least one axis")
        # enforce the margin
        if mask.any():
            pad = [(1, 1)] * mask.ndim
            edges = [np.take(mask, [0, -1], axis=a).any() for a in range(mask.ndim)]
            if any(edges):
                mask = np.pad(mask, pad)
                offset = tuple(o + 1 for o in offset)
        self.mask = mask
        self.offset = tuple(int(o) for o in offset)
        self.d = mask.ndim
        self.name = name
        self.strides = np.array([int(np.prod(mask.shape[a + 1:])) for a in range(self.d)], dtype=np.int64)
        flat = np.flatnonzero(mask.ravel())
        self.flat = flat
        index = np.full(mask.size, -1, dtype=np.int64)
        index[flat] = np.arange(len(flat))
        self.flat_index = index

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_sites(cls, sites: Iterable, name: str = "domain") -> "FiniteDomain":
        pts = np.array([tuple(Site(s)) for s in sites], dtype=np.int64)
        if pts.size == 0:
            raise ValueError("empty domain")
        lo = pts.min(axis=0) - 1
        hi = pts.max(axis=0) + 1
        mask = np.zeros(tuple(hi - lo + 1), dtype=bool)
        mask[tuple((pts - lo).T)] = True
        return cls(mask, tuple(-lo), name)

    @classmethod
    def _box(cls, radius: int, d: int, keep: Callable, name: str) -> "FiniteDomain":
        r = int(radius) + 1
        axes = np.meshgrid(*([np.arange(-r, r + 1)] * d), indexing="ij")
        return cls(keep(*axes), (r,) * d, name)

    @classmethod
    def disk(cls, R: float, d: int = 2) -> "FiniteDomain":
        """D_R = {z : |z| < R}."""
        R2 = R * R
        return cls._box(math.ceil(R), d, lambda *xs: sum(x * x for x in xs) < R2, f"disk({R:g})")

    @classmethod
    def square(cls, R: int, d: int = 2) -> "FiniteDomain":
        """{z : max |z_i| < R}."""
        return cls._box(R, d, lambda *xs: np.max(np.abs(np.stack(xs)), axis=0) < R, f"square({R})")

    @classmethod
    def slit_square(cls, R: int) -> "FiniteDomain":
        """The square {max(|x|,|y|) < R} with the ray {x >= 0, y = 0} removed."""
        return cls._box(R, 2, lambda x, y: (np.maximum(abs(x), abs(y)) < R) & ~((y == 0) & (x >= 0)),
                        f"slit_square({R})")

    @classmethod
    def strip(cls, n: int, height_cap: int) -> "FiniteDomain":
        """The strip {|x| < n} truncated to |y| <= height_cap."""
        H = int(height_cap)
        xs = np.arange(-n, n + 1)
        ys = np.arange(-H - 1, H + 2)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return cls((np.abs(X) < n) & (np.abs(Y) <= H), (n, H + 1), f"strip({n},{H})")

    def without(self, sites: Iterable) -> "FiniteDomain":
        mask = self.mask.copy()
        for s in sites:
            p = self._grid_pos(Site(s))
            if p is not None:
                mask[p] = False
        return FiniteDomain(mask, self.offset, self.name + "-minus")

    # -- indexing -------------------------------------------------------------

    def _grid_pos(self, z):
        if len(z) != self.d:
            raise DimensionError("site dimension does not match the domain")
        p = tuple(int(c) + o for c, o in zip(z, self.offset))
        if all(0 <= q < s for q, s in zip(p, self.mask.shape)):
            return p
        return None

    def __len__(self) -> int:
        return len(self.flat)

    def __contains__(self, z) -> bool:
        p = self._grid_pos(Site(z))
        return p is not None and bool(self.mask[p])

    def index_of(self, z) -> int:
        """Row index of an interior site, or -1."""
        p = self._grid_pos(Site(z))
        if p is None:
            return -1
        return int(self.flat_index[np.ravel_multi_index(p, self.mask.shape)])

    def coords(self, flat: np.ndarray) -> np.ndarray:
        """Lattice coordinates (shape (m, d)) of flat grid positions."""
        pos = np.stack(np.unravel_index(flat, self.mask.shape), axis=1)
        return pos - np.array(self.offset)

    @cached_property
    def interior_coords(self) -> np.ndarray:
        return self.coords(self.flat)

    @property
    def sites(self) -> list[Site]:
        return [Site(tuple(c)) for c in self.interior_coords.tolist()]

    def neighbor_flat(self):
        """Yield ``(axis, sign, flat positions of the neighbours)`` for every direction."""
        for a in range(self.d):
            for sgn in (1, -1):
                yield a, sgn, self.flat + sgn * self.strides[a]

    @cached_property
    def boundary_flat(self) -> np.ndarray:
        out = [nb[self.flat_index[nb] < 0] for _, _, nb in self.neighbor_flat()]
        return np.unique(np.concatenate(out)) if out else np.array([], dtype=np.int64)

    @property
    def boundary(self) -> list[Site]:
        return [Site(tuple(c)) for c in self.coords(self.boundary_flat).tolist()]

    def __repr__(self):
        return f"FiniteDomain({self.name}, {len(self)} sites)"


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class Kernel:
    """Values K(z, w) for z in ``rows`` and w in ``cols``."""

    rows: tuple
    cols: tuple
    values: object  # ndarray of floats or nested list of Fractions
    name: str = "kernel"

    def __call__(self, z, w):
        i = self.rows.index(Site(z))
        j = self.cols.index(Site(w))
        return self.values[i][j]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["z.x", "z.y", "w.x", "w.y", "value"])
        for i, z in enumerate(self.rows):
            for j, w in enumerate(self.cols):
                v = self.values[i][j]
                wr.writerow([*z[:2], *w[:2], str(v) if isinstance(v, Fraction) else repr(float(v))])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# exact sparse elimination


class _ExactLU:
    """Sparse LU over the rationals, no pivoting.

    ``I - Q`` is an H-matrix for both weight fields (its comparison matrix is
    the nonsingular M-matrix of the standard walk), so natural-order
    elimination never meets a zero pivot unless the system is singular.
    """

    def __init__(self, rows: list[dict]):
        n = len(rows)
        rows = [dict(r) for r in rows]
        below = [set() for _ in range(n)]
        for i, r in enumerate(rows):
            for j in r:
                if j < i:
                    below[j].add(i)
        lower = [dict() for _ in range(n)]
        for k in range(n):
            piv = rows[k].get(k, 0)
            if piv == 0:
                raise Singular(f"zero pivot at row {k}")
            upper = [(j, v) for j, v in rows[k].items() if j > k]
            for i in sorted(below[k]):
                r = rows[i]
                a = r.pop(k, 0)
                if a == 0:
                    continue
                f = a / piv
                lower[i][k] = f
                for j, v in upper:
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                        if j < i:
                            below[j].add(i)
                    else:
                        r.pop(j, None)
        self.n = n
        self.lower = lower
        self.upper = rows

    def solve(self, b: Sequence) -> list:
        n = self.n
        y = [None] * n
        for i in range(n):
            s = b[i]
            for k, f in self.lower[i].items():
                s -= f * y[k]
            y[i] = s
        x = [None] * n
        for i in range(n - 1, -1, -1):
            s = y[i]
            row = self.upper[i]
            for j, v in row.items():
                if j > i:
                    s -= v * x[j]
            x[i] = s / row[i]
        return x


def exact_det(matrix: Sequence[Sequence]) -> Fraction:
    """Determinant of a small rational matrix by fraction-free elimination."""
    a = [[_to_fraction(v) if hasattr(v, "denominator") else Fraction(v) for v in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return det


# ---------------------------------------------------------------------------
# solvers


class DomainSolver:
    """Green's function and harmonic extension on a finite domain.

    ``exact=True`` switches to rational arithmetic (values are returned as
    ``Fraction``); it is meant for oracle-sized domains.
    """

    def __init__(self, domain: FiniteDomain, field: WeightField = STANDARD, exact: bool = False):
        if field.signed and domain.d != 2:
            raise DimensionError("the zipper field lives on Z^2")
        self.domain = domain
        self.field = field
        self.exact = exact
        self._lu = None
        self._columns: dict = {}

    # -- assembly -------------------------------------------------------------

    def _edge_weights(self, a: int, sgn: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        dom = self.domain
        if not self.field.signed:
            return np.full(len(src), 1.0 / (2 * dom.d))
        c1 = dom.coords(src)
        c2 = dom.coords(dst)
        return self.field.weights(c1[:, 0], c1[:, 1], c2[:, 0], c2[:, 1])

    def matrix(self) -> sp.csc_matrix:
        dom = self.domain
        n = len(dom)
        rows = [np.arange(n)]
        cols = [np.arange(n)]
        vals = [np.ones(n)]
        for a, sgn, nb in dom.neighbor_flat():
            j = dom.flat_index[nb]
            ok = j >= 0
            w = self._edge_weights(a, sgn, dom.flat[ok], nb[ok])
            rows.append(np.flatnonzero(ok))
            cols.append(j[ok])
            vals.append(-w)
        return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))

    def _exact_rows(self) -> list[dict]:
        dom = self.domain
        n = len(dom)
        rows = [{i: _Q(1)} for i in range(n)]
        coords = dom.interior_coords
        for a, sgn, nb in dom.neighbor_flat():
            j = dom.flat_index[nb]
            for i in np.flatnonzero(j >= 0):
                z = tuple(coords[i])
                w = list(z)
                w[a] += sgn
                q = weight(self.field, z, tuple(w))
                rows[i][int(j[i])] = _Q(-q.numerator, q.denominator)
        return rows

    @property
    def lu(self):
        if self._lu is None:
            if len(self.domain) == 0:
                raise Singular("empty domain")
            if self.exact:
                self._lu = _ExactLU(self._exact_rows())
            else:
                try:
                    self._lu = spla.splu(self.matrix())
                except RuntimeError as exc:
                    raise Singular(str(exc)) from exc
        return self._lu

    def solve(self, rhs):
        if self.exact:
            return self.lu.solve([_Q(v) if not isinstance(v, Fraction) else _Q(v.numerator, v.denominator) for v in rhs])
        x = self.lu.solve(np.asarray(rhs, dtype=float))
        if not np.all(np.isfinite(x)):
            raise Singular("non-finite solution")
        return x

    def _out(self, v):
        return _to_fraction(v) if self.exact else float(v)

    # -- Green's function ----------------------------------------------------

    def index_of(self, z) -> int:
        return self.domain.index_of(z)

    def green_column(self, w):
        """G_A(., w) as a vector over the interior."""
        j = self.domain.index_of(w)
        if j < 0:
            raise ValueError(f"{Site(w)} is not in the domain")
        if j not in self._columns:
            e = [0] * len(self.domain) if self.exact else np.zeros(len(self.domain))
            e[j] = 1
            self._columns[j] = self.solve(e)
        return self._columns[j]

    def green(self, z, w):
        i = self.domain.index_of(z)
        if i < 0 or self.domain.index_of(w) < 0:
            return self._out(0)
        return self._out(self.green_column(w)[i])

    def green_kernel(self, targets: Sequence | None = None) -> Kernel:
        rows = tuple(self.domain.sites)
        cols = tuple(Site(t) for t in targets) if targets is not None else rows
        if self.exact:
            vals = [[self.green(z, w) for w in cols] for z in rows]
        else:
            vals = np.column_stack([self.green_column(w) for w in cols])
        return Kernel(rows, cols, vals, "green")

    # -- harmonic extension ---------------------------------------------------

    def boundary_rhs(self, data):
        """Right-hand side sum_{w in dA} weight(z, w) data(w) for each interior z.

        ``data`` is either a callable on Sites or, in float mode, a callable
        ``data(coords)`` taking an (m, d) integer array (flag it with the
        attribute ``vectorized = True``).
        """
        dom = self.domain
        n = len(dom)
        if self.exact:
            b = [_Q(0)] * n
            coords = dom.interior_coords
            for a, sgn, nb in dom.neighbor_flat():
                j = dom.flat_index[nb]
                for i in np.flatnonzero(j < 0):
                    z = tuple(coords[i])
                    w = list(z)
                    w[a] += sgn
                    val = data(Site(w))
                    if val:
                        q = weight(self.field, z, tuple(w))
                        b[i] += _Q(q.numerator, q.denominator) * _Q(val)
            return b
        b = np.zeros(n)
        vec = getattr(data, "vectorized", False)
        for a, sgn, nb in dom.neighbor_flat():
            out = np.flatnonzero(dom.flat_index[nb] < 0)
            if not len(out):
                continue
            wc = dom.coords(nb[out])
            vals = np.asarray(data(wc), dtype=float) if vec else np.array([float(data(Site(tuple(c)))) for c in wc.tolist()])
            w = self._edge_weights(a, sgn, dom.flat[out], nb[out])
            np.add.at(b, out, w * vals)
        return b

    def harmonic(self, data):
        """Interior values of the solution of L f = 0 in A, f = data on dA."""
        return self.solve(self.boundary_rhs(data))

    def poisson_vector(self, w):
        w = Site(w)
        return self.harmonic(lambda x: 1 if x == w else 0)

    def value(self, vec, z, data=None):
        """Evaluate an interior solution at z, falling back to the boundary data."""
        i = self.domain.index_of(z)
        if i >= 0:
            return self._out(vec[i])
        if data is None:
            return self._out(0)
        v = data(Site(z))
        return _to_fraction(Fraction(v)) if self.exact else float(v)

    def poisson(self, z, w):
        """H_A(z, w) for w on the boundary; the Dirac mass 1{z = w} off A."""
        z, w = Site(z), Site(w)
        if self.domain.index_of(z) < 0:
            return self._out(1 if z == w else 0)
        key = ("H", w)
        if key not in self._columns:
            self._columns[key] = self.poisson_vector(w)
        return self._out(self._columns[key][self.domain.index_of(z)])

    def boundary_poisson(self, z, w):
        """H_dA(z, w) = L_z H_A(z, w) for boundary sites z != w."""
        z, w = Site(z), Site(w)
        if z == w:
            raise ValueError("boundary Poisson kernel needs z != w")
        total = self._out(0)
        for x in z.neighbors():
            total += self._out(weight(self.field, z, x)) * self.poisson(x, w)
        return total - self.poisson(z, w)


# ---------------------------------------------------------------------------
# functional API


def laplacian_apply(field: WeightField, f: Callable, z):
    """(L f)(z) = sum_w weight(z, w) f(w) - f(z)."""
    z = Site(z)
    return sum(weight(field, z, w) * f(w) for w in z.neighbors()) - f(z)


def green(domain: FiniteDomain, field: WeightField, z, w, exact: bool = False):
    return DomainSolver(domain, field, exact).green(z, w)


def poisson(domain: FiniteDomain, field: WeightField, z, w, exact: bool = False):
    return DomainSolver(domain, field, exact).poisson(z, w)


def boundary_poisson(domain: FiniteDomain, field: WeightField, z, w, exact: bool = False):
    return DomainSolver(domain, field, exact).boundary_poisson(z, w)


# ---------------------------------------------------------------------------
# infinite strip with transparent top and bottom rows


class TransparentStrip:
    """Solver for the infinite strip A_n = {|x| < n} of Z^2.

    Only the band |y| <= Y0 is kept.  Outside it the zipper is absent and all
    boundary data considered here vanish, so the solution above the band is
    the bounded standard-harmonic extension of its top row; that extension is
    applied exactly through the sine-series Dirichlet-to-Neumann operator
    ``T = (2/N) S diag(lambda) S`` with ``lambda_k`` the decaying root of
    ``lambda + 1/lambda = 4 - 2 cos(pi k / N)``, N = 2n.
    """

    def __init__(self, n: int, field: WeightField, Y0: int = 6):
        if n < 2:
            raise ValueError("strip half-width must be at least 2")
        if Y0 < 1:
            raise ValueError("band half-height must be at least 1")
        self.n = n
        self.Y0 = Y0
        self.field = field
        self.H = 2 * Y0 + 1
        self.size = (2 * n - 1) * self.H
        self._lu = None
        self._columns: dict = {}

    def index_of(self, z) -> int:
        x, y = z
        if abs(x) < self.n and abs(y) <= self.Y0:
            return (x + self.n - 1) * self.H + (y + self.Y0)
        return -1

    def contains_band(self, z) -> bool:
        return self.index_of(z) >= 0

    def matrix(self) -> sp.csc_matrix:
        n, Y0, H = self.n, self.Y0, self.H
        xs = np.arange(-n + 1, n)
        ys = np.arange(-Y0, Y0 + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        X, Y = X.ravel(), Y.ravel()
        N = len(X)
        rows, cols, vals = [np.arange(N)], [np.arange(N)], [np.ones(N)]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            x2, y2 = X + dx, Y + dy
            ok = (np.abs(x2) < n) & (np.abs(y2) <= Y0)
            rows.append(np.flatnonzero(ok))
            cols.append((x2[ok] + n - 1) * H + (y2[ok] + Y0))
            vals.append(-self.field.weights(X[ok], Y[ok], x2[ok], y2[ok]))
        NN = 2 * n
        k = np.arange(1, NN)
        S = np.sin(np.pi * np.outer(k, k) / NN)
        c = 4.0 - 2.0 * np.cos(np.pi * k / NN)
        lam = (c - np.sqrt(c * c - 4.0)) / 2.0
        T = (2.0 / NN) * (S * lam) @ S
        for yrow in (Y0, -Y0):
            r = (xs + n - 1) * H + (yrow + Y0)
            R_, C_ = np.meshgrid(r, r, indexing="ij")
            rows.append(R_.ravel())
            cols.append(C_.ravel())
            vals.append(-0.25 * T.ravel())
        return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))

    @property
    def lu(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.matrix())
            except RuntimeError as exc:
                raise Singular(str(exc)) from exc
        return self._lu

    def green_column(self, w):
        j = self.index_of(w)
        if j < 0:
            raise ValueError(f"{w} outside the resolved band")
        if j not in self._columns:
            e = np.zeros(self.size)
            e[j] = 1.0
            self._columns[j] = self.lu.solve(e)
        return self._columns[j]

    def poisson_vector(self, side: int):
        """H^q_{A_n}(., side * n) for the boundary point (side * n, 0)."""
        key = ("H", side)
        if key not in self._columns:
            b = np.zeros(self.size)
            b[self.index_of((side * (self.n - 1), 0))] = 0.25
            self._columns[key] = self.lu.solve(b)
        return self._columns[key]


class SlitCorrection:
    """Green's function and Poisson kernels of ``base`` with a small set removed.

    For a symmetric weight field and a removed set E,

        G_{A\\E}(z, w) = G(z, w) - G(z, E) G(E, E)^{-1} G(E, w),
        h_{A\\E}(z)    = h(z)    - G(z, E) G(E, E)^{-1} h(E),
        H_{A\\E}(z, y) = [G(z, E) G(E, E)^{-1}]_y      (y in E).

    ``base`` needs ``index_of`` and ``green_column``.
    """

    def __init__(self, base, removed: Sequence):
        self.base = base
        self.removed = [tuple(Site(s)) for s in removed]
        idx = [base.index_of(s) for s in self.removed]
        if any(i < 0 for i in idx):
            raise ValueError("removed set must lie inside the base domain")
        self._idx = np.array(idx, dtype=np.int64)
        self.cols = np.array([base.green_column(s) for s in self.removed])  # |E| x N
        gee = self.cols[:, self._idx]
        cond = np.linalg.cond(gee)
        if not np.isfinite(cond) or cond > 1e13:
            raise Singular(f"G(E,E) is numerically singular (cond {cond:.3g})")
        self.gee_inv = np.linalg.inv(gee)
        self._set = set(self.removed)

    def _coeff(self, i: int) -> np.ndarray:
        return self.cols[:, i] @ self.gee_inv

    def green(self, z, w) -> float:
        z, w = tuple(z), tuple(w)
        if z in self._set or w in self._set:
            return 0.0
        i, j = self.base.index_of(z), self.base.index_of(w)
        if i < 0 or j < 0:
            return 0.0
        return float(self.base.green_column(w)[i] - self._coeff(i) @ self.cols[:, j])

    def harmonic(self, h: np.ndarray, z, outside: Callable | None = None) -> float:
        """Value at z of the base-harmonic vector ``h`` corrected to vanish on E."""
        z = tuple(z)
        if z in self._set:
            return 0.0
        i = self.base.index_of(z)
        if i < 0:
            return float(outside(z)) if outside is not None else 0.0
        return float(h[i] - self._coeff(i) @ h[self._idx])

    def poisson_to_removed(self, z, y) -> float:
        z, y = tuple(z), tuple(y)
        if z in self._set:
            return 1.0 if z == y else 0.0
        i = self.base.index_of(z)
        if i < 0:
            return 0.0
        return float(self._coeff(i)[self.removed.index(y)])


# ---------------------------------------------------------------------------
# slit-plane Green diagonal and the loop term


def _disk_without(R: float, eta: Iterable, d: int) -> FiniteDomain:
    return FiniteDomain.disk(R, d).without(eta)


def green_diag_slit_plane(eta: Saw, field: WeightField, zeta, radius_schedule: Sequence[float] = (64, 128, 256),
                          tol: float = 1e-2, method: str = "fitted") -> Estimate:
    """G_{Z^d minus eta}(zeta, zeta) by exhaustion with disks D_R.

    ``method`` is ``"fitted"`` (Aitken with a fitted exponent, needs three
    radii) or ``"richardson"`` (integer powers of 1/R).
    """
    zeta = Site(zeta)
    if zeta in eta:
        raise ValueError("zeta lies on eta")
    if field.signed and eta.d != 2:
        raise DimensionError("the zipper field lives on Z^2")
    values = []
    for R in radius_schedule:
        dom = _disk_without(R, eta.vertices, eta.d)
        values.append(DomainSolver(dom, field).green(zeta, zeta))
    radii = list(radius_schedule)
    ratio = radii[1] / radii[0] if len(radii) > 1 else 2.0
    if len(values) >= 3 and method == "fitted":
        est = fitted_exponent(values, ratio)
    else:
        est = richardson(values, ratio, orders=(1, 2))
    est = Estimate(est.value, est.error, est.mode, est.details | {"radii": radii})
    check_converged(values, tol, "slit-plane Green diagonal", estimate=est)
    return est


def _removal_order(eta: Saw, order) -> list:
    zero = origin(eta.d)
    verts = [v for v in eta.vertices if v != zero]
    if order is None or order == "forward":
        # eta_1, ..., eta_k, then eta_{-1}, ..., eta_{-j}
        return verts[eta.j:] + verts[: eta.j][::-1]
    if order == "reverse":
        return (verts[eta.j:] + verts[: eta.j][::-1])[::-1]
    return [Site(v) for v in order]


def _removed_solver(ambient: FiniteDomain, removed, exact: bool, cache: dict | None) -> DomainSolver:
    if cache is None:
        return DomainSolver(ambient.without(removed), STANDARD, exact)
    key = frozenset(removed)
    if key not in cache:
        cache[key] = DomainSolver(ambient.without(removed), STANDARD, exact)
    return cache[key]


def loop_term(eta: Saw, ambient, order=None, exact: bool = False, tol: float = 1e-2,
              cache: dict | None = None) -> Estimate:
    """F_eta(A hat) = prod_j G_{A_j}(eta_j, eta_j), A_j = A minus {0, eta_1, ..., eta_{j-1}}.

    ``ambient`` is a FiniteDomain (the origin is removed automatically) or a
    sequence of disk radii for the infinite-volume limit.  ``cache`` (a dict
    private to one ambient domain and one ``exact`` setting) reuses solvers
    across walks sharing removed sets.
    """
    if not isinstance(ambient, FiniteDomain):
        radii = list(ambient)
        values = [float(loop_term(eta, FiniteDomain.disk(R, eta.d), order).value) for R in radii]
        ratio = radii[1] / radii[0] if len(radii) > 1 else 2.0
        est = fitted_exponent(values, ratio) if len(values) >= 3 else richardson(values, ratio)
        est = Estimate(est.value, est.error, est.mode, est.details | {"radii": radii})
        check_converged(values, tol, "loop term", estimate=est)
        return est
    verts = _removal_order(eta, order)
    for v in eta.vertices:
        if v not in ambient:
            raise ValueError(f"{v} is not inside the ambient domain")
    removed = [origin(eta.d)]
    prod = Fraction(1) if exact else 1.0
    factors = []
    for v in verts:
        g = _removed_solver(ambient, removed, exact, cache).green(v, v)
        factors.append(g)
        prod *= g
        removed.append(v)
    return Estimate(prod, 0.0, "exact" if exact else "direct", {"factors": factors})


def loop_term_det(eta: Saw, ambient: FiniteDomain, exact: bool = False, cache: dict | None = None):
    """det[G_{A hat}(eta_i, eta_j)] over the vertices of eta other than the origin."""
    zero = origin(eta.d)
    verts = [v for v in eta.vertices if v != zero]
    if not verts:
        return Fraction(1) if exact else 1.0
    solver = _removed_solver(ambient, [zero], exact, cache)
    mat = [[solver.green(a, b) for b in verts] for a in verts]
    if exact:
        return exact_det(mat)
    return float(np.linalg.det(np.array(mat, dtype=float)))
