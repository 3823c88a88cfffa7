"""Dyadic grids, cubes, and uniform meshes on the line.

Everything downstream (weights, operators, sparse families) is represented on
a uniform mesh over ``[-R, R)`` whose cells are half-open, left-closed
intervals.  Cube/mesh intersections are carried out in exact binary-rational
arithmetic (``fractions.Fraction``) so that set measures are exact sums of
cell widths and never drift.

The shifted dyadic grids implement the one-third-trick family

    D_j = { 2^{-k} ([0,1) + m + (-1)^k * j/3) : k, m integers },  j in {0,1,2}

which has the two properties the rest of the library relies on:

* within one grid, any two cubes are nested or disjoint;
* every bounded interval I is contained in a cube of one of the grids with
  |Q| <= 6 |I| (at dimension 1).

Suprema "over all cubes" are approximated by suprema over these grids within
a level range (plus richer interval families where closed forms make them
cheap; see :mod:`weaklab.weights`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

__all__ = [
    "Mesh",
    "MeshFunction",
    "DyadicGrid",
    "Cube",
    "shifted_grids",
    "enumerate_cubes",
    "average",
    "covering_cube",
]

_TWO = Fraction(2)


def _width_frac(k: int) -> Fraction:
    """Exact cube width 2**-k at any integer level."""
    return _TWO ** (-k)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh of ``2**(level+1)`` half-open cells over ``[-radius, radius)``.

    Parameters
    ----------
    radius : float
        Half-width R of the domain.  Must be a binary rational with a small
        denominator (floats such as 4.0, 1.0, 0.5 qualify); a power of two
        makes the mesh cells coincide with standard dyadic cubes, which the
        Calderon-Zygmund and aligned sparse constructions require.
    level : int
        Refinement level L.  Cell width is ``h = R * 2**-L``; there are
        ``2**(L+1)`` cells.
    """

    radius: float
    level: int

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"mesh radius must be positive and finite, got {self.radius}")
        if not (0 <= self.level <= 20):
            raise ValueError(f"mesh level must be in 0..20, got {self.level}")
        if Fraction(self.radius).denominator > 1024 or Fraction(self.radius).numerator > 2**20:
            raise ValueError(
                f"mesh radius {self.radius} is not a small binary rational; "
                "exact cube/cell arithmetic would overflow"
            )

    @property
    def n_cells(self) -> int:
        return 2 ** (self.level + 1)

    @property
    def h(self) -> float:
        return self.radius * 2.0 ** (-self.level)

    @property
    def radius_frac(self) -> Fraction:
        return Fraction(self.radius)

    @property
    def h_frac(self) -> Fraction:
        return Fraction(self.radius) / 2**self.level

    @property
    def left_frac(self) -> Fraction:
        return -self.radius_frac

    @property
    def right_frac(self) -> Fraction:
        return self.radius_frac

    def edges(self) -> np.ndarray:
        """All ``n_cells + 1`` cell edges as floats (exact for binary radii)."""
        i = np.arange(self.n_cells + 1)
        return -self.radius + i * self.h

    def centers(self) -> np.ndarray:
        i = np.arange(self.n_cells)
        return -self.radius + (i + 0.5) * self.h

    def edge_fraction(self, i: int) -> Fraction:
        return self.left_frac + i * self.h_frac

    def cell_of(self, x) -> int:
        """Index of the cell containing x (x inside the domain)."""
        pos = (Fraction(x) - self.left_frac) / self.h_frac
        i = math.floor(pos)
        if i < 0 or i >= self.n_cells:
            raise ValueError(f"point {x} outside mesh domain [-{self.radius}, {self.radius})")
        return i

    def cell_span(self, a, b) -> tuple[int, int]:
        """Smallest cell range [i0, i1) whose union covers [a, b) ∩ domain."""
        lo = max(Fraction(a), self.left_frac)
        hi = min(Fraction(b), self.right_frac)
        if hi <= lo:
            return (0, 0)
        i0 = math.floor((lo - self.left_frac) / self.h_frac)
        i1 = math.ceil((hi - self.left_frac) / self.h_frac)
        return (i0, min(i1, self.n_cells))

    def is_power_of_two(self) -> bool:
        r = self.radius_frac
        num, den = r.numerator, r.denominator
        return (num == 1 and den & (den - 1) == 0) or (den == 1 and num & (num - 1) == 0)

    def aligned_cell_level(self) -> int:
        """Dyadic level k0 at which standard cubes coincide with mesh cells.

        Only meaningful when the radius is a power of two; raises otherwise.
        """
        if not self.is_power_of_two():
            raise ValueError(
                f"mesh radius {self.radius} is not a power of two; "
                "cells are not standard dyadic cubes"
            )
        return self.level - round(math.log2(self.radius))


class MeshFunction:
    """Piecewise-constant function on a :class:`Mesh`.

    ``values`` has shape ``(n_cells,)`` for scalar functions or
    ``(n_cells, d)`` for vector-valued ones.  The function is extended by
    zero outside the mesh domain wherever an integral asks for it.
    """

    __slots__ = ("mesh", "values", "_prefix")

    def __init__(self, mesh: Mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != mesh.n_cells:
            raise ValueError(f"expected {mesh.n_cells} cell values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("mesh function values must be finite")
        self.mesh = mesh
        self.values = values
        self._prefix = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zeros(cls, mesh: Mesh) -> "MeshFunction":
        return cls(mesh, np.zeros(mesh.n_cells))

    @classmethod
    def constant(cls, mesh: Mesh, c: float) -> "MeshFunction":
        return cls(mesh, np.full(mesh.n_cells, float(c)))

    @classmethod
    def indicator(cls, mesh: Mesh, a, b) -> "MeshFunction":
        """Indicator of [a, b); endpoints must lie on cell edges."""
        lo = (Fraction(a) - mesh.left_frac) / mesh.h_frac
        hi = (Fraction(b) - mesh.left_frac) / mesh.h_frac
        if lo.denominator != 1 or hi.denominator != 1:
            raise ValueError(f"indicator endpoints [{a}, {b}) do not align with mesh cells")
        v = np.zeros(mesh.n_cells)
        v[max(int(lo), 0) : max(min(int(hi), mesh.n_cells), 0)] = 1.0
        return cls(mesh, v)

    def embedded(self, new_radius: float) -> "MeshFunction":
        """Zero-extension onto a wider mesh with the same cell width."""
        ratio = Fraction(new_radius) / self.mesh.radius_frac
        if ratio.denominator != 1 or ratio.numerator & (ratio.numerator - 1):
            raise ValueError("new radius must be a power-of-two multiple of the old one")
        grow = round(math.log2(ratio.numerator))
        big = Mesh(new_radius, self.mesh.level + grow)
        vals = np.zeros((big.n_cells, *self.values.shape[1:]))
        off = (big.n_cells - self.mesh.n_cells) // 2
        vals[off : off + self.mesh.n_cells] = self.values
        return MeshFunction(big, vals)

    # -- basic queries ----------------------------------------------------------

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    def magnitude(self) -> "MeshFunction":
        if self.is_vector:
            return MeshFunction(self.mesh, np.linalg.norm(self.values, axis=1))
        return MeshFunction(self.mesh, np.abs(self.values))

    def prefix(self) -> np.ndarray:
        """P[i] = integral of f over the first i cells (exact cell sums)."""
        if self._prefix is None:
            if self.is_vector:
                raise TypeError("prefix integrals of a vector function are undefined")
            p = np.zeros(self.mesh.n_cells + 1)
            np.cumsum(self.values * self.mesh.h, out=p[1:])
            self._prefix = p
        return self._prefix

    def integral(self, a=None, b=None) -> float:
        """Exact integral of f over [a, b) ∩ domain (zero extension outside)."""
        mesh = self.mesh
        lo = mesh.left_frac if a is None else max(Fraction(a), mesh.left_frac)
        hi = mesh.right_frac if b is None else min(Fraction(b), mesh.right_frac)
        if hi <= lo:
            return 0.0
        return self._cum_at(hi) - self._cum_at(lo)

    def _cum_at(self, pos_frac: Fraction) -> float:
        """Integral from the left mesh edge to pos (pos inside the domain)."""
        mesh = self.mesh
        pos = (pos_frac - mesh.left_frac) / mesh.h_frac
        i = math.floor(pos)
        p = self.prefix()
        if i >= mesh.n_cells:
            return float(p[-1])
        rem = pos - i
        out = float(p[i])
        if rem:
            out += self.values[i] * mesh.h * float(rem)
        return out

    def average(self, a, b) -> float:
        """Integral over [a, b) divided by the full length b - a."""
        length = float(b) - float(a)
        if length <= 0:
            raise ValueError(f"degenerate interval [{a}, {b})")
        return self.integral(a, b) / length

    def lp_norm(self, p: float) -> float:
        mag = np.linalg.norm(self.values, axis=1) if self.is_vector else np.abs(self.values)
        if math.isinf(p):
            return float(mag.max(initial=0.0))
        return float((mag**p).sum() * self.mesh.h) ** (1.0 / p)

    # -- arithmetic (same mesh) --------------------------------------------------

    def _binop(self, other, op) -> "MeshFunction":
        if isinstance(other, MeshFunction):
            if other.mesh != self.mesh:
                raise ValueError("mesh functions live on different meshes")
            return MeshFunction(self.mesh, op(self.values, other.values))
        return MeshFunction(self.mesh, op(self.values, other))

    def __add__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __mul__(self, other):
        return self._binop(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return MeshFunction(self.mesh, -self.values)

    def __abs__(self):
        return self.magnitude()

    def power(self, s: float) -> "MeshFunction":
        return MeshFunction(self.mesh, np.abs(self.values) ** s)


# ---------------------------------------------------------------------------
# dyadic grids and cubes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicGrid:
    """One member of the shifted dyadic family.

    ``shift`` holds one third-index per coordinate axis; the realized shift
    at level k along each axis is ``(-1)**k * shift_i / 3``.  Only dimension
    1 is exercised by the continuum operators; the combinatorics are written
    so grids of any dimension can be constructed and counted.
    """

    shift: tuple[int, ...] = (0,)
    dimension: int = 1

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if len(self.shift) != self.dimension:
            raise ValueError("one shift index per axis required")
        if any(j not in (0, 1, 2) for j in self.shift):
            raise ValueError("shift indices must be 0, 1 or 2")

    @property
    def shift_index(self) -> int:
        if self.dimension != 1:
            raise ValueError("shift_index is one-dimensional; use .shift")
        return self.shift[0]

    def is_standard(self) -> bool:
        return all(j == 0 for j in self.shift)

    # one-dimensional cube geometry ------------------------------------------

    def cube_left(self, k: int, m: int) -> Fraction:
        """Left endpoint of cube (k, m): (m + (-1)^k j/3) * 2^-k, exactly."""
        sigma = -1 if k & 1 else 1
        return (Fraction(3 * m + sigma * self.shift_index, 3)) * _width_frac(k)

    def cube_index_of(self, k: int, x) -> int:
        """Index m of the level-k cube containing the point x."""
        sigma = -1 if k & 1 else 1
        pos = Fraction(x) / _width_frac(k) - Fraction(sigma * self.shift_index, 3)
        return math.floor(pos)

    def cube(self, k: int, m: int) -> "Cube":
        return Cube(level=k, index=m, grid=self)

    def cube_containing(self, k: int, x) -> "Cube":
        return self.cube(k, self.cube_index_of(k, x))

    def child_left_index(self, k: int, m: int) -> int:
        """Index of the left child (at level k+1) of cube (k, m)."""
        sigma = -1 if k & 1 else 1
        return 2 * m + sigma * self.shift_index

    def parent_index(self, k: int, m: int) -> int:
        """Index of the parent (at level k-1) of cube (k, m)."""
        sigma_parent = -1 if (k - 1) & 1 else 1
        return (m - sigma_parent * self.shift_index) // 2


@dataclass(frozen=True)
class Cube:
    """Dyadic cube: side 2**-level, placed by ``index`` within its grid.

    At dimension 1 the index is a plain integer (the one-entry integer
    vector of the general construction).
    """

    level: int
    index: int
    grid: DyadicGrid = field(default_factory=DyadicGrid)

    @property
    def left(self) -> Fraction:
        return self.grid.cube_left(self.level, self.index)

    @property
    def right(self) -> Fraction:
        return self.grid.cube_left(self.level, self.index + 1)

    @property
    def width(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def width_frac(self) -> Fraction:
        return _width_frac(self.level)

    @property
    def measure(self) -> float:
        return self.width**self.grid.dimension

    def interval(self) -> tuple[float, float]:
        return (float(self.left), float(self.right))

    def contains_point(self, x) -> bool:
        return self.left <= Fraction(x) < self.right

    def contains_cube(self, other: "Cube") -> bool:
        return self.left <= other.left and other.right <= self.right

    def intersects(self, a, b) -> bool:
        return self.left < Fraction(b) and Fraction(a) < self.right

    def parent(self) -> "Cube":
        return Cube(self.level - 1, self.grid.parent_index(self.level, self.index), self.grid)

    def children(self) -> tuple["Cube", "Cube"]:
        lo = self.grid.child_left_index(self.level, self.index)
        return (Cube(self.level + 1, lo, self.grid), Cube(self.level + 1, lo + 1, self.grid))

    def __repr__(self):
        return f"Cube[{float(self.left):.6g}, {float(self.right):.6g})@k={self.level}"


def shifted_grids(n: int = 1) -> list[DyadicGrid]:
    """The 3**n shifted dyadic grids in dimension n."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return [DyadicGrid(shift=s, dimension=n) for s in product((0, 1, 2), repeat=n)]


def enumerate_cubes(
    grid: DyadicGrid,
    domain: tuple[float, float],
    min_level: int,
    max_level: int,
) -> list[Cube]:
    """All grid cubes meeting ``domain = [a, b)`` with level in the range.

    The empty level range yields an empty list; an unbounded domain is an
    error because the result would be infinite.
    """
    a, b = domain
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"domain [{a}, {b}) must be bounded")
    if grid.dimension != 1:
        raise NotImplementedError("cube enumeration is exercised at dimension 1 only")
    out: list[Cube] = []
    if b <= a:
        return out
    for k in range(min_level, max_level + 1):
        m_lo = grid.cube_index_of(k, a)
        m_hi = grid.cube_index_of(k, b)
        if grid.cube_left(k, m_hi) == Fraction(b):
            m_hi -= 1
        out.extend(Cube(k, m, grid) for m in range(m_lo, m_hi + 1))
    return out


def average(f: MeshFunction, Q: Cube) -> float:
    """Cube average <f>_Q = |Q|^-1 ∫_Q f, exact for the piecewise-constant f.

    Cells outside the mesh domain contribute zero mass but the full cube
    measure |Q| is kept in the denominator.
    """
    if Q.measure == 0:
        raise ValueError("cube has zero measure")
    return f.integral(Q.left, Q.right) / Q.width


def covering_cube(grids: Sequence[DyadicGrid], a, b, max_ratio: float = 8.0) -> Cube:
    """Smallest shifted-grid cube containing [a, b] (one-third trick).

    Scans cube widths from just above |I| upward; the family guarantees a
    cover with |Q| <= 6 |I| at dimension 1.
    """
    a_f, b_f = Fraction(a), Fraction(b)
    length = b_f - a_f
    if length <= 0:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    k_finest = -math.ceil(math.log2(float(length)))
    best: Cube | None = None
    for k in range(k_finest, k_finest - math.ceil(math.log2(max_ratio)) - 2, -1):
        for grid in grids:
            q = grid.cube_containing(k, a_f)
            if q.right >= b_f:
                if best is None or q.width < best.width:
                    best = q
        if best is not None:
            return best
    raise RuntimeError(f"no covering cube within width ratio {max_ratio} of [{a}, {b}]")


# ---------------------------------------------------------------------------
# vectorized per-level geometry (used by the operator modules)
# ---------------------------------------------------------------------------


def _level_affine(mesh: Mesh, grid: DyadicGrid, k: int) -> tuple[int, int, int]:
    """Integer constants (a0, step, den) such that, exactly,

        (cell_edge_i - cube_shift) / cube_width = (a0 + i * step) / den.

    The cube index of the point at edge i is floor((a0 + i*step)/den),
    computable in pure integer arithmetic.
    """
    width = _width_frac(k)
    sigma = -1 if k & 1 else 1
    a0_f = mesh.left_frac / width - Fraction(sigma * grid.shift_index, 3)
    step_f = mesh.h_frac / width
    den = math.lcm(a0_f.denominator, step_f.denominator)
    return (
        a0_f.numerator * (den // a0_f.denominator),
        step_f.numerator * (den // step_f.denominator),
        den,
    )


def cube_indices_per_cell(mesh: Mesh, grid: DyadicGrid, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(q, contained) per mesh cell at grid level k.

    ``q[i]`` is the index of the level-k cube containing the left endpoint
    of cell i; ``contained[i]`` says whether the whole cell sits inside that
    cube.  Exact integer arithmetic throughout.
    """
    a0, step, den = _level_affine(mesh, grid, k)
    i = np.arange(mesh.n_cells + 1, dtype=np.int64)
    num = a0 + i * step
    q_edge = num // den
    on_boundary = (num % den) == 0
    q = q_edge[:-1]
    contained = (q_edge[1:] == q) | ((q_edge[1:] == q + 1) & on_boundary[1:])
    return q, contained


def level_cube_range(mesh: Mesh, grid: DyadicGrid, k: int) -> tuple[int, int]:
    """Indices [q0, q1] of the level-k cubes meeting the mesh domain."""
    q0 = grid.cube_index_of(k, mesh.left_frac)
    q1 = grid.cube_index_of(k, mesh.right_frac)
    if grid.cube_left(k, q1) == mesh.right_frac:
        q1 -= 1
    return int(q0), int(q1)


def level_cube_integrals(f: MeshFunction, grid: DyadicGrid, k: int) -> tuple[int, np.ndarray]:
    """Exact integrals of f over every level-k cube meeting the mesh domain.

    Returns ``(q0, integrals)`` with ``integrals[m]`` the integral over cube
    ``q0 + m``.  Cells straddling a cube edge are split exactly; f is zero
    outside the domain.
    """
    mesh = f.mesh
    q0, q1 = level_cube_range(mesh, grid, k)
    n_cubes = q1 - q0 + 1
    if n_cubes == 1:
        return q0, np.array([f.prefix()[-1]])
    width = _width_frac(k)
    pos0 = (grid.cube_left(k, q0 + 1) - mesh.left_frac) / mesh.h_frac
    pstep = width / mesh.h_frac
    den = math.lcm(pos0.denominator, pstep.denominator)
    p0 = pos0.numerator * (den // pos0.denominator)
    step = pstep.numerator * (den // pstep.denominator)
    m = np.arange(n_cubes - 1, dtype=np.int64)
    cums = _cum_at_positions(f, p0 + m * step, den)
    total = f.prefix()[-1]
    bounds = np.concatenate(([0.0], cums, [total]))
    return q0, np.diff(bounds)


def _cum_at_positions(f: MeshFunction, nums: np.ndarray, den: int) -> np.ndarray:
    """Integral of f from the left mesh edge to positions nums/den (cell units)."""
    mesh = f.mesh
    n = mesh.n_cells
    idx = nums // den
    rem = nums - idx * den
    idx_c = np.clip(idx, 0, n).astype(np.int64)
    out = f.prefix()[idx_c].copy()
    inside = (idx >= 0) & (idx < n) & (rem > 0)
    if np.any(inside):
        cells = idx_c[inside]
        out[inside] += f.values[cells] * mesh.h * (rem[inside] / den)
    return out
