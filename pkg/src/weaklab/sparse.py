"""Calderon-Zygmund decomposition and sparse averaging operators.

The decomposition and the stopping-time sparse construction both run over a
dyadic grid on a mesh.  With the standard (unshifted) grid and a
power-of-two mesh radius, every mesh cell is itself a dyadic cube, so all
set bookkeeping (the cubes Q_j, the exceptional set, the designated sets
E_Q) is exact at cell granularity.

For shifted grids the cubes do not align with cells; families built there
stop above a minimum cube width (default 32 cells) so that the
cell-quantized E_Q still certify the sparseness inequality |Q| <= 2 |E_Q|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grid import Cube, DyadicGrid, Mesh, MeshFunction, average

__all__ = [
    "SparseFamily",
    "CZDecomposition",
    "cz_decompose",
    "exceptional_set",
    "build_sparse_family",
    "sparse_apply",
    "verify_sparseness",
    "root_cubes",
    "covering_roots",
]


def _cells_inside(mesh: Mesh, cube: Cube) -> np.ndarray:
    """Indices of mesh cells entirely inside the cube."""
    lo = max(cube.left, mesh.left_frac)
    hi = min(cube.right, mesh.right_frac)
    if hi <= lo:
        return np.arange(0)
    i0 = math.ceil((lo - mesh.left_frac) / mesh.h_frac)
    i1 = math.floor((hi - mesh.left_frac) / mesh.h_frac)
    return np.arange(i0, i1)


def root_cubes(mesh: Mesh, grid: DyadicGrid) -> list[Cube]:
    """Standard-grid roots tiling the domain: the cubes [-R, 0) and [0, R)."""
    if not grid.is_standard():
        raise ValueError("domain-tiling roots need the standard grid; use covering_roots")
    k = mesh.aligned_cell_level() - mesh.level  # cubes of width R
    return [grid.cube_containing(k, mesh.left_frac), grid.cube_containing(k, 0)]


def covering_roots(mesh: Mesh, grid: DyadicGrid, span: tuple[float, float]) -> list[Cube]:
    """Greedy tiling of ``span`` by maximal grid cubes inside the mesh domain.

    Every designated-set computation stays exact at cell granularity because
    the roots never leave the mesh.  For shifted grids near the domain edge
    the maximal cubes shrink; a span that touches the edge of the domain is
    rejected (embed the function into a larger mesh instead).
    """
    lo, hi = Fraction(span[0]), Fraction(span[1])
    if lo < mesh.left_frac or hi > mesh.right_frac:
        raise ValueError(f"span [{span[0]}, {span[1]}) leaves the mesh domain")
    roots: list[Cube] = []
    k_top = -math.ceil(math.log2(2 * mesh.radius))
    k_cell = math.floor(math.log2(1.0 / mesh.h))
    pos = lo
    while pos < hi:
        placed = None
        for k in range(k_top, k_cell + 1):
            c = grid.cube_containing(k, pos)
            if c.left >= mesh.left_frac and c.right <= mesh.right_frac:
                placed = c
                break
        if placed is None:
            raise ValueError(
                f"no grid cube inside the domain covers x = {float(pos):.6g}; "
                "embed the data into a larger mesh"
            )
        roots.append(placed)
        pos = placed.right
    return roots


# ---------------------------------------------------------------------------
# sparse families
# ---------------------------------------------------------------------------


@dataclass
class SparseFamily:
    """Cubes from one grid with designated pairwise-disjoint sets E_Q.

    The E_Q are stored as mesh-cell index sets, so the sparseness
    inequality |Q| <= 2 |E_Q| is checkable exactly.
    """

    mesh: Mesh
    grid: DyadicGrid
    cubes: list[Cube]
    designated: list[np.ndarray]

    def e_measure(self, i: int) -> float:
        return len(self.designated[i]) * self.mesh.h

    def apply(self, f: MeshFunction, alpha: float = 0.0) -> MeshFunction:
        """A_S f = sum_Q |Q|^alpha <f>_Q chi_Q, evaluated at cell level.

        Cell membership in chi_Q is decided by the cell center, which is
        exact for aligned cubes.
        """
        return sparse_apply(self, f, alpha)

    def verify(self) -> list[str]:
        return verify_sparseness(self)


def sparse_apply(family: SparseFamily, f: MeshFunction, alpha: float = 0.0) -> MeshFunction:
    if f.mesh != family.mesh:
        raise ValueError("function and family live on different meshes")
    mesh = family.mesh
    centers = mesh.centers()
    out = np.zeros(mesh.n_cells)
    for cube in family.cubes:
        avg = average(f, cube)
        lo, hi = float(cube.left), float(cube.right)
        sel = (centers >= lo) & (centers < hi)
        out[sel] += cube.width**alpha * avg
    return MeshFunction(mesh, out)


def verify_sparseness(family: SparseFamily) -> list[str]:
    """Check the three sparse-family invariants; return violation messages."""
    issues: list[str] = []
    mesh = family.mesh
    seen: set[int] = set()
    for cube, cells in zip(family.cubes, family.designated):
        inside = _cells_inside(mesh, cube)
        if not np.all(np.isin(cells, inside)):
            issues.append(f"E_Q not inside {cube}")
        if len(cells) * mesh.h * 2 < cube.width - 1e-12:
            issues.append(
                f"sparseness fails on {cube}: |Q|={cube.width:.6g} > 2|E_Q|={2*len(cells)*mesh.h:.6g}"
            )
        cellset = set(int(c) for c in cells)
        if seen & cellset:
            issues.append(f"E_Q overlaps earlier designated cells on {cube}")
        seen |= cellset
    return issues


def build_sparse_family(
    f: MeshFunction,
    grid: DyadicGrid | None = None,
    roots: Sequence[Cube] | None = None,
    threshold: float | None = None,
    min_width_cells: int | None = None,
) -> SparseFamily:
    """Stopping-time sparse family adapted to f >= 0.

    Starting from each root, the children of a family cube Q are the
    maximal descendants Q' with <f>_Q' > threshold * <f>_Q (threshold
    2^(n+1) = 4 at n = 1).  E_Q is Q minus the next-generation stopping
    cubes.  The construction guarantees |Q| <= 2 |E_Q| (indeed
    |E_Q| >= 3|Q|/4 up to cell quantization) and the pointwise domination
    M^D f <= 4 A_S f on each root for f supported there.

    For f identically zero on a root the root itself is kept with a trivial
    average.
    """
    mesh = f.mesh
    grid = grid or DyadicGrid()
    if threshold is None:
        threshold = 2.0 ** (grid.dimension + 1)
    if np.any(f.values < 0):
        raise ValueError("sparse construction expects f >= 0")
    if roots is None:
        if grid.is_standard():
            roots = root_cubes(mesh, grid)
        else:
            support = np.nonzero(f.values)[0]
            if len(support):
                span = (mesh.edge_fraction(int(support[0])), mesh.edge_fraction(int(support[-1]) + 1))
            else:
                span = (-mesh.radius / 2, mesh.radius / 2)
            roots = covering_roots(mesh, grid, span)
    if min_width_cells is None:
        min_width_cells = 1 if grid.is_standard() else 32
    max_level = math.floor(math.log2(1.0 / (min_width_cells * mesh.h)))

    mag = f
    cubes: list[Cube] = []
    designated: list[np.ndarray] = []

    def descend(cube: Cube, base_avg: float) -> list[Cube]:
        """Maximal descendants of cube with average >= threshold * base_avg."""
        found: list[Cube] = []
        stack = list(cube.children())
        while stack:
            c = stack.pop()
            if c.level > max_level:
                continue
            if not c.intersects(mesh.left_frac, mesh.right_frac):
                continue
            avg_c = average(mag, c)
            if avg_c > 0 and avg_c >= threshold * base_avg:
                found.append(c)
            else:
                stack.extend(c.children())
        return found

    for root in roots:
        queue = [root]
        while queue:
            cube = queue.pop()
            avg = average(mag, cube)
            if avg == 0.0 and cube is not root:
                continue
            stopping = descend(cube, avg) if avg > 0 else []
            inside = _cells_inside(mesh, cube)
            if len(stopping) > 0:
                excluded = np.concatenate([_cells_inside(mesh, c) for c in stopping])
                e_cells = np.setdiff1d(inside, excluded)
            else:
                e_cells = inside
            cubes.append(cube)
            designated.append(e_cells)
            queue.extend(stopping)
    return SparseFamily(mesh=mesh, grid=grid, cubes=cubes, designated=designated)


# ---------------------------------------------------------------------------
# Calderon-Zygmund decomposition
# ---------------------------------------------------------------------------


@dataclass
class CZDecomposition:
    """h = good + bad at a given height over maximal stopping cubes.

    good equals h off Omega and the cube average on each stopping cube;
    bad = h - good is supported on Omega and has exact mean zero on every
    stopping cube.
    """

    height: float
    cubes: list[Cube]
    good: MeshFunction
    bad: MeshFunction
    omega_cells: np.ndarray
    grid: DyadicGrid

    @property
    def omega_measure(self) -> float:
        return len(self.omega_cells) * self.good.mesh.h


def cz_decompose(
    h: MeshFunction,
    height: float,
    grid: DyadicGrid | None = None,
    roots: Sequence[Cube] | None = None,
) -> CZDecomposition:
    """Calderon-Zygmund decomposition of h >= 0 at the given height.

    Stopping cubes are the maximal grid cubes (within the in-domain roots)
    whose average exceeds the height.  Requires the standard grid on a
    power-of-two mesh so cubes align with cells and all identities hold in
    exact cell arithmetic.  The classical bound ||good||_inf <= 2^n * height
    holds whenever no root itself stops (roots average below the height).
    """
    if height <= 0:
        raise ValueError(f"height must be positive, got {height}")
    mesh = h.mesh
    grid = grid or DyadicGrid()
    if not grid.is_standard():
        raise ValueError("decomposition requires the standard (unshifted) grid")
    if np.any(h.values < 0):
        raise ValueError("decomposition expects h >= 0")
    if roots is None:
        roots = root_cubes(mesh, grid)
    k_cell = mesh.aligned_cell_level()

    stopping: list[Cube] = []
    stack = [r for r in roots if r.intersects(mesh.left_frac, mesh.right_frac)]
    while stack:
        cube = stack.pop()
        if average(h, cube) > height:
            stopping.append(cube)
        elif cube.level < k_cell:
            stack.extend(cube.children())

    good = h.values.copy()
    omega = []
    for cube in stopping:
        cells = _cells_inside(mesh, cube)
        good[cells] = average(h, cube)
        omega.append(cells)
    omega_cells = np.sort(np.concatenate(omega)) if omega else np.arange(0)
    good_f = MeshFunction(mesh, good)
    bad_f = MeshFunction(mesh, h.values - good)
    return CZDecomposition(
        height=height,
        cubes=stopping,
        good=good_f,
        bad=bad_f,
        omega_cells=omega_cells,
        grid=grid,
    )


def exceptional_set(
    f: MeshFunction,
    p: float,
    e_cells: np.ndarray,
    K: float,
    grid: DyadicGrid | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(Omega, E') for the duality argument.

    Omega = {M^D(|f|^p) > K/|E|} realized as the union of the stopping
    cubes of the decomposition of |f|^p at height K/|E|; E' = E minus
    Omega.  Requires ||f||_p = 1 (the caller normalizes) and K > 2, which
    forces |Omega| <= |E|/K < |E|/2 and hence |E'| > |E|/2 by the exact
    weak (1,1) bound (constant one) of the dyadic maximal operator.
    """
    if K <= 2:
        raise ValueError(f"exceptional-set constant must satisfy K > 2, got {K}")
    e_cells = np.asarray(e_cells, dtype=int)
    if len(e_cells) == 0:
        raise ValueError("E must have positive measure")
    norm = f.lp_norm(p)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"caller must normalize ||f||_p to 1, got {norm}")
    mesh = f.mesh
    e_measure = len(e_cells) * mesh.h
    hp = f.power(p)
    decomp = cz_decompose(hp, K / e_measure, grid=grid)
    omega = decomp.omega_cells
    eprime = np.setdiff1d(e_cells, omega)
    return omega, eprime
