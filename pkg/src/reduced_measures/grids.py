"""Grids and discrete negative Laplacians.

Three domain families are supported, all with homogeneous Dirichlet data
eliminated from the operator:

* ``interval1d``: (0, L) with nodes at (i+1)h and cell volume h,
* ``radialN``: the ball of radius R in dimension N >= 2, reduced to the
  radial coordinate.  Nodes sit at r_i = (i+1)h with R = (M+1)h; the
  finite-volume cell of the first node is the full ball [0, 3h/2), so a
  Dirac at the origin enters as a flux source on that cell and the
  integral bookkeeping of point masses is exact,
* ``rect2d``: an axis-aligned rectangle with the 5-point stencil.

In every case the matrix is an M-matrix, symmetric under the
cell-volume inner product, and exact on quadratics (second differences
in 1d, radial quadratics R^2 - r^2 for radialN).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage

from . import _kernels


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2*pi for n=2, 4*pi for n=3)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class Grid:
    """A uniform grid over one of the supported domains.

    ``nodes`` holds node coordinates: shape (M,) for interval1d/radialN
    (the radial coordinate), shape (M, 2) for rect2d.  ``cell_volumes``
    are the finite-volume weights used by every integral in the package.
    """

    kind: str
    h: float
    nodes: np.ndarray
    cell_volumes: np.ndarray
    dim: int
    # geometry parameters; unused entries stay at 0
    length: float = 0.0
    radius: float = 0.0
    extents: tuple[float, float] = (0.0, 0.0)
    shape2d: tuple[int, int] = (0, 0)  # (nx, ny) for rect2d

    def __post_init__(self):
        if self.kind not in ("interval1d", "radialN", "rect2d"):
            raise ValueError(f"unknown grid kind: {self.kind!r}")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.n_nodes < 1:
            raise ValueError("grid needs at least one interior node")

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @cached_property
    def domain_volume(self) -> float:
        if self.kind == "interval1d":
            return self.length
        if self.kind == "radialN":
            return sphere_area(self.dim) * self.radius**self.dim / self.dim
        return self.extents[0] * self.extents[1]

    @cached_property
    def boundary_adjacent(self) -> np.ndarray:
        """Mask of nodes whose cell touches the outer boundary."""
        mask = np.zeros(self.n_nodes, dtype=bool)
        if self.kind == "interval1d":
            mask[0] = mask[-1] = True
        elif self.kind == "radialN":
            mask[-1] = True
        else:
            nx, ny = self.shape2d
            m2 = mask.reshape(ny, nx)
            m2[0, :] = m2[-1, :] = True
            m2[:, 0] = m2[:, -1] = True
        return mask

    # --- point and set helpers -------------------------------------------

    def owner_node(self, point) -> tuple[int, float]:
        """Node owning the cell containing ``point`` and the distance from
        the point to that cell (0.0 when the point lies inside it)."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if self.kind == "rect2d":
            if p.shape != (2,):
                raise ValueError("rect2d atoms need 2d coordinates")
            nx, ny = self.shape2d
            i = int(round(p[0] / self.h - 1.0))
            j = int(round(p[1] / self.h - 1.0))
            if not (0 <= i < nx and 0 <= j < ny):
                raise ValueError(f"atom at {point} is not interior")
            node = j * nx + i
            d = np.linalg.norm(p - self.nodes[node], ord=np.inf)
            return node, max(0.0, d - self.h / 2.0)
        x = float(p[0])
        if self.kind == "radialN":
            if x < 0:
                raise ValueError("radial coordinate must be >= 0")
            if x < 1.5 * self.h:
                return 0, 0.0
            i = int(round(x / self.h - 1.0))
            i = min(max(i, 0), self.n_nodes - 1)
            d = abs(x - self.nodes[i])
            return i, max(0.0, d - self.h / 2.0)
        i = int(round(x / self.h - 1.0))
        if not 0 <= i < self.n_nodes:
            raise ValueError(f"atom at {point} is not interior")
        d = abs(x - self.nodes[i])
        return i, max(0.0, d - self.h / 2.0)

    def distances_to(self, node: int) -> np.ndarray:
        """Euclidean distance from every node to ``node`` (radial metric
        for radial grids)."""
        if self.kind == "rect2d":
            return np.linalg.norm(self.nodes - self.nodes[node], axis=1)
        return np.abs(self.nodes - self.nodes[node])

    def dilate(self, mask: np.ndarray, cells: int) -> np.ndarray:
        """Grow a node set by ``cells`` layers of face neighbors."""
        if cells <= 0 or not mask.any():
            return mask.copy()
        if self.kind == "rect2d":
            nx, ny = self.shape2d
            out = ndimage.binary_dilation(
                mask.reshape(ny, nx), iterations=cells
            ).reshape(-1)
            return out
        return ndimage.binary_dilation(mask, iterations=cells)

    def interior_mask(self, margin: float) -> np.ndarray:
        """Nodes at distance greater than ``margin`` from the boundary."""
        if self.kind == "interval1d":
            x = self.nodes
            return (x > margin) & (x < self.length - margin)
        if self.kind == "radialN":
            return self.nodes < self.radius - margin
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        lx, ly = self.extents
        return (x > margin) & (x < lx - margin) & (y > margin) & (y < ly - margin)


@dataclass
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError("values must have one entry per interior node")

    def l1(self) -> float:
        return float(np.sum(np.abs(self.values) * self.grid.cell_volumes))


def integrate(f: GridFunction) -> float:
    """Cell-volume weighted integral over the domain."""
    return float(np.sum(f.values * f.grid.cell_volumes))


def build_grid(
    kind: str,
    h: float,
    *,
    length: float = 1.0,
    dim: int = 2,
    radius: float = 1.0,
    extents: tuple[float, float] = (1.0, 1.0),
) -> Grid:
    """Construct a grid; ``h`` must divide the domain extent evenly."""

    def steps(extent: float) -> int:
        m = extent / h
        mi = int(round(m))
        if abs(m - mi) > 1e-9 * max(1.0, m) or mi < 2:
            raise ValueError(f"h={h} does not evenly divide extent {extent}")
        return mi

    if kind == "interval1d":
        m = steps(length) - 1
        nodes = (np.arange(m) + 1.0) * h
        vols = np.full(m, h)
        return Grid("interval1d", h, nodes, vols, dim=1, length=length)

    if kind == "radialN":
        if dim < 2:
            raise ValueError("radialN needs dim >= 2")
        m = steps(radius) - 1
        nodes = (np.arange(m) + 1.0) * h
        omega = sphere_area(dim)
        faces = (np.arange(m) + 1.5) * h  # outer face of each cell
        outer = omega * faces**dim / dim
        vols = np.empty(m)
        vols[0] = outer[0]
        vols[1:] = outer[1:] - outer[:-1]
        return Grid("radialN", h, nodes, vols, dim=dim, radius=radius)

    if kind == "rect2d":
        nx = steps(extents[0]) - 1
        ny = steps(extents[1]) - 1
        xs = (np.arange(nx) + 1.0) * h
        ys = (np.arange(ny) + 1.0) * h
        gx, gy = np.meshgrid(xs, ys)  # row-major: y outer, x inner
        nodes = np.column_stack([gx.ravel(), gy.ravel()])
        vols = np.full(nx * ny, h * h)
        return Grid(
            "rect2d", h, nodes, vols, dim=2, extents=tuple(extents), shape2d=(nx, ny)
        )

    raise ValueError(f"unknown grid kind: {kind!r}")


@dataclass
class LinearOperator:
    """The discrete negative Laplacian with Dirichlet rows eliminated.

    For interval1d/radialN the three diagonals are kept explicitly and
    the solver goes through the Thomas kernel; rect2d assembles CSR and
    factorizes with ``splu``.  diag(cell_volumes) @ matrix is symmetric.
    """

    grid: Grid
    dl: Optional[np.ndarray]
    d: Optional[np.ndarray]
    du: Optional[np.ndarray]
    _csr: Optional[sp.csr_matrix] = field(default=None, repr=False)
    _lu: object = field(default=None, repr=False)

    @property
    def is_tridiagonal(self) -> bool:
        return self.d is not None

    @property
    def matrix(self) -> sp.csr_matrix:
        if self._csr is None:
            n = self.grid.n_nodes
            self._csr = sp.diags(
                [self.dl, self.d, self.du], [-1, 0, 1], shape=(n, n)
            ).tocsr()
        return self._csr

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.is_tridiagonal:
            out = np.empty_like(values)
            _kernels.tridiag_matvec(self.dl, self.d, self.du, values, out)
            return out
        return self._csr @ values

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.is_tridiagonal:
            return _kernels.thomas_solve(self.dl, self.d, self.du, rhs)
        if self._lu is None:
            self._lu = spla.splu(self.matrix.tocsc())
        return self._lu.solve(rhs)

    def solve_shifted(self, shift: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (L + diag(shift)) x = rhs; shift >= 0 keeps the M-matrix."""
        if self.is_tridiagonal:
            return _kernels.thomas_solve(self.dl, self.d + shift, self.du, rhs)
        mat = self.matrix + sp.diags(shift)
        return spla.splu(mat.tocsc()).solve(rhs)


def negative_laplacian(grid: Grid) -> LinearOperator:
    m = grid.n_nodes
    h = grid.h
    if grid.kind == "interval1d":
        d = np.full(m, 2.0 / h**2)
        off = np.full(m - 1, -1.0 / h**2)
        return LinearOperator(grid, off.copy(), d, off.copy())

    if grid.kind == "radialN":
        n = grid.dim
        omega = sphere_area(n)
        vols = grid.cell_volumes
        faces = (np.arange(m) + 1.5) * h  # face between node i and i+1
        flux = omega * faces ** (n - 1) / h  # conductance through each face
        d = np.empty(m)
        dl = np.empty(m - 1)
        du = np.empty(m - 1)
        d[0] = flux[0] / vols[0]
        du[0] = -flux[0] / vols[0]
        for i in range(1, m):
            inner, outer = flux[i - 1], flux[i]
            d[i] = (inner + outer) / vols[i]
            dl[i - 1] = -inner / vols[i]
            if i < m - 1:
                du[i] = -outer / vols[i]
        # the outermost face couples to the eliminated ghost node at r = R
        return LinearOperator(grid, dl, d, du)

    # rect2d, 5-point stencil
    nx, ny = grid.shape2d
    mat = sp.diags([np.full(m, 4.0 / h**2)], [0])
    if nx > 1:
        ex = np.full(m - 1, -1.0 / h**2)
        ex[np.arange(1, m) % nx == 0] = 0.0  # no coupling across row ends
        mat = mat + sp.diags([ex, ex], [-1, 1])
    if m > nx:
        ey = np.full(m - nx, -1.0 / h**2)
        mat = mat + sp.diags([ey, ey], [-nx, nx])
    return LinearOperator(grid, None, None, None, _csr=mat.tocsr())
