"""Spatial discretization: domains, scalar fields, quadrature, Laplacian.

Three domain shapes are supported, all meshed with uniform Cartesian
nodes:

* ``interval``  -- 1D segment, trapezoid cell measures (half cells at the
  two ends);
* ``rectangle`` -- tensor-product grid, cell measure is the product of
  the per-axis trapezoid weights;
* ``disk``      -- cells of a square lattice whose centers fall inside the
  circle (a staircase approximation; the boundary is not fitted), every
  node carrying the full cell area.

The zero-flux Laplacian uses 3-point (1D) / 5-point (2D) stencils with
ghost-point reflection: a missing neighbor mirrors the center value, so a
boundary row in 1D reads ``(-2, 2, 0)/h^2``.  Row sums vanish identically
and the operator is symmetric with respect to the cell-measure inner
product.  The assembly also exposes the symmetric positive-semidefinite
stiffness form ``K = -(W L)`` (``W`` the diagonal of cell measures),
which is what the implicit solvers consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DomainError",
    "DomainMismatchError",
    "DomainSpec",
    "DiscreteDomain",
    "ScalarField",
    "build_domain",
    "assemble_neumann_laplacian",
    "stiffness_matrix",
    "shifted_operator",
    "integrate",
    "dilate_mask",
    "erode_mask",
    "write_field_csv",
    "load_field_csv",
]


class DomainError(ValueError):
    """Invalid domain geometry or resolution."""


class DomainMismatchError(ValueError):
    """A field was used with a domain it does not belong to."""


@dataclass(frozen=True)
class DomainSpec:
    """Declarative description of a domain; validated by :func:`build_domain`."""

    kind: str  # "interval" | "rectangle" | "disk"
    start: float = 0.0
    end: float = 1.0
    nodes: int = 0
    x_range: tuple[float, float] = (0.0, 1.0)
    y_range: tuple[float, float] = (0.0, 1.0)
    shape: tuple[int, int] = (0, 0)
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    cell_size: float = 0.1

    @staticmethod
    def interval(start: float, end: float, nodes: int) -> "DomainSpec":
        return DomainSpec(kind="interval", start=start, end=end, nodes=nodes)

    @staticmethod
    def rectangle(
        x_range: tuple[float, float], y_range: tuple[float, float], shape: tuple[int, int]
    ) -> "DomainSpec":
        return DomainSpec(kind="rectangle", x_range=tuple(x_range), y_range=tuple(y_range), shape=tuple(shape))

    @staticmethod
    def disk(radius: float, center: tuple[float, float] = (0.0, 0.0), cell_size: float = 0.1) -> "DomainSpec":
        return DomainSpec(kind="disk", radius=radius, center=tuple(center), cell_size=cell_size)


class DiscreteDomain:
    """A meshed domain: node coordinates, cell measures, and adjacency.

    Instances are immutable by convention; operators assembled from them
    are cached on first use.  Node order is lexicographic in the grid
    index, which fixes the order of every serialized field.
    """

    def __init__(
        self,
        kind: str,
        coords: np.ndarray,
        cell_measures: np.ndarray,
        edges: tuple[np.ndarray, np.ndarray, np.ndarray],
        spacing: tuple[float, ...],
        grid_ij: Optional[np.ndarray] = None,
    ):
        self.kind = kind
        self.coords = coords
        self.cell_measures = cell_measures
        self.edges_i, self.edges_j, self.edge_weights = edges
        self.spacing = spacing
        self.grid_ij = grid_ij  # integer lattice index per node (2D only)
        self.n_nodes = len(cell_measures)
        self.dim = 1 if coords.ndim == 1 else coords.shape[1]
        self._laplacian: Optional[sp.csr_matrix] = None
        self._stiffness: Optional[sp.csr_matrix] = None
        self._adjacency: Optional[sp.csr_matrix] = None

        degree = np.zeros(self.n_nodes, dtype=int)
        np.add.at(degree, self.edges_i, 1)
        np.add.at(degree, self.edges_j, 1)
        if self.n_nodes and degree.min() < 1:
            raise DomainError("domain has an isolated node; refine the resolution")
        self.boundary = degree < 2 * self.dim

    @property
    def measure(self) -> float:
        """Total measure (length or area) of the discretized domain."""
        return float(self.cell_measures.sum())

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    def field(self, values) -> "ScalarField":
        """Wrap per-node values (or a constant) as a field on this domain."""
        arr = np.asarray(values, dtype=float)
        if arr.shape == ():
            arr = np.full(self.n_nodes, float(arr))
        return ScalarField(self, arr)

    def adjacency(self) -> sp.csr_matrix:
        """Boolean symmetric node adjacency (shared-face neighbors)."""
        if self._adjacency is None:
            i = np.concatenate([self.edges_i, self.edges_j])
            j = np.concatenate([self.edges_j, self.edges_i])
            data = np.ones(len(i), dtype=bool)
            self._adjacency = sp.csr_matrix((data, (i, j)), shape=(self.n_nodes, self.n_nodes))
        return self._adjacency

    def nearest_node(self, point: Iterable[float]) -> int:
        p = np.asarray(point, dtype=float)
        if self.dim == 1:
            d2 = (self.coords - p[0]) ** 2
        else:
            d2 = ((self.coords - p[None, :]) ** 2).sum(axis=1)
        return int(np.argmin(d2))

    def nodes_near(self, point: Iterable[float], radius_cells: float = 1.5) -> np.ndarray:
        """Indices of nodes within ``radius_cells`` grid spacings of a point."""
        p = np.asarray(point, dtype=float)
        r = radius_cells * self.max_spacing
        if self.dim == 1:
            d2 = (self.coords - p[0]) ** 2
        else:
            d2 = ((self.coords - p[None, :]) ** 2).sum(axis=1)
        return np.nonzero(d2 <= r * r)[0]


@dataclass(frozen=True)
class ScalarField:
    """One real value per node of a specific domain."""

    domain: DiscreteDomain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.domain.n_nodes,):
            raise DomainMismatchError(
                f"field has {arr.shape} values for a domain of {self.domain.n_nodes} nodes"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return w


def build_domain(spec: DomainSpec) -> DiscreteDomain:
    """Mesh a :class:`DomainSpec`, validating geometry and resolution."""
    if spec.kind == "interval":
        return _build_interval(spec)
    if spec.kind == "rectangle":
        return _build_rectangle(spec)
    if spec.kind == "disk":
        return _build_disk(spec)
    raise DomainError(f"unknown domain kind {spec.kind!r}")


def _build_interval(spec: DomainSpec) -> DiscreteDomain:
    if not spec.end > spec.start:
        raise DomainError("interval end must exceed start")
    if spec.nodes < 3:
        raise DomainError("resolution too small: an interval needs at least 3 nodes")
    n = spec.nodes
    h = (spec.end - spec.start) / (n - 1)
    coords = spec.start + h * np.arange(n)
    w = _trapezoid_weights(n, h)
    i = np.arange(n - 1)
    edges = (i, i + 1, np.full(n - 1, 1.0 / h))
    return DiscreteDomain("interval", coords, w, edges, (h,))


def _build_rectangle(spec: DomainSpec) -> DiscreteDomain:
    (ax, bx), (ay, by) = spec.x_range, spec.y_range
    if not (bx > ax and by > ay):
        raise DomainError("rectangle ranges must have positive extent")
    nx, ny = spec.shape
    if nx < 3 or ny < 3:
        raise DomainError("resolution too small: a rectangle needs at least 3 nodes per axis")
    hx = (bx - ax) / (nx - 1)
    hy = (by - ay) / (ny - 1)
    xs = ax + hx * np.arange(nx)
    ys = ay + hy * np.arange(ny)
    wx = _trapezoid_weights(nx, hx)
    wy = _trapezoid_weights(ny, hy)

    # node order: lexicographic in (ix, iy)
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    coords = np.column_stack([xs[ix], ys[iy]])
    w = wx[ix] * wy[iy]

    def node(i, j):
        return i * ny + j

    # x-direction edges carry the transverse trapezoid weight wy, and vice versa
    exi, exj = np.meshgrid(np.arange(nx - 1), np.arange(ny), indexing="ij")
    e1 = (node(exi.ravel(), exj.ravel()), node(exi.ravel() + 1, exj.ravel()),
          wy[exj.ravel()] / hx)
    eyi, eyj = np.meshgrid(np.arange(nx), np.arange(ny - 1), indexing="ij")
    e2 = (node(eyi.ravel(), eyj.ravel()), node(eyi.ravel(), eyj.ravel() + 1),
          wx[eyi.ravel()] / hy)
    edges = (
        np.concatenate([e1[0], e2[0]]),
        np.concatenate([e1[1], e2[1]]),
        np.concatenate([e1[2], e2[2]]),
    )
    grid_ij = np.column_stack([ix, iy])
    return DiscreteDomain("rectangle", coords, w, edges, (hx, hy), grid_ij)


def _build_disk(spec: DomainSpec) -> DiscreteDomain:
    if spec.radius <= 0:
        raise DomainError("disk radius must be positive")
    s = spec.cell_size
    if s <= 0:
        raise DomainError("disk cell size must be positive")
    n_axis = int(np.ceil(2 * spec.radius / s))
    if n_axis < 3:
        raise DomainError("resolution too small: the disk needs at least 3 cells per axis")
    cx, cy = spec.center
    xs = cx - spec.radius + (np.arange(n_axis) + 0.5) * s
    ys = cy - spec.radius + (np.arange(n_axis) + 0.5) * s
    ix, iy = np.meshgrid(np.arange(n_axis), np.arange(n_axis), indexing="ij")
    inside = (xs[ix] - cx) ** 2 + (ys[iy] - cy) ** 2 < spec.radius**2
    ix, iy = ix[inside], iy[inside]  # lexicographic in (ix, iy) by construction
    if len(ix) == 0:
        raise DomainError("resolution too small: no cell centers fall inside the disk")
    coords = np.column_stack([xs[ix], ys[iy]])
    w = np.full(len(ix), s * s)

    index = -np.ones((n_axis, n_axis), dtype=int)
    index[ix, iy] = np.arange(len(ix))
    ei, ej = [], []
    # x-neighbors
    has_right = (ix + 1 < n_axis)
    right = index[np.minimum(ix + 1, n_axis - 1), iy]
    ok = has_right & (right >= 0)
    ei.append(index[ix, iy][ok])
    ej.append(right[ok])
    # y-neighbors
    has_up = (iy + 1 < n_axis)
    up = index[ix, np.minimum(iy + 1, n_axis - 1)]
    ok = has_up & (up >= 0)
    ei.append(index[ix, iy][ok])
    ej.append(up[ok])
    ei = np.concatenate(ei)
    ej = np.concatenate(ej)
    edges = (ei, ej, np.full(len(ei), 1.0))  # face s over distance s
    grid_ij = np.column_stack([ix, iy])
    return DiscreteDomain("disk", coords, w, edges, (s, s), grid_ij)


# ---------------------------------------------------------------------------
# Operators and quadrature
# ---------------------------------------------------------------------------


def stiffness_matrix(dom: DiscreteDomain) -> sp.csr_matrix:
    """Symmetric positive-semidefinite form ``K = -(W L)``; ``K 1 = 0``."""
    if dom._stiffness is None:
        i, j, c = dom.edges_i, dom.edges_j, dom.edge_weights
        rows = np.concatenate([i, j, i, j])
        cols = np.concatenate([j, i, i, j])
        data = np.concatenate([-c, -c, c, c])
        K = sp.coo_matrix((data, (rows, cols)), shape=(dom.n_nodes, dom.n_nodes)).tocsr()
        K.sum_duplicates()
        dom._stiffness = K
    return dom._stiffness


def assemble_neumann_laplacian(dom: DiscreteDomain) -> sp.csr_matrix:
    """Zero-flux Laplacian in operator form: ``(L u)_i ~ (Delta u)(x_i)``.

    Diagonal entries are the negated row sums of the off-diagonal part, so
    ``L 1 = 0`` to rounding; symmetry holds in the cell-measure inner
    product.
    """
    if dom._laplacian is None:
        w = dom.cell_measures
        i, j, c = dom.edges_i, dom.edges_j, dom.edge_weights
        off_ij = c / w[i]
        off_ji = c / w[j]
        diag = np.zeros(dom.n_nodes)
        np.add.at(diag, i, -off_ij)
        np.add.at(diag, j, -off_ji)
        rows = np.concatenate([i, j, np.arange(dom.n_nodes)])
        cols = np.concatenate([j, i, np.arange(dom.n_nodes)])
        data = np.concatenate([off_ij, off_ji, diag])
        L = sp.coo_matrix((data, (rows, cols)), shape=(dom.n_nodes, dom.n_nodes)).tocsr()
        L.sum_duplicates()
        dom._laplacian = L
    return dom._laplacian


def shifted_operator(dom: DiscreteDomain, reaction, diffusion: float) -> sp.csr_matrix:
    """Weighted elliptic operator ``W diag(reaction) + diffusion * K``.

    Solving ``A u = W b`` with this matrix realizes
    ``reaction * u - diffusion * Lap(u) = b`` under zero-flux conditions;
    the result is symmetric, and positive definite when ``reaction > 0``.
    """
    w = dom.cell_measures
    react = np.asarray(reaction, dtype=float)
    if react.shape == ():
        react = np.full(dom.n_nodes, float(react))
    A = sp.diags(w * react).tocsr()
    if diffusion != 0.0:
        A = (A + diffusion * stiffness_matrix(dom)).tocsr()
    return A


def integrate(dom: DiscreteDomain, f) -> float:
    """Quadrature ``sum_i w_i f_i`` over the domain's cell measures."""
    if isinstance(f, ScalarField):
        if f.domain is not dom:
            raise DomainMismatchError("field belongs to a different domain")
        v = f.values
    else:
        v = np.asarray(f, dtype=float)
        if v.shape != (dom.n_nodes,):
            raise DomainMismatchError(
                f"expected {dom.n_nodes} values, got array of shape {v.shape}"
            )
    return float(np.dot(dom.cell_measures, v))


# ---------------------------------------------------------------------------
# Mask morphology (used for collar and interior-set checks)
# ---------------------------------------------------------------------------


def dilate_mask(dom: DiscreteDomain, mask: np.ndarray, steps: int) -> np.ndarray:
    """Grow a boolean node mask by ``steps`` layers of grid neighbors."""
    out = np.asarray(mask, dtype=bool).copy()
    adj = dom.adjacency()
    for _ in range(steps):
        out = out | (adj @ out)
    return out


def erode_mask(dom: DiscreteDomain, mask: np.ndarray, steps: int) -> np.ndarray:
    """Shrink a mask to nodes at graph distance > ``steps`` from its complement."""
    return ~dilate_mask(dom, ~np.asarray(mask, dtype=bool), steps)


# ---------------------------------------------------------------------------
# CSV serialization: columns x[,y],value in node order
# ---------------------------------------------------------------------------


def write_field_csv(path, f: ScalarField) -> None:
    dom = f.domain
    with open(path, "w", newline="\n") as fh:
        if dom.dim == 1:
            fh.write("x,value\n")
            for x, v in zip(dom.coords, f.values):
                fh.write(f"{float(x)!r},{float(v)!r}\n")
        else:
            fh.write("x,y,value\n")
            for (x, y), v in zip(dom.coords, f.values):
                fh.write(f"{float(x)!r},{float(y)!r},{float(v)!r}\n")


def load_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a field CSV back as ``(coords, values)`` arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] == 2:
        return data[:, 0], data[:, 1]
    return data[:, :2], data[:, 2]
