"""Extended low-order grids, Q1 matrices and restriction maps for Schwarz blocks.

Each element owns its ``m x m`` Gauss-Legendre pressure nodes. Its Schwarz
subdomain adds ``delta`` GL node layers taken from the neighbors on every side
(and from the diagonal neighbors when corners are included), plus one ghost
node layer beyond that which carries Dirichlet data only. The Q1 mesh lives
directly on the GL nodes, so restriction is pure index selection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .sem_core import Mesh2D, OperatorSet1D


class CornerMode(enum.Enum):
    CROSS = "cross"
    FULL_TENSOR = "full"


@dataclass(frozen=True)
class ExtendedGrid:
    """Extended Q1 grid of one element.

    ``x``/``y`` include the ghost node at each end; ``active`` marks the
    unknowns among the non-ghost tensor nodes, shape ``(len(y) - 2, len(x) - 2)``.
    """

    owner: int
    x: np.ndarray
    y: np.ndarray
    gx: np.ndarray  # global 1D GL index of each x coordinate (wrapped)
    gy: np.ndarray
    delta: int
    delta_x: int
    delta_y: int
    n_owned: int
    corner_mode: CornerMode
    active: np.ndarray
    x_faces: tuple[float, float]
    y_faces: tuple[float, float]

    @property
    def shape(self) -> tuple[int, int]:
        return self.active.shape

    @property
    def owned(self) -> np.ndarray:
        """Mask of the owner element's own nodes on the non-ghost tensor grid."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.delta_y:self.delta_y + self.n_owned, self.delta_x:self.delta_x + self.n_owned] = True
        return mask

    @property
    def overlap_length(self) -> float:
        """Smallest distance from an owner face to the outermost non-ghost node."""
        widths = []
        if self.delta_x:
            widths += [self.x_faces[0] - self.x[1], self.x[-2] - self.x_faces[1]]
        if self.delta_y:
            widths += [self.y_faces[0] - self.y[1], self.y[-2] - self.y_faces[1]]
        return float(min(widths)) if widths else 0.0


def gl_line(n_elements: int, length: float, ref_nodes: np.ndarray) -> np.ndarray:
    """Physical GL coordinates along one direction of the periodic mesh."""
    h = length / n_elements
    return (np.arange(n_elements)[:, None] * h + 0.5 * h * (ref_nodes[None, :] + 1)).ravel()


def _extended_line(e: int, n_elements: int, length: float, ref: np.ndarray, delta: int):
    m = ref.size
    line = gl_line(n_elements, length, ref)
    n_line = line.size
    j = np.arange(e * m - delta - 1, (e + 1) * m + delta + 1)
    wraps, g = np.divmod(j, n_line)
    return line[g] + wraps * length, g


def effective_overlap(delta: int, n_elements: int, m: int) -> int:
    """Largest overlap not exceeding ``delta`` that keeps block unknowns distinct."""
    return min(delta, ((n_elements - 1) * m) // 2)


def build_extended_grid(
    element: int,
    mesh: Mesh2D,
    pressure_nodes: np.ndarray | OperatorSet1D,
    delta: int = 2,
    corner_mode: CornerMode | str = CornerMode.FULL_TENSOR,
) -> ExtendedGrid:
    """Extended grid of ``element`` with ``delta`` overlap layers.

    Raises
    ------
    ValueError
        if ``delta`` is outside ``[1, N - 1]``.
    """
    if isinstance(pressure_nodes, OperatorSet1D):
        pressure_nodes = pressure_nodes.gl.nodes
    ref = np.asarray(pressure_nodes, dtype=float)
    m = ref.size
    if not 1 <= delta <= m:
        raise ValueError(f"overlap delta must lie in [1, {m}], got {delta}")
    corner_mode = CornerMode(corner_mode)
    ex, ey = mesh.element_coords(element)
    dx = effective_overlap(delta, mesh.elements_x, m)
    dy = effective_overlap(delta, mesh.elements_y, m)
    x, gx = _extended_line(ex, mesh.elements_x, mesh.length_x, ref, dx)
    y, gy = _extended_line(ey, mesh.elements_y, mesh.length_y, ref, dy)
    active = np.ones((m + 2 * dy, m + 2 * dx), dtype=bool)
    if corner_mode is CornerMode.CROSS:
        in_x = np.ones(m + 2 * dx, dtype=bool)
        in_x[dx:dx + m] = False
        in_y = np.ones(m + 2 * dy, dtype=bool)
        in_y[dy:dy + m] = False
        active &= ~(in_y[:, None] & in_x[None, :])
    hx, hy = mesh.element_size_x, mesh.element_size_y
    return ExtendedGrid(
        element, x, y, gx, gy, delta, dx, dy, m, corner_mode, active,
        (ex * hx, (ex + 1) * hx), (ey * hy, (ey + 1) * hy),
    )


def q1_matrices_1d(
    coords,
    owned_range: slice | None = None,
    boundary: str = "dirichlet",
    lumped: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal Q1 stiffness and mass on the owned nodes of ``coords``.

    ``boundary="dirichlet"`` assembles every subinterval touching an owned node
    and drops the shape functions of the nodes outside ``owned_range`` (the
    ghost nodes), so boundary rows keep both half-interval contributions but no
    coupling to the dropped functions. ``boundary="neumann"`` assembles only the
    subintervals between owned nodes (natural boundary condition).
    """
    x = np.asarray(coords, dtype=float)
    if x.size < 3:
        raise ValueError("need at least 3 coordinates")
    h = np.diff(x)
    if np.any(h <= 0):
        raise ValueError("coordinates must be strictly increasing")
    if owned_range is None:
        owned_range = slice(1, x.size - 1)
    idx = np.arange(x.size)[owned_range]
    if boundary == "neumann":
        x = x[idx]
        h = np.diff(x)
        idx = np.arange(x.size)
    elif boundary != "dirichlet":
        raise ValueError(f"unknown boundary treatment {boundary!r}")
    n = x.size
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    for e, he in enumerate(h):
        sl = np.ix_([e, e + 1], [e, e + 1])
        K[sl] += np.array([[1.0, -1.0], [-1.0, 1.0]]) / he
        if lumped:
            M[sl] += np.diag([0.5, 0.5]) * he
        else:
            M[sl] += np.array([[2.0, 1.0], [1.0, 2.0]]) * he / 6.0
    sel = np.ix_(idx, idx)
    return K[sel], M[sel]


def q1_element_matrices(hx: float, hy: float) -> np.ndarray:
    """4x4 bilinear stiffness of an ``hx x hy`` rectangle, local order (y, x) row-major."""
    k = lambda h: np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    mm = lambda h: np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6.0
    return np.kron(mm(hy), k(hx)) + np.kron(k(hy), mm(hx))


def assemble_q1_2d(
    x: np.ndarray,
    y: np.ndarray,
    nodes: np.ndarray,
    p: float = 0.0,
    q: float = 0.0,
) -> sp.csr_matrix:
    """Direct Q1 assembly on the tensor grid ``(y, x)`` restricted to ``nodes``.

    Only cells whose four corners are in ``nodes`` are assembled. Boundary
    edges of the cell union receive the weak transmission term
    ``int (p u v + q du/dt dv/dt) ds``. Rows follow the row-major order of
    ``nodes``.
    """
    ny, nx = nodes.shape
    number = -np.ones(nodes.shape, dtype=int)
    number[nodes] = np.arange(nodes.sum())
    cells = nodes[:-1, :-1] & nodes[1:, :-1] & nodes[:-1, 1:] & nodes[1:, 1:]
    rows, cols, vals = [], [], []

    def add(ids, mat):
        rows.append(np.repeat(ids, len(ids)))
        cols.append(np.tile(ids, len(ids)))
        vals.append(mat.ravel())

    for j, i in zip(*np.nonzero(cells)):
        ids = number[[j, j, j + 1, j + 1], [i, i + 1, i, i + 1]]
        add(ids, q1_element_matrices(x[i + 1] - x[i], y[j + 1] - y[j]))

    if p or q:
        edge = lambda h: p * np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6.0 + q * np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
        # cp[j + 1, i + 1] is cell (j, i); the zero frame marks the outside
        cp = np.zeros((ny + 1, nx + 1), dtype=bool)
        cp[1:ny, 1:nx] = cells
        for j in range(ny):
            for i in range(nx - 1):
                if cp[j + 1, i + 1] != cp[j, i + 1]:
                    add(number[[j, j], [i, i + 1]], edge(x[i + 1] - x[i]))
        for j in range(ny - 1):
            for i in range(nx):
                if cp[j + 1, i + 1] != cp[j + 1, i]:
                    add(number[[j, j + 1], [i, i]], edge(y[j + 1] - y[j]))

    n = int(nodes.sum())
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return A.tocsr()


@dataclass(frozen=True)
class RestrictionMaps:
    """``R`` selects block unknowns from the global pressure vector.

    ``R_tilde`` marks, among those unknowns, the ones this block owns; the
    return scatter of restricted Schwarz only writes owned entries.
    """

    R: np.ndarray
    R_tilde: np.ndarray

    @property
    def owned_global(self) -> np.ndarray:
        return self.R[self.R_tilde]


def pressure_index(mesh: Mesh2D, m: int, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Flat global pressure index of GL node ``(gy, gx)`` on the global 1D grids."""
    ex, ix = np.divmod(gx, m)
    ey, iy = np.divmod(gy, m)
    return ((ey * mesh.elements_x + ex) * m + iy) * m + ix


def build_restriction_maps(grid: ExtendedGrid, mesh: Mesh2D) -> RestrictionMaps:
    gx, gy = grid.gx[1:-1], grid.gy[1:-1]
    m = grid.n_owned
    if gx.max() >= mesh.elements_x * m or gy.max() >= mesh.elements_y * m:
        raise ValueError("extended grid does not match the mesh")
    idx = pressure_index(mesh, m, gx[None, :], gy[:, None])
    R = idx[grid.active]
    R_tilde = grid.owned[grid.active]
    return RestrictionMaps(R, R_tilde)


def classical_1d(grid: ExtendedGrid, lumped: bool = False):
    """Dirichlet-trimmed 1D Q1 ``(Kx, Mx, Ky, My)`` of the RAS block."""
    Kx, Mx = q1_matrices_1d(grid.x, lumped=lumped)
    Ky, My = q1_matrices_1d(grid.y, lumped=lumped)
    return Kx, Mx, Ky, My


def assemble_classical_block(grid: ExtendedGrid, maps: RestrictionMaps | None = None, lumped: bool = False) -> np.ndarray:
    """Dense RAS block ``My (x) Kx + Ky (x) Mx`` with Dirichlet data at the ghost layer.

    For cross-shaped grids the rows and columns of the excluded corner nodes
    are removed, i.e. those nodes are treated as Dirichlet data as well.
    """
    Kx, Mx, Ky, My = classical_1d(grid, lumped)
    A = np.kron(My, Kx) + np.kron(Ky, Mx)
    keep = grid.active.ravel()
    if not keep.all():
        A = A[np.ix_(keep, keep)]
    return A
