"""One-dimensional spectral building blocks and the 2D periodic element mesh.

Field layouts used throughout the package (``k = ey * Ex + ex``):

* pressure: ``(K, m, m)`` Gauss-Legendre nodal values, ``m = N - 1``
* velocity: ``(2, K, n, n)`` Gauss-Lobatto-Legendre nodal values, ``n = N + 1``

The two trailing axes of an element block are ``(y, x)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre


class QuadratureKind(enum.Enum):
    GAUSS_LOBATTO_LEGENDRE = "gll"
    GAUSS_LEGENDRE = "gl"


@dataclass(frozen=True)
class Quadrature1D:
    kind: QuadratureKind
    order: int
    nodes: np.ndarray
    weights: np.ndarray


def _gll_nodes(N: int, tol: float = 1e-14, max_iter: int = 100) -> np.ndarray:
    # Newton on (1 - x^2) P_N'(x), started from Chebyshev-Gauss-Lobatto points.
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    P = np.zeros((N + 1, N + 1))
    for _ in range(max_iter):
        x_old = x.copy()
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, N + 1):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        x = x_old - (x * P[:, N] - P[:, N - 1]) / ((N + 1) * P[:, N])
        if np.max(np.abs(x - x_old)) < tol:
            break
    x[0], x[-1] = -1.0, 1.0
    return x


def build_quadrature(kind: QuadratureKind | str, order: int) -> Quadrature1D:
    """Gauss-Lobatto-Legendre (``order + 1`` points including +-1) or
    Gauss-Legendre (``order + 1`` interior points) quadrature on [-1, 1].

    GLL is exact for polynomials of degree ``2 * order - 1``, GL for degree
    ``2 * order + 1``.
    """
    kind = QuadratureKind(kind)
    if kind is QuadratureKind.GAUSS_LOBATTO_LEGENDRE:
        if order < 2:
            raise ValueError(f"GLL quadrature needs order >= 2, got {order}")
        x = _gll_nodes(order)
        PN = legendre.legval(x, np.eye(order + 1)[order])
        w = 2.0 / (order * (order + 1) * PN**2)
    else:
        if order < 1:
            raise ValueError(f"GL quadrature needs order >= 1, got {order}")
        x, w = legendre.leggauss(order + 1)
    return Quadrature1D(kind, order, x, w)


def lagrange_interpolation_matrix(from_nodes: np.ndarray, to_nodes: np.ndarray) -> np.ndarray:
    """Matrix ``J`` with ``J[a, b] = l_b(to_nodes[a])`` for the Lagrange basis on ``from_nodes``."""
    from_nodes = np.asarray(from_nodes, dtype=float)
    to_nodes = np.asarray(to_nodes, dtype=float)
    # barycentric weights
    diff = from_nodes[:, None] - from_nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / np.prod(diff, axis=1)
    J = np.empty((to_nodes.size, from_nodes.size))
    for a, t in enumerate(to_nodes):
        d = t - from_nodes
        hit = np.flatnonzero(np.abs(d) < 1e-15)
        if hit.size:
            J[a] = 0.0
            J[a, hit[0]] = 1.0
        else:
            c = bw / d
            J[a] = c / c.sum()
    return J


def derivative_matrix(nodes: np.ndarray) -> np.ndarray:
    """Nodal differentiation matrix for the Lagrange basis on ``nodes``."""
    x = np.asarray(nodes, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / np.prod(diff, axis=1)
    D = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    # negative-sum trick keeps row sums at zero to rounding
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@dataclass(frozen=True)
class OperatorSet1D:
    """Reference-interval matrices for the P_N - P_{N-2} pair.

    Attributes
    ----------
    D_gll : (N+1, N+1) nodal derivative on GLL nodes
    M_gll : (N+1,) GLL weights (diagonal mass)
    J_gl_to_gll : (N+1, N-1) interpolation from GL to GLL nodes
    K_gll : (N+1, N+1) weak stiffness ``D^T M D``
    """

    N: int
    gll: Quadrature1D
    gl: Quadrature1D
    D_gll: np.ndarray
    M_gll: np.ndarray
    J_gl_to_gll: np.ndarray
    K_gll: np.ndarray

    @property
    def n_velocity(self) -> int:
        return self.N + 1

    @property
    def n_pressure(self) -> int:
        return self.N - 1


def build_operator_set(N: int) -> OperatorSet1D:
    if N < 2:
        raise ValueError(f"polynomial order N must be >= 2 (pressure space P_(N-2)), got {N}")
    gll = build_quadrature(QuadratureKind.GAUSS_LOBATTO_LEGENDRE, N)
    # N = 2 needs the one-point rule, below the public GL minimum
    gl = Quadrature1D(QuadratureKind.GAUSS_LEGENDRE, N - 2, *legendre.leggauss(N - 1))
    D = derivative_matrix(gll.nodes)
    J = lagrange_interpolation_matrix(gl.nodes, gll.nodes)
    K = D.T @ (gll.weights[:, None] * D)
    return OperatorSet1D(N, gll, gl, D, gll.weights.copy(), J, 0.5 * (K + K.T))


def tensor_apply(Ay: np.ndarray, Ax: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply ``Ay (x) Ax`` to element blocks ``u[..., y, x]``."""
    return Ay @ u @ Ax.T


def tensor_apply_flops(Ay_shape, Ax_shape) -> int:
    """Multiply-add count of one :func:`tensor_apply` on a single element block."""
    (my, ny), (mx, nx) = Ay_shape, Ax_shape
    # Ay @ u: my*ny*nx, then (.) @ Ax.T: my*nx*mx
    return 2 * (my * ny * nx + my * nx * mx)


class GatherScatter:
    """Direct stiffness summation for C0 GLL fields on a conforming mesh.

    Shared nodes are summed through an owner-ordered global index map with
    ``np.bincount``, so the result does not depend on element order.
    """

    def __init__(self, local_to_global: np.ndarray, n_global: int):
        self.local_to_global = local_to_global
        self.n_global = n_global
        self._flat = local_to_global.ravel()
        self.n_calls = 0
        self.multiplicity = self.assemble(np.ones(local_to_global.shape), count=False)

    def to_global(self, u_local: np.ndarray) -> np.ndarray:
        return np.bincount(self._flat, weights=u_local.ravel(), minlength=self.n_global)

    def to_local(self, u_global: np.ndarray) -> np.ndarray:
        return u_global[self.local_to_global]

    def assemble(self, u_local: np.ndarray, count: bool = True) -> np.ndarray:
        """Sum shared-node values; a leading component axis is exchanged in the same pass."""
        if count:
            self.n_calls += 1
        if u_local.ndim == self.local_to_global.ndim + 1:
            return np.stack([self.to_local(self.to_global(c)) for c in u_local])
        return self.to_local(self.to_global(u_local))

    __call__ = assemble


@dataclass
class Mesh2D:
    """Uniform rectangular periodic mesh of ``Ex x Ey`` elements."""

    elements_x: int
    elements_y: int
    length_x: float = 2 * np.pi
    length_y: float = 2 * np.pi
    periodic: tuple[bool, bool] = (True, True)
    _gs_cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.elements_x < 1 or self.elements_y < 1:
            raise ValueError("element counts must be positive")
        if not all(self.periodic):
            raise NotImplementedError("only fully periodic meshes are supported")

    @property
    def n_elements(self) -> int:
        return self.elements_x * self.elements_y

    @property
    def element_size_x(self) -> float:
        return self.length_x / self.elements_x

    @property
    def element_size_y(self) -> float:
        return self.length_y / self.elements_y

    def element_index(self, ex: int, ey: int) -> int:
        return (ey % self.elements_y) * self.elements_x + (ex % self.elements_x)

    def element_coords(self, k: int) -> tuple[int, int]:
        return k % self.elements_x, k // self.elements_x

    def neighbors(self, k: int) -> dict[tuple[int, int], int]:
        """Face and corner neighbors keyed by offset ``(dx, dy)``."""
        ex, ey = self.element_coords(k)
        return {
            (dx, dy): self.element_index(ex + dx, ey + dy)
            for dy in (-1, 0, 1)
            for dx in (-1, 0, 1)
            if (dx, dy) != (0, 0)
        }

    def gather_scatter(self, N: int) -> GatherScatter:
        if N not in self._gs_cache:
            Ex, Ey = self.elements_x, self.elements_y
            nx_glob, ny_glob = Ex * N, Ey * N
            ex = np.arange(Ex)
            ey = np.arange(Ey)
            i = np.arange(N + 1)
            gx = (ex[:, None] * N + i[None, :]) % nx_glob  # (Ex, n)
            gy = (ey[:, None] * N + i[None, :]) % ny_glob  # (Ey, n)
            l2g = gy[:, None, :, None] * nx_glob + gx[None, :, None, :]  # (Ey, Ex, n, n)
            l2g = l2g.reshape(Ex * Ey, N + 1, N + 1)
            self._gs_cache[N] = GatherScatter(l2g, nx_glob * ny_glob)
        return self._gs_cache[N]

    def gll_coordinates(self, ops: OperatorSet1D) -> tuple[np.ndarray, np.ndarray]:
        """Physical ``(X, Y)`` of every GLL node, each shaped ``(K, n, n)``."""
        return self._coordinates(ops.gll.nodes)

    def gl_coordinates(self, ops: OperatorSet1D) -> tuple[np.ndarray, np.ndarray]:
        return self._coordinates(ops.gl.nodes)

    def _coordinates(self, ref: np.ndarray):
        hx, hy = self.element_size_x, self.element_size_y
        k = np.arange(self.n_elements)
        ex, ey = k % self.elements_x, k // self.elements_x
        x = ex[:, None] * hx + 0.5 * hx * (ref[None, :] + 1)
        y = ey[:, None] * hy + 0.5 * hy * (ref[None, :] + 1)
        X = np.broadcast_to(x[:, None, :], (k.size, ref.size, ref.size)).copy()
        Y = np.broadcast_to(y[:, :, None], (k.size, ref.size, ref.size)).copy()
        return X, Y


def dssum(field: np.ndarray, mesh: Mesh2D) -> np.ndarray:
    """Direct stiffness summation of a local GLL field.

    Accepts a scalar field ``(K, n, n)`` or vector field ``(c, K, n, n)``.
    """
    return mesh.gather_scatter(field.shape[-1] - 1)(field)


def _divergence_factors(ops: OperatorSet1D, mesh: Mesh2D):
    W = ops.M_gll
    B = ops.J_gl_to_gll.T * W[None, :]  # (m, n): int l_p h_j
    C = B @ ops.D_gll  # (m, n): int l_p h_j'
    hx, hy = mesh.element_size_x, mesh.element_size_y
    return B, C, hx, hy


def _check_shape(arr: np.ndarray, shape: tuple, what: str):
    if arr.shape != shape:
        raise ValueError(f"{what} has shape {arr.shape}, expected {shape}")


def apply_divergence(u: np.ndarray, ops: OperatorSet1D, mesh: Mesh2D) -> np.ndarray:
    """Weak divergence ``(D u)_q = int q div(u)`` onto the GL pressure grid.

    ``u`` is a local (element-copied) velocity field ``(2, K, n, n)``.
    """
    n = ops.n_velocity
    _check_shape(u, (2, mesh.n_elements, n, n), "velocity field")
    B, C, hx, hy = _divergence_factors(ops, mesh)
    return 0.5 * hy * tensor_apply(B, C, u[0]) + 0.5 * hx * tensor_apply(C, B, u[1])


def apply_gradient(p: np.ndarray, ops: OperatorSet1D, mesh: Mesh2D, assemble: bool = False) -> np.ndarray:
    """Transpose of :func:`apply_divergence` (the weak gradient ``D^T p``).

    Returns element-local contributions; with ``assemble=True`` they are
    summed over shared nodes.
    """
    m = ops.n_pressure
    _check_shape(p, (mesh.n_elements, m, m), "pressure field")
    B, C, hx, hy = _divergence_factors(ops, mesh)
    g = np.stack([0.5 * hy * tensor_apply(B.T, C.T, p), 0.5 * hx * tensor_apply(C.T, B.T, p)])
    return dssum(g, mesh) if assemble else g


def local_mass(ops: OperatorSet1D, mesh: Mesh2D) -> np.ndarray:
    """Unassembled diagonal GLL mass, shape ``(K, n, n)``."""
    W = ops.M_gll
    w2 = 0.25 * mesh.element_size_x * mesh.element_size_y * np.outer(W, W)
    return np.broadcast_to(w2, (mesh.n_elements,) + w2.shape).copy()


def assembled_mass(ops: OperatorSet1D, mesh: Mesh2D) -> np.ndarray:
    """Assembled diagonal GLL mass in local storage, shape ``(K, n, n)``."""
    return dssum(local_mass(ops, mesh), mesh)


def apply_stiffness(u: np.ndarray, ops: OperatorSet1D, mesh: Mesh2D) -> np.ndarray:
    """Unassembled weak Laplacian ``int grad(u) . grad(v)`` of a scalar field ``(K, n, n)``."""
    W, K = np.diag(ops.M_gll), ops.K_gll
    hx, hy = mesh.element_size_x, mesh.element_size_y
    return (hy / hx) * tensor_apply(W, K, u) + (hx / hy) * tensor_apply(K, W, u)


def physical_derivatives(u: np.ndarray, ops: OperatorSet1D, mesh: Mesh2D) -> tuple[np.ndarray, np.ndarray]:
    """Collocation ``(du/dx, du/dy)`` of a scalar GLL field, elementwise."""
    D = ops.D_gll
    I = np.eye(ops.n_velocity)
    return (
        (2.0 / mesh.element_size_x) * tensor_apply(I, D, u),
        (2.0 / mesh.element_size_y) * tensor_apply(D, I, u),
    )
