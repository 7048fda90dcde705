"""Consistent pressure Poisson operator ``E = D M^-1 D^T`` on a periodic mesh."""

from __future__ import annotations

import numpy as np

from .sem_core import (
    Mesh2D,
    OperatorSet1D,
    apply_divergence,
    apply_gradient,
    assembled_mass,
    build_operator_set,
)


def gl_weights(ops: OperatorSet1D, mesh: Mesh2D) -> np.ndarray:
    """Physical Gauss-Legendre quadrature weights in pressure layout ``(K, m, m)``."""
    w = ops.gl.weights
    w2 = 0.25 * mesh.element_size_x * mesh.element_size_y * np.outer(w, w)
    return np.broadcast_to(w2, (mesh.n_elements,) + w2.shape).copy()


def project_out_mean(p: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Remove the (weighted) mean of a pressure field.

    With ``weights=None`` the plain coefficient mean is removed, which is the
    compatibility condition ``1^T b = 0`` for right-hand sides of the singular
    operator. Passing GL quadrature weights removes the physical mean.
    """
    if weights is None:
        return p - p.mean()
    return p - np.sum(weights * p) / np.sum(weights)


class PseudoLaplacian:
    """Matrix-free ``E p = D M^-1 D^T p``.

    Each application does one gather-scatter pass: weak gradient, summation
    over shared GLL nodes, diagonal mass inverse, weak divergence.
    """

    def __init__(self, mesh: Mesh2D, ops: OperatorSet1D | int):
        if isinstance(ops, int):
            ops = build_operator_set(ops)
        self.mesh = mesh
        self.ops = ops
        self.gs = mesh.gather_scatter(ops.N)
        self.inv_mass = 1.0 / assembled_mass(ops, mesh)
        self.weights = gl_weights(ops, mesh)
        m = ops.n_pressure
        self.shape = (mesh.n_elements, m, m)
        self.size = mesh.n_elements * m * m

    def apply(self, p: np.ndarray) -> np.ndarray:
        if p.shape != self.shape:
            raise ValueError(f"pressure field has shape {p.shape}, expected {self.shape}")
        g = self.gs(apply_gradient(p, self.ops, self.mesh))
        return apply_divergence(self.inv_mass * g, self.ops, self.mesh)

    __call__ = apply

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Flat-vector interface."""
        return self.apply(x.reshape(self.shape)).ravel()

    def build_rhs(self, g: np.ndarray) -> np.ndarray:
        """``D g`` for a continuous velocity field ``g``, made compatible with the nullspace."""
        return project_out_mean(apply_divergence(g, self.ops, self.mesh))

    def project_out_mean(self, p: np.ndarray) -> np.ndarray:
        return project_out_mean(p, self.weights)

    def assemble_dense(self) -> np.ndarray:
        """Column-by-column dense matrix; test oracle only."""
        A = np.empty((self.size, self.size))
        e = np.zeros(self.size)
        for j in range(self.size):
            e[j] = 1.0
            A[:, j] = self.matvec(e)
            e[j] = 0.0
        return A

    def element_block(self, k: int) -> np.ndarray:
        """Diagonal block of ``E`` on the pressure nodes of element ``k``."""
        ops, mesh = self.ops, self.mesh
        l2g = self.gs.local_to_global[k].ravel()
        minv_global = np.zeros(self.gs.n_global)
        minv_global[self.gs.local_to_global] = self.inv_mass
        G = np.where(l2g[:, None] == l2g[None, :], minv_global[l2g][:, None], 0.0)
        B = ops.J_gl_to_gll.T * ops.M_gll[None, :]
        C = B @ ops.D_gll
        Dx = 0.5 * mesh.element_size_y * np.kron(B, C)
        Dy = 0.5 * mesh.element_size_x * np.kron(C, B)
        Ek = Dx @ G @ Dx.T + Dy @ G @ Dy.T
        return 0.5 * (Ek + Ek.T)
