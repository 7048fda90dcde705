"""Optimized transmission blocks and their fast diagonalization.

The optimized block of an extended grid is

    A~ = (My + q T0) (x) (Kx + p T0) + (Ky + p T0) (x) (Mx + q T0)

where ``K``/``M`` are the 1D Q1 matrices with natural boundary rows on the
non-ghost nodes and ``T0`` picks the two end nodes. It carries the weak form
of ``du/dn + p u - q d2u/dt2`` on every face, exactly for ``q = 0``; for
``q > 0`` the Kronecker form adds ``2 p q`` on the four corner diagonal
entries relative to the face-by-face weak form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .q1_schwarz import CornerMode, ExtendedGrid, assemble_classical_block, assemble_q1_2d, q1_matrices_1d


class Variant(enum.Enum):
    CLASSICAL = "classical"
    O0 = "o0"
    O2 = "o2"


@dataclass(frozen=True)
class TransmissionParams:
    variant: Variant
    p: float
    q: float
    k_min: float = 1.0
    eta_shift: float = 0.0
    overlap_length: float = float("nan")


CLASSICAL = TransmissionParams(Variant.CLASSICAL, 0.0, 0.0)


def compute_params(variant: Variant | str, k_min: float, eta_shift: float, overlap_length: float) -> TransmissionParams:
    """Robin coefficients of the optimized conditions for overlap width ``overlap_length``.

    O0: ``p = 2^(-1/3) (k^2 + eta)^(1/3) L^(-1/3)``, ``q = 0``.
    O2: ``p = 2^(-3/5) (k^2 + eta)^(2/5) L^(-1/5)``, ``q = 2^(-1/5) (k^2 + eta)^(-1/5) L^(3/5)``.
    """
    variant = Variant(variant)
    if variant is Variant.CLASSICAL:
        return TransmissionParams(variant, 0.0, 0.0, k_min, eta_shift, overlap_length)
    if not overlap_length > 0:
        raise ValueError(f"overlap length must be positive, got {overlap_length}")
    s = k_min**2 + eta_shift
    if not s > 0:
        raise ValueError("k_min**2 + eta_shift must be positive")
    if variant is Variant.O0:
        p = 2.0 ** (-1 / 3) * s ** (1 / 3) * overlap_length ** (-1 / 3)
        q = 0.0
    else:
        p = 2.0 ** (-3 / 5) * s ** (2 / 5) * overlap_length ** (-1 / 5)
        q = 2.0 ** (-1 / 5) * s ** (-1 / 5) * overlap_length ** (3 / 5)
    return TransmissionParams(variant, p, q, k_min, eta_shift, overlap_length)


def t0_matrix(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"T0 needs n >= 2, got {n}")
    T = np.zeros((n, n))
    T[0, 0] = T[-1, -1] = 1.0
    return T


def optimized_1d(coords: np.ndarray, params: TransmissionParams, lumped: bool = False):
    """Modified ``(K + p T0, M + q T0)`` on the non-ghost nodes of ``coords``."""
    K, M = q1_matrices_1d(coords, boundary="neumann", lumped=lumped)
    T0 = t0_matrix(K.shape[0])
    return K + params.p * T0, M + params.q * T0


@dataclass(frozen=True)
class FdmBlock:
    """Generalized eigenpairs per direction with ``S^T B S = I``, ``S^T A S = diag(lam)``."""

    Sx: np.ndarray
    lam_x: np.ndarray
    Sy: np.ndarray
    lam_y: np.ndarray
    inv_diag: np.ndarray  # 1 / (lam_y[:, None] + lam_x[None, :])

    @property
    def shape(self) -> tuple[int, int]:
        return self.lam_y.size, self.lam_x.size


def _gen_eig(A: np.ndarray, B: np.ndarray):
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    try:
        lam, S = sla.eigh(A, B)
    except np.linalg.LinAlgError as exc:
        raise ValueError("modified mass matrix is not positive definite") from exc
    return lam, S


def fdm_factor(Kx, Mx, params: TransmissionParams = CLASSICAL, Ky=None, My=None) -> FdmBlock:
    """Fast-diagonalization factors of ``(My+qT0)(x)(Kx+pT0) + (Ky+pT0)(x)(Mx+qT0)``.

    With ``p = q = 0`` this factors the block ``My (x) Kx + Ky (x) Mx`` as given.
    """
    if Ky is None:
        Ky, My = Kx, Mx
    mats = []
    for K, M in ((Kx, Mx), (Ky, My)):
        T0 = t0_matrix(K.shape[0])
        mats.append(_gen_eig(K + params.p * T0, M + params.q * T0))
    (lam_x, Sx), (lam_y, Sy) = mats
    denom = lam_y[:, None] + lam_x[None, :]
    if np.any(np.abs(denom) < 1e-14 * np.abs(denom).max()):
        raise ValueError("singular block: zero eigenvalue sum")
    return FdmBlock(Sx, lam_x, Sy, lam_y, 1.0 / denom)


def fdm_apply_inverse(block: FdmBlock, r: np.ndarray) -> np.ndarray:
    """Apply the block inverse to ``r`` of shape ``(..., ny, nx)`` or flat ``(ny*nx,)``."""
    ny, nx = block.shape
    flat = r.ndim == 1
    u = r.reshape(ny, nx) if flat else r
    u = block.Sy.T @ u @ block.Sx
    u = block.inv_diag * u
    u = block.Sy @ u @ block.Sx.T
    return u.ravel() if flat else u


def fdm_operator_dense(block: FdmBlock) -> np.ndarray:
    """Dense inverse of the operator the FDM factors represent (verification only)."""
    S = np.kron(block.Sy, block.Sx)
    return S @ (block.inv_diag.ravel()[:, None] * S.T)


def kronecker_optimized_block(grid: ExtendedGrid, params: TransmissionParams, lumped: bool = False) -> np.ndarray:
    """Dense Kronecker form of the optimized block on the full tensor grid."""
    Kx, Mx = optimized_1d(grid.x, params, lumped)
    Ky, My = optimized_1d(grid.y, params, lumped)
    return np.kron(My, Kx) + np.kron(Ky, Mx)


def assemble_optimized_dense(grid: ExtendedGrid, params: TransmissionParams, corner_mode: CornerMode | str | None = None) -> np.ndarray:
    """Dense optimized block from direct Q1 assembly with weak face terms.

    Cells of the non-ghost active node set are assembled with natural
    boundary rows, then ``int p u v + q du/dt dv/dt`` is added along every
    boundary edge. ``Classical`` parameters return the RAS block.
    """
    if params.variant is Variant.CLASSICAL:
        return assemble_classical_block(grid)
    nodes = grid.active
    if corner_mode is not None and CornerMode(corner_mode) is CornerMode.FULL_TENSOR:
        nodes = np.ones_like(nodes)
    A = assemble_q1_2d(grid.x[1:-1], grid.y[1:-1], nodes, params.p, params.q)
    return A.toarray()
