"""Block Jacobi, RAS and optimized RAS preconditioners for the pseudo-Laplacian.

All Schwarz variants share the restricted form

    P^-1 r = sum_k R~_k^T A_k^-1 R_k r

and differ only in the local block ``A_k``. Elements whose blocks are
identical (always the case on a uniform mesh) share one factorization and are
solved together as a batch of right-hand sides.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import opt_blocks as ob
from .pressure_op import PseudoLaplacian, project_out_mean
from .q1_schwarz import (
    CornerMode,
    ExtendedGrid,
    assemble_classical_block,
    build_extended_grid,
    build_restriction_maps,
    classical_1d,
)

log = logging.getLogger(__name__)


class Kind(enum.Enum):
    IDENTITY = "none"
    BJ = "bj"
    RAS = "ras"
    ORAS_O0 = "oras-o0"
    ORAS_O2 = "oras-o2"


_VARIANT = {Kind.ORAS_O0: ob.Variant.O0, Kind.ORAS_O2: ob.Variant.O2}


class BlockSolveError(RuntimeError):
    pass


class DenseSolver:
    """Cholesky factorization of an SPD block."""

    def __init__(self, A: np.ndarray):
        self.A = A
        self.factor = sla.cho_factor(0.5 * (A + A.T))

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self.factor, rhs.T).T


class FdmSolver:
    def __init__(self, block: ob.FdmBlock):
        self.block = block

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        ny, nx = self.block.shape
        out = ob.fdm_apply_inverse(self.block, rhs.reshape(-1, ny, nx))
        return out.reshape(rhs.shape)


@dataclass
class BlockGroup:
    """Elements sharing one local solver."""

    solver: object
    elements: list[int] = field(default_factory=list)
    R: list[np.ndarray] = field(default_factory=list)
    owned_mask: np.ndarray | None = None

    def finalize(self):
        self.R = np.stack(self.R)
        self.owned_global = self.R[:, self.owned_mask]


@dataclass
class Preconditioner:
    kind: Kind
    groups: list[BlockGroup]
    weights: np.ndarray | None = None
    use_fdm: bool = False
    corner_mode: CornerMode | None = None
    params: ob.TransmissionParams | None = None
    shape: tuple | None = None

    def apply(self, r: np.ndarray) -> np.ndarray:
        """Apply ``P^-1`` to a pressure field (any shape with the global size)."""
        if self.kind is Kind.IDENTITY:
            return r.copy()
        flat = r.ravel()
        z = np.zeros_like(flat)
        for g in self.groups:
            try:
                sol = g.solver(flat[g.R])
            except Exception as exc:  # pragma: no cover - defensive
                raise BlockSolveError(f"block solve failed for element {g.elements[0]}") from exc
            z[g.owned_global] = sol[:, g.owned_mask]
        z = z.reshape(r.shape)
        w = None if self.weights is None else self.weights.reshape(r.shape)
        return project_out_mean(z, w)

    __call__ = apply


def _geometry_key(grid: ExtendedGrid) -> tuple:
    return (
        np.round(np.diff(grid.x), 12).tobytes(),
        np.round(np.diff(grid.y), 12).tobytes(),
        grid.active.tobytes(),
        grid.delta_x,
        grid.delta_y,
    )


def default_k_min(op: PseudoLaplacian) -> float:
    """Lowest nonconstant periodic frequency of the domain."""
    return 2 * np.pi / max(op.mesh.length_x, op.mesh.length_y)


def build_preconditioner(
    kind: Kind | str,
    op: PseudoLaplacian,
    delta: int = 2,
    corner_mode: CornerMode | str = CornerMode.FULL_TENSOR,
    use_fdm: bool = False,
    k_min: float | None = None,
    eta_shift: float = 0.0,
    lumped: bool = False,
    p_scale: float = 1.0,
) -> Preconditioner:
    """Build one of the preconditioners for ``op``.

    ``p_scale`` multiplies the Robin coefficient of the optimized variants
    (used to study the Dirichlet limit).
    """
    kind = Kind(kind)
    if kind is Kind.IDENTITY:
        return Preconditioner(kind, [], shape=op.shape)
    if kind is Kind.BJ:
        return build_bj(op)
    corner_mode = CornerMode(corner_mode)
    if use_fdm and corner_mode is CornerMode.CROSS:
        raise ValueError("fast diagonalization needs full tensor blocks (corners on)")
    if k_min is None:
        k_min = default_k_min(op)
    mesh, ops = op.mesh, op.ops
    groups: dict[tuple, BlockGroup] = {}
    params = None
    for k in range(mesh.n_elements):
        grid = build_extended_grid(k, mesh, ops, delta, corner_mode)
        maps = build_restriction_maps(grid, mesh)
        key = _geometry_key(grid)
        if key not in groups:
            if kind is Kind.RAS:
                params = ob.CLASSICAL
            else:
                params = ob.compute_params(_VARIANT[kind], k_min, eta_shift, grid.overlap_length)
                if p_scale != 1.0:
                    params = ob.TransmissionParams(
                        params.variant, params.p * p_scale, params.q, k_min, eta_shift, params.overlap_length
                    )
            groups[key] = BlockGroup(_local_solver(grid, params, use_fdm, lumped))
            groups[key].owned_mask = maps.R_tilde
        g = groups[key]
        g.elements.append(k)
        g.R.append(maps.R)
    for g in groups.values():
        g.finalize()
    log.debug("built %s with %d distinct block factorizations", kind.value, len(groups))
    return Preconditioner(
        kind, list(groups.values()), op.weights, use_fdm, corner_mode, params, op.shape
    )


def _local_solver(grid: ExtendedGrid, params: ob.TransmissionParams, use_fdm: bool, lumped: bool):
    if params.variant is ob.Variant.CLASSICAL:
        if use_fdm:
            Kx, Mx, Ky, My = classical_1d(grid, lumped)
            return FdmSolver(ob.fdm_factor(Kx, Mx, ob.CLASSICAL, Ky, My))
        return DenseSolver(assemble_classical_block(grid, lumped=lumped))
    if use_fdm:
        Kx, Mx = ob.optimized_1d(grid.x, ob.CLASSICAL, lumped)
        Ky, My = ob.optimized_1d(grid.y, ob.CLASSICAL, lumped)
        return FdmSolver(ob.fdm_factor(Kx, Mx, params, Ky, My))
    return DenseSolver(ob.assemble_optimized_dense(grid, params))


def build_bj(op: PseudoLaplacian) -> Preconditioner:
    """High-order block Jacobi: exact solves with the element-diagonal blocks of ``E``."""
    mesh = op.mesh
    m2 = op.ops.n_pressure ** 2
    groups: dict[bytes, BlockGroup] = {}
    for k in range(mesh.n_elements):
        key = np.round(op.inv_mass[k], 13).tobytes()
        if key not in groups:
            groups[key] = BlockGroup(DenseSolver(_pinned(op.element_block(k))))
            groups[key].owned_mask = np.ones(m2, dtype=bool)
        groups[key].elements.append(k)
        groups[key].R.append(np.arange(k * m2, (k + 1) * m2))
    for g in groups.values():
        g.finalize()
    return Preconditioner(Kind.BJ, list(groups.values()), op.weights, shape=op.shape)


def _pinned(Ek: np.ndarray) -> np.ndarray:
    """Add the constant mode back if the element block is singular (single-element mesh)."""
    lam = np.linalg.eigvalsh(Ek)
    if lam[0] > 1e-10 * lam[-1]:
        return Ek
    n = Ek.shape[0]
    Ep = Ek + lam[-1] * np.ones((n, n)) / n
    if np.linalg.eigvalsh(Ep)[0] <= 1e-10 * lam[-1]:
        raise BlockSolveError("element block singular beyond the constant mode")
    return Ep
