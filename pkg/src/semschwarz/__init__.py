"""Optimized Schwarz preconditioning of the spectral-element pseudo-Laplacian."""

from .krylov import KrylovReport, bicgstab
from .mhd import ElsasserRK2, MhdState, PhysicalParams, recover_physical
from .opt_blocks import (
    FdmBlock,
    TransmissionParams,
    Variant,
    assemble_optimized_dense,
    compute_params,
    fdm_apply_inverse,
    fdm_factor,
    t0_matrix,
)
from .precond import Kind, Preconditioner, build_bj, build_preconditioner
from .pressure_op import PseudoLaplacian, project_out_mean
from .q1_schwarz import (
    CornerMode,
    ExtendedGrid,
    RestrictionMaps,
    assemble_classical_block,
    build_extended_grid,
    build_restriction_maps,
    q1_matrices_1d,
)
from .sem_core import (
    Mesh2D,
    OperatorSet1D,
    Quadrature1D,
    QuadratureKind,
    apply_divergence,
    apply_gradient,
    build_operator_set,
    build_quadrature,
    dssum,
)

__version__ = "0.1.0"
