import numpy as np
import pytest
import scipy.linalg as sla

from semschwarz import opt_blocks as ob
from semschwarz.krylov import bicgstab
from semschwarz.precond import Kind, build_preconditioner
from semschwarz.pressure_op import PseudoLaplacian, project_out_mean
from semschwarz.q1_schwarz import assemble_classical_block, build_extended_grid, q1_matrices_1d
from semschwarz.sem_core import Mesh2D

KINDS = ["bj", "ras", "oras-o0", "oras-o2"]


@pytest.fixture(scope="module")
def op44():
    return PseudoLaplacian(Mesh2D(4, 4), 6)


def iterations(op, P, seed=0, tol=1e-8):
    rng = np.random.default_rng(seed)
    b = op.build_rhs(rng.standard_normal((2, op.mesh.n_elements) + (op.ops.n_velocity,) * 2))
    x0 = op.project_out_mean(rng.standard_normal(op.shape))
    _, rep = bicgstab(op.apply, P.apply, b, x0, tol, 2000)
    assert rep.converged
    return rep.iterations


@pytest.mark.parametrize("kind", KINDS + ["none"])
def test_linear_and_zero_preserving(kind, op44, rng):
    P = build_preconditioner(kind, op44)
    r, s = rng.standard_normal((2,) + op44.shape)
    np.testing.assert_allclose(P.apply(1.5 * r - 2.0 * s), 1.5 * P.apply(r) - 2.0 * P.apply(s), atol=1e-12)
    assert np.all(P.apply(np.zeros(op44.shape)) == 0)


def test_identity_returns_input(op44, rng):
    P = build_preconditioner("none", op44)
    r = rng.standard_normal(op44.shape)
    out = P.apply(r)
    assert np.array_equal(out, r) and out is not r


@pytest.mark.parametrize("mode", ["full", "cross"])
def test_identity_block_solvers_give_identity(mode, op44, rng):
    P = build_preconditioner("ras", op44, corner_mode=mode)
    for g in P.groups:
        g.solver = lambda rhs: rhs
    r = op44.project_out_mean(rng.standard_normal(op44.shape))
    np.testing.assert_allclose(P.apply(r), r, atol=1e-15)


def test_deterministic_application(op44, rng):
    P = build_preconditioner("oras-o2", op44)
    r = rng.standard_normal(op44.shape)
    assert np.array_equal(P.apply(r), P.apply(r))


def test_uniform_mesh_shares_one_factorization(op44):
    assert len(build_preconditioner("ras", op44).groups) == 1
    assert len(build_preconditioner("bj", op44).groups) == 1


def test_fdm_with_cross_rejected(op44):
    with pytest.raises(ValueError):
        build_preconditioner("ras", op44, corner_mode="cross", use_fdm=True)


@pytest.mark.parametrize("kind", ["ras", "oras-o0"])
def test_fdm_matches_dense_blocks_when_exact(kind, op44, rng):
    dense = build_preconditioner(kind, op44)
    fdm = build_preconditioner(kind, op44, use_fdm=True)
    r = rng.standard_normal(op44.shape)
    np.testing.assert_allclose(fdm.apply(r), dense.apply(r), atol=1e-10 * np.abs(dense.apply(r)).max())


def test_single_element_ras_is_local_block_solve(rng):
    op = PseudoLaplacian(Mesh2D(1, 1), 6)
    P = build_preconditioner("ras", op)
    grid = build_extended_grid(0, op.mesh, op.ops, 2)
    assert grid.delta_x == grid.delta_y == 0
    r = rng.standard_normal(op.shape)
    z = np.linalg.solve(assemble_classical_block(grid), r.ravel()).reshape(op.shape)
    np.testing.assert_allclose(P.apply(r), op.project_out_mean(z), atol=1e-12)


def test_single_element_bj_is_direct_solve(rng):
    op = PseudoLaplacian(Mesh2D(1, 1), 6)
    P = build_preconditioner("bj", op)
    b = op.build_rhs(rng.standard_normal((2, 1, 7, 7)))
    np.testing.assert_allclose(op.apply(P.apply(b)), b, atol=1e-10 * np.abs(b).max())


def test_bj_symmetric(op44, rng):
    P = build_preconditioner("bj", op44)
    # residual-space vectors (plain zero mean), where the final projection is invisible
    r, s = (project_out_mean(v) for v in rng.standard_normal((2,) + op44.shape))
    a, b = np.sum(P.apply(r) * s), np.sum(r * P.apply(s))
    assert abs(a - b) <= 1e-11 * abs(a)


def test_bj_beats_unpreconditioned():
    op = PseudoLaplacian(Mesh2D(8, 8), 8)
    assert iterations(op, build_preconditioner("bj", op)) < iterations(op, build_preconditioner("none", op))


def test_optimized_blocks_unpinned_and_nonsingular(op44):
    P = build_preconditioner("oras-o0", op44)
    A = P.groups[0].solver.A
    assert np.linalg.eigvalsh(A)[0] > 1e-8 * np.linalg.eigvalsh(A)[-1]


def test_robin_to_dirichlet_limit(op44, rng):
    # p -> infinity pins the outermost layer, leaving the Dirichlet block of one fewer layer
    big = build_preconditioner("oras-o0", op44, delta=2, p_scale=1e6)
    ras = build_preconditioner("ras", op44, delta=1)
    r = rng.standard_normal(op44.shape)
    ref = ras.apply(r)
    assert np.abs(big.apply(r) - ref).max() <= 1e-4 * np.abs(ref).max()
    assert abs(iterations(op44, big) - iterations(op44, ras)) <= 2


def test_stationary_oras_fixed_point_1d():
    """Two-subdomain 1D analogue: Robin local solves with restricted scatter."""
    n, h = 39, 1.0 / 40
    x = np.linspace(0, 1, n + 2)
    K, M = q1_matrices_1d(x)
    A = K + M
    b = np.sin(3 * x[1:-1]) + 1
    exact = np.linalg.solve(A, b)
    subs = [np.arange(0, 24), np.arange(16, n)]
    owned = [np.arange(0, 20), np.arange(20, n)]
    p = ob.compute_params("o0", np.pi, 1.0, 4 * h).p
    solvers = []
    for s in subs:
        # artificial ends: drop the outside half interval (natural row), add p
        Al = A[np.ix_(s, s)].copy()
        for end, artificial in ((0, s[0] > 0), (-1, s[-1] < n - 1)):
            if artificial:
                Al[end, end] += p - 1 / h - h / 3
        solvers.append(sla.lu_factor(Al))

    def apply_P(r):
        z = np.zeros_like(r)
        for s, o, lu in zip(subs, owned, solvers):
            loc = sla.lu_solve(lu, r[s])
            z[o] = loc[np.searchsorted(s, o)]
        return z

    u = exact.copy()
    np.testing.assert_allclose(u + apply_P(b - A @ u), exact, atol=1e-14)
    u = np.zeros(n)
    for _ in range(60):
        u = u + apply_P(b - A @ u)
    assert np.abs(u - exact).max() < 1e-10 * np.abs(exact).max()


@pytest.mark.parametrize("kind", [Kind.RAS, Kind.ORAS_O0, Kind.ORAS_O2])
def test_schwarz_beats_bj_on_8x8(kind):
    op = PseudoLaplacian(Mesh2D(8, 8), 8)
    assert iterations(op, build_preconditioner(kind, op)) < iterations(op, build_preconditioner("bj", op))
