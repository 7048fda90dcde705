import numpy as np
import pytest

from semschwarz.mhd import (
    ElsasserRK2,
    MhdState,
    PhysicalParams,
    PressureSolveError,
    elsasser,
    recover_physical,
)
from semschwarz.sem_core import Mesh2D


@pytest.fixture(scope="module")
def stepper():
    return ElsasserRK2(Mesh2D(2, 2), 10, PhysicalParams(0.05, 0.02), tol=1e-12)


def taylor_green(st):
    u = st.interpolate(lambda x, y: (-np.sin(y), np.sin(x)))
    b = st.interpolate(lambda x, y: (-np.sin(y), np.sin(2 * x)))
    return u, b


def test_params():
    pr = PhysicalParams(0.3, 0.1)
    assert pr.nu_plus + pr.nu_minus == pytest.approx(0.3)
    assert pr.nu_plus - pr.nu_minus == pytest.approx(0.1)
    assert PhysicalParams(0.2, 0.2).nu_minus == 0.0
    with pytest.raises(ValueError):
        PhysicalParams(-1.0, 0.0)


def test_recover_physical(rng):
    u, b = rng.standard_normal((2, 2, 4, 5, 5))
    zp, zm = elsasser(u, b)
    z = np.zeros((4, 5, 5))
    ur, br = recover_physical(MhdState(zp, zm, z, z))
    np.testing.assert_allclose(ur, u, atol=1e-15)
    np.testing.assert_allclose(br, b, atol=1e-15)
    assert np.all(recover_physical(MhdState(zp, zp, z, z))[1] == 0)
    assert np.all(recover_physical(MhdState(zp, -zp, z, z))[0] == 0)


def test_advection_of_constant_is_zero(stepper, rng):
    n = stepper.ops.n_velocity
    adv = rng.standard_normal((2, 4, n, n))
    const = np.stack([np.full((4, n, n), 1.3), np.full((4, n, n), -0.4)])
    assert np.abs(stepper.advective_term(adv, const)).max() < 1e-12


def test_advection_matches_analytic_projection(stepper):
    ones, zeros = (stepper.interpolate(lambda x, y: c + 0 * x) for c in (1.0, 0.0))
    Z = np.stack([stepper.interpolate(lambda x, y: np.sin(x)), zeros])
    got = stepper.advective_term(np.stack([ones, zeros]), Z)
    expect = stepper.gs(stepper.mass * stepper.interpolate(lambda x, y: np.cos(x)))
    np.testing.assert_allclose(got[0], expect, atol=1e-7 * np.abs(expect).max())
    assert np.abs(got[1]).max() == 0


def test_advection_bilinear(stepper, rng):
    n = stepper.ops.n_velocity
    a, b, c, d = rng.standard_normal((4, 2, 4, n, n))
    f = stepper.advective_term
    np.testing.assert_allclose(f(2 * a - b, c), 2 * f(a, c) - f(b, c), atol=1e-12 * np.abs(f(a, c)).max())
    np.testing.assert_allclose(f(a, 3 * c + d), 3 * f(a, c) + f(a, d), atol=1e-12 * np.abs(f(a, c)).max())


def test_zero_state_is_fixed_point(stepper):
    n = stepper.ops.n_velocity
    zero = np.zeros((2, 4, n, n))
    s = stepper.run(stepper.initial_state(zero, zero, 1e-2), 3)
    assert np.all(s.Z_plus == 0) and np.all(s.Z_minus == 0)
    assert s.time == pytest.approx(3e-2)


def test_symmetry_without_magnetic_field():
    st = ElsasserRK2(Mesh2D(2, 2), 6, PhysicalParams(0.05, 0.05), tol=1e-12)
    u, _ = taylor_green(st)
    s = st.run(st.initial_state(u, np.zeros_like(u), 1e-2), 10)
    assert np.abs(s.Z_plus - s.Z_minus).max() <= 1e-12


@pytest.mark.parametrize("k", [2, 1])
def test_stage_divergence_controlled(stepper, k):
    u, b = taylor_green(stepper)
    s0 = stepper.initial_state(u, b, 1e-3)
    stage = stepper.rk_stage(s0, s0, k)
    assert stepper.relative_divergence(stage.Z_plus) <= 10 * stepper.tol
    assert stepper.relative_divergence(stage.Z_minus) <= 10 * stepper.tol
    assert stage.time == pytest.approx(1e-3 / k)


def test_inviscid_energy_drift_is_second_order():
    """Energy error against a fine-step run shrinks at least 4x per halving."""
    st = ElsasserRK2(Mesh2D(2, 2), 6, PhysicalParams(), tol=1e-12)
    u, b = taylor_green(st)
    T = 0.1

    def energy(dt):
        return st.energy(st.run(st.initial_state(u, b, dt), int(round(T / dt))))

    ref = energy(T / 160)
    drift = [abs(energy(dt) - ref) for dt in (T / 10, T / 20, T / 40)]
    ratios = np.array(drift[:-1]) / np.array(drift[1:])
    assert np.all((ratios > 3.5) & (ratios < 8.5)), ratios


def test_failed_pressure_solve_raises():
    st = ElsasserRK2(Mesh2D(2, 2), 6, PhysicalParams(), precond="none", tol=1e-12, max_iter=1)
    u, b = taylor_green(st)
    with pytest.raises(PressureSolveError) as info:
        st.step(st.initial_state(u, b, 1e-2))
    assert info.value.report.iterations == 1
