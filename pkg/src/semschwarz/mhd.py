"""Explicit RK2 stepper for incompressible MHD in Elsasser variables.

Each stage solves the consistent pressure Poisson problem for ``Z+`` and
``Z-`` so that the stage velocity is discretely divergence free.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .krylov import KrylovReport, bicgstab
from .precond import build_preconditioner
from .pressure_op import PseudoLaplacian
from .sem_core import (
    Mesh2D,
    apply_divergence,
    apply_gradient,
    apply_stiffness,
    local_mass,
    physical_derivatives,
)


class PressureSolveError(RuntimeError):
    def __init__(self, message: str, report: KrylovReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class PhysicalParams:
    nu: float = 0.0
    eta_resistivity: float = 0.0

    def __post_init__(self):
        if self.nu < 0 or self.eta_resistivity < 0:
            raise ValueError("viscosity and resistivity must be non-negative")

    @property
    def nu_plus(self) -> float:
        return 0.5 * (self.nu + self.eta_resistivity)

    @property
    def nu_minus(self) -> float:
        return 0.5 * (self.nu - self.eta_resistivity)


@dataclass
class MhdState:
    Z_plus: np.ndarray
    Z_minus: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    time: float = 0.0
    dt: float = 0.0


def elsasser(u: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return u + b, u - b


def recover_physical(state: MhdState) -> tuple[np.ndarray, np.ndarray]:
    """Velocity and magnetic field ``(u, b)`` from the Elsasser pair."""
    u = 0.5 * (state.Z_plus + state.Z_minus)
    b = 0.5 * (state.Z_plus - state.Z_minus)
    return u, b


class ElsasserRK2:
    """Two-stage RK (coefficients ``1/k`` for ``k = 2, 1``) with pressure projection.

    Parameters
    ----------
    mesh, N : mesh and polynomial order
    params : viscosity and resistivity
    precond : preconditioner kind for the pressure solves
    tol, max_iter : BiCGStab stopping controls
    """

    def __init__(
        self,
        mesh: Mesh2D,
        N: int,
        params: PhysicalParams = PhysicalParams(),
        precond: str = "ras",
        tol: float = 1e-10,
        max_iter: int = 2000,
        **precond_options,
    ):
        self.mesh = mesh
        self.params = params
        self.E = PseudoLaplacian(mesh, N)
        self.ops = self.E.ops
        self.gs = self.E.gs
        self.mass = local_mass(self.ops, mesh)
        self.inv_mass = self.E.inv_mass
        self.P = build_preconditioner(precond, self.E, **precond_options)
        self.tol = tol
        self.max_iter = max_iter
        self.reports: list[KrylovReport] = []

    # -- fields ---------------------------------------------------------
    def interpolate(self, f) -> np.ndarray:
        """Nodal GLL values of ``f(x, y)`` (scalar or tuple of components)."""
        X, Y = self.mesh.gll_coordinates(self.ops)
        return np.asarray(f(X, Y), dtype=float)

    def initial_state(self, u: np.ndarray, b: np.ndarray, dt: float) -> MhdState:
        zp, zm = elsasser(u, b)
        zero = np.zeros(self.E.shape)
        return MhdState(zp, zm, zero.copy(), zero.copy(), 0.0, dt)

    def divergence(self, Z: np.ndarray) -> np.ndarray:
        return apply_divergence(Z, self.ops, self.mesh)

    def relative_divergence(self, Z: np.ndarray) -> float:
        nz = np.linalg.norm(Z)
        return float(np.linalg.norm(self.divergence(Z)) / nz) if nz > 0 else 0.0

    def energy(self, state: MhdState) -> float:
        """``int (|Z+|^2 + |Z-|^2) / 4``, i.e. the kinetic plus magnetic energy."""
        # Z is continuous, so local quadrature sums equal the assembled ones
        return 0.25 * float(np.sum(self.mass * (state.Z_plus**2 + state.Z_minus**2)))

    # -- operators ------------------------------------------------------
    def _weak_advection(self, Z_adv: np.ndarray, Z: np.ndarray) -> np.ndarray:
        out = np.empty_like(Z)
        for c in range(Z.shape[0]):
            dx, dy = physical_derivatives(Z[c], self.ops, self.mesh)
            out[c] = self.mass * (Z_adv[0] * dx + Z_adv[1] * dy)
        return out

    def advective_term(self, Z_adv: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """Assembled ``M (Z_adv . grad) Z`` by collocation on the GLL nodes."""
        return self.gs(self._weak_advection(Z_adv, Z))

    def _stiffness(self, Z: np.ndarray) -> np.ndarray:
        return np.stack([apply_stiffness(Z[c], self.ops, self.mesh) for c in range(Z.shape[0])])

    def _tendency(self, Z: np.ndarray, Z_other: np.ndarray, nu_same: float, nu_cross: float) -> np.ndarray:
        """``M^-1 (M A Z + nu_same L Z + nu_cross L Z_other)`` with one gather-scatter."""
        w = self._weak_advection(Z_other, Z)
        if nu_same:
            w += nu_same * self._stiffness(Z)
        if nu_cross:
            w += nu_cross * self._stiffness(Z_other)
        return self.inv_mass * self.gs(w)

    def _project(self, g: np.ndarray, p_guess: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rhs = self.E.build_rhs(g)
        # warm starts can make tol * ||r0|| unreachable; floor it at tol * ||b||
        atol = self.tol * np.linalg.norm(rhs)
        p, rep = bicgstab(self.E.apply, self.P.apply, rhs, p_guess, self.tol, self.max_iter, atol)
        self.reports.append(rep)
        if not rep.converged:
            raise PressureSolveError(
                f"pressure solve did not converge ({rep.iterations} iterations, "
                f"residual {rep.final_relative_residual:.2e})",
                rep,
            )
        grad = self.inv_mass * self.gs(apply_gradient(p, self.ops, self.mesh))
        return grad - g, p

    # -- time stepping --------------------------------------------------
    def rk_stage(self, base: MhdState, current: MhdState, k: int) -> MhdState:
        """One stage ``Z_j = Z^n - (dt/k) M^-1 (M A Z + nu L Z - D^T p)`` evaluated at ``current``."""
        dt, pr = base.dt, self.params
        h = dt / k
        zp, zm = current.Z_plus, current.Z_minus
        g_plus = h * self._tendency(zp, zm, pr.nu_plus, pr.nu_minus) - base.Z_plus
        g_minus = h * self._tendency(zm, zp, pr.nu_plus, pr.nu_minus) - base.Z_minus
        zp_new, sp = self._project(g_plus, h * current.p_plus)
        zm_new, sm = self._project(g_minus, h * current.p_minus)
        return MhdState(zp_new, zm_new, sp / h, sm / h, base.time + dt / k, dt)

    def step(self, state: MhdState) -> MhdState:
        stage = self.rk_stage(state, state, 2)
        new = self.rk_stage(state, stage, 1)
        new.time = state.time + state.dt
        return new

    def run(self, state: MhdState, n_steps: int, callback=None) -> MhdState:
        for _ in range(n_steps):
            state = self.step(state)
            if callback is not None:
                callback(state)
        return state

    def with_dt(self, state: MhdState, dt: float) -> MhdState:
        return replace(state, dt=dt)
