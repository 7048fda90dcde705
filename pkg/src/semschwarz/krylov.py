"""Right-preconditioned BiCGStab with residual history and timing."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

BREAKDOWN = 1e-30
TRUE_RESIDUAL_EVERY = 25


@dataclass
class KrylovReport:
    iterations: int = 0
    relative_residuals: list[float] = field(default_factory=lambda: [1.0])
    wall_time_s: float = 0.0
    converged: bool = False
    breakdown_flag: bool = False

    @property
    def final_relative_residual(self) -> float:
        return self.relative_residuals[-1]


def _dot(a, b) -> float:
    return float(np.dot(a.ravel(), b.ravel()))


def _check_finite(name: str, value, iteration: int):
    if not np.all(np.isfinite(value)):
        raise FloatingPointError(f"BiCGStab: non-finite {name} at iteration {iteration}")


def bicgstab(
    apply_A: Callable[[np.ndarray], np.ndarray],
    apply_Pinv: Callable[[np.ndarray], np.ndarray] | None,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 1000,
    atol: float = 0.0,
) -> tuple[np.ndarray, KrylovReport]:
    """Solve ``A x = b`` with BiCGStab, preconditioned on the right.

    Stops when ``||b - A x|| <= max(tol * ||b - A x0||, atol)``. The residual tracked is
    the true (unpreconditioned) residual and is recomputed from scratch every
    25 iterations.

    Returns
    -------
    x, report
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if apply_Pinv is None:
        apply_Pinv = lambda v: v
    t0 = time.perf_counter()
    report = KrylovReport()
    x = np.zeros_like(b) if x0 is None else x0.astype(float, copy=True)
    r = b - apply_A(x)
    norm0 = np.linalg.norm(r)
    _check_finite("initial residual", norm0, 0)
    if norm0 <= atol:
        report.converged = True
        report.wall_time_s = time.perf_counter() - t0
        return x, report
    target = max(tol * norm0, atol)
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    for it in range(1, max_iter + 1):
        rho_new = _dot(r_hat, r)
        # rho scaled by ||r0||^2 so the test does not depend on the size of b
        if abs(rho_new) < BREAKDOWN * norm0**2:
            report.breakdown_flag = True
            break
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        p_hat = apply_Pinv(p)
        v = apply_A(p_hat)
        rv = _dot(r_hat, v)
        if abs(rv) < BREAKDOWN * norm0 * np.linalg.norm(v):
            report.breakdown_flag = True
            break
        alpha = rho / rv
        _check_finite("alpha", alpha, it)
        s = r - alpha * v
        s_norm = np.linalg.norm(s)
        if s_norm <= target:
            x += alpha * p_hat
            report.iterations = it
            report.relative_residuals.append(s_norm / norm0)
            report.converged = True
            break
        s_hat = apply_Pinv(s)
        t = apply_A(s_hat)
        tt = _dot(t, t)
        omega = _dot(t, s) / tt if tt > 0 else 0.0
        x += alpha * p_hat + omega * s_hat
        if it % TRUE_RESIDUAL_EVERY == 0:
            r = b - apply_A(x)
        else:
            r = s - omega * t
        r_norm = np.linalg.norm(r)
        _check_finite("residual", r_norm, it)
        report.iterations = it
        report.relative_residuals.append(r_norm / norm0)
        if r_norm <= target:
            report.converged = True
            break
        if abs(omega) < BREAKDOWN:
            report.breakdown_flag = True
            break
    report.wall_time_s = time.perf_counter() - t0
    if not report.converged:
        log.info(
            "BiCGStab stopped after %d iterations at relative residual %.3e (breakdown=%s)",
            report.iterations, report.relative_residuals[-1], report.breakdown_flag,
        )
    return x, report
