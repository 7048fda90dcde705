"""Independent reference constructions shared by several test modules."""

import numpy as np

from semschwarz.sem_core import Mesh2D, build_quadrature


def lagrange_basis(nodes):
    """Independent Lagrange basis as numpy Polynomial objects (oracle helper)."""
    P = np.polynomial.Polynomial
    basis = []
    for j, xj in enumerate(nodes):
        others = np.delete(nodes, j)
        num = P.fromroots(others)
        basis.append(num / num(xj))
    return basis


def kronecker_pressure_oracle(mesh: Mesh2D, N: int) -> np.ndarray:
    """Dense D M^-1 D^T built from Kronecker factors and an explicit gather matrix."""
    q = build_quadrature("gll", N)
    xg, wg = np.polynomial.legendre.leggauss(N - 1)
    hb, lb = lagrange_basis(q.nodes), lagrange_basis(xg)
    xq, wq = np.polynomial.legendre.leggauss(N + 2)
    B = np.array([[np.sum(wq * l(xq) * h(xq)) for h in hb] for l in lb])
    C = np.array([[np.sum(wq * l(xq) * h.deriv()(xq)) for h in hb] for l in lb])
    hx, hy = mesh.element_size_x, mesh.element_size_y
    Dx_e = 0.5 * hy * np.kron(B, C)
    Dy_e = 0.5 * hx * np.kron(C, B)
    K = mesh.n_elements
    n, m = N + 1, N - 1
    # explicit gather matrix Q: global GLL -> local
    Ex, Ey = mesh.elements_x, mesh.elements_y
    n_glob = Ex * N * Ey * N
    Q = np.zeros((K * n * n, n_glob))
    for k in range(K):
        ex, ey = k % Ex, k // Ex
        for j in range(n):
            for i in range(n):
                gx, gy = (ex * N + i) % (Ex * N), (ey * N + j) % (Ey * N)
                Q[(k * n + j) * n + i, gy * Ex * N + gx] = 1.0
    Mloc = 0.25 * hx * hy * np.kron(q.weights, q.weights)
    Mglob = Q.T @ np.tile(Mloc, K)
    Dx = np.kron(np.eye(K), Dx_e) @ Q
    Dy = np.kron(np.eye(K), Dy_e) @ Q
    return Dx @ np.diag(1 / Mglob) @ Dx.T + Dy @ np.diag(1 / Mglob) @ Dy.T
