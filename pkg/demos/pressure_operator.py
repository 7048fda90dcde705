"""Build the pseudo-Laplacian and watch a manufactured pressure converge spectrally.

The pressure ``p* = sin x sin y`` is recovered from ``E p = -D grad p*`` on a
4x4 periodic mesh for a few polynomial orders. The error drops by orders of
magnitude with every step in ``N`` while the element count stays fixed.

Run with ``python3 demos/pressure_operator.py``.
"""

import numpy as np

from semschwarz import Mesh2D, PseudoLaplacian, bicgstab, build_preconditioner

mesh = Mesh2D(4, 4)
print(f"{'N':>3} {'unknowns':>9} {'iters':>6} {'max error':>11}")
for N in (4, 6, 8, 10, 12):
    op = PseudoLaplacian(mesh, N)

    # gradient of the target pressure on the velocity (GLL) nodes
    Xv, Yv = mesh.gll_coordinates(op.ops)
    grad = np.stack([np.cos(Xv) * np.sin(Yv), np.sin(Xv) * np.cos(Yv)])
    b = -op.build_rhs(grad)

    P = build_preconditioner("ras", op)
    p, rep = bicgstab(op.apply, P.apply, b, tol=1e-13, max_iter=2000)

    X, Y = mesh.gl_coordinates(op.ops)
    err = op.project_out_mean(p) - op.project_out_mean(np.sin(X) * np.sin(Y))
    print(f"{N:>3} {op.size:>9} {rep.iterations:>6} {np.abs(err).max():>11.2e}")
