"""Iteration counts of block Jacobi, RAS and optimized RAS, with and without corners.

Every preconditioner uses dense local factorizations on an 8x8 periodic mesh
with two overlap layers. The optimized (O0) blocks beat classical RAS when the
diagonal neighbours are part of the subdomain, and fall apart without them.
"""

import sys

from semschwarz.bench import run_experiment, summarize

orders = [int(v) for v in sys.argv[1].split(",")] if len(sys.argv) > 1 else [6, 8, 10, 12]
rows = run_experiment("corner-study", orders)

curves = ["bj", "ras-corners", "ras-cross", "oras-o0-corners", "oras-o0-cross"]
print(f"{'N':>3} " + " ".join(f"{c:>16}" for c in curves))
for entry in summarize("corner-study", rows):
    print(f"{entry['N']:>3} " + " ".join(f"{entry.get(f'iters[{c}]', '-'):>16}" for c in curves))
