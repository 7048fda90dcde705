"""Wall time of fast-diagonalization Schwarz preconditioners on a 16x16 mesh.

Both RAS and the optimized variants apply their local inverses with the same
tensor-product FDM kernels, so cost per iteration is essentially equal and
the timing difference comes from the iteration count. Reported times are the
median of three solves.
"""

import logging
import sys

from semschwarz.bench import run_experiment, summarize

logging.basicConfig(level=logging.INFO, format="%(message)s")

orders = [int(v) for v in sys.argv[1].split(",")] if len(sys.argv) > 1 else [8, 12, 16]
rows = run_experiment("fdm-timing", orders)

for entry in summarize("fdm-timing", rows):
    print(
        f"N={entry['N']:>2}  RAS {entry['time[ras-corners-fdm]']:.3f}s  "
        f"O0 {entry['time[oras-o0-corners-fdm]']:.3f}s  "
        f"O2 {entry['time[oras-o2-corners-fdm]']:.3f}s  speedup {entry['speedup']:.2f}"
    )
