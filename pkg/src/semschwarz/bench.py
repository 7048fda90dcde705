"""Benchmark harness: single pseudo-Poisson solves and the two parameter sweeps.

``corner-study``
    iteration counts of BJ, RAS and ORAS-O0 with and without corner nodes,
    dense (non-FDM) blocks, 8x8 elements.
``fdm-timing``
    solve times of RAS, ORAS-O0 and ORAS-O2 with fast-diagonalization blocks
    and corners, 16x16 elements, median of three repetitions.

Usage::

    python -m semschwarz solve --elements 8x8 --order 8 --precond oras-o0
    python -m semschwarz experiment corner-study --orders 6,8,10,12 --out e1.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import statistics
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .krylov import bicgstab
from .pressure_op import PseudoLaplacian, project_out_mean
from .precond import Kind, build_preconditioner
from .sem_core import Mesh2D

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "experiment", "precond", "corners", "fdm", "N", "Nv", "Ex", "Ey",
    "iterations", "wall_time_s", "final_rel_residual", "converged",
)
EXPERIMENTS = ("corner-study", "fdm-timing")
DEFAULT_ORDERS = (6, 8, 10, 12, 14, 16)


@dataclass
class RunConfig:
    elements: tuple[int, int] = (8, 8)
    order: int = 8
    overlap: int = 2
    precond: str = "ras"
    corners: bool = True
    fdm: bool = False
    tol: float = 1e-8
    max_iter: int = 5000
    seed: int = 0
    domain: tuple[float, float] = (2 * math.pi, 2 * math.pi)
    kmin: float | None = None
    eta_shift: float = 0.0
    rhs: str = "noise"
    repeats: int = 1
    experiment: str = "single"
    out: str | None = None


@dataclass
class ResultRow:
    experiment: str
    precond: str
    corners: str
    fdm: str
    N: int
    Nv: int
    Ex: int
    Ey: int
    iterations: int
    wall_time_s: float
    final_rel_residual: float
    converged: bool
    setup_time_s: float = field(default=0.0, compare=False)

    def csv_values(self) -> list[str]:
        return [
            self.experiment, self.precond, self.corners, self.fdm,
            str(self.N), str(self.Nv), str(self.Ex), str(self.Ey),
            str(self.iterations), f"{self.wall_time_s:.6f}",
            f"{self.final_rel_residual:.6e}", "true" if self.converged else "false",
        ]


def manufactured_rhs(op: PseudoLaplacian) -> np.ndarray:
    """``E p*`` for ``p* = sin(2 pi x / Lx) sin(2 pi y / Ly)`` sampled on the GL nodes."""
    X, Y = op.mesh.gl_coordinates(op.ops)
    p = np.sin(2 * np.pi * X / op.mesh.length_x) * np.sin(2 * np.pi * Y / op.mesh.length_y)
    return op.apply(p)


def run_single(config: RunConfig) -> ResultRow:
    """Build everything for ``config``, run one preconditioned BiCGStab solve."""
    Ex, Ey = config.elements
    N = config.order
    mesh = Mesh2D(Ex, Ey, *config.domain)
    t0 = time.perf_counter()
    op = PseudoLaplacian(mesh, N)
    kind = Kind(config.precond)
    P = build_preconditioner(
        kind, op, config.overlap, "full" if config.corners else "cross", config.fdm,
        k_min=config.kmin, eta_shift=config.eta_shift,
    )
    setup = time.perf_counter() - t0

    rng = np.random.default_rng(config.seed)
    noise_b = rng.standard_normal(op.shape)
    x0 = op.project_out_mean(rng.standard_normal(op.shape))
    if config.rhs == "noise":
        b = project_out_mean(noise_b)
    elif config.rhs == "manufactured":
        b = manufactured_rhs(op)
    else:
        raise ValueError(f"unknown rhs mode {config.rhs!r}")

    times = []
    for _ in range(max(1, config.repeats)):
        _, rep = bicgstab(op.apply, P.apply, b, x0, config.tol, config.max_iter)
        times.append(rep.wall_time_s)
    schwarz = kind in (Kind.RAS, Kind.ORAS_O0, Kind.ORAS_O2)
    return ResultRow(
        experiment=config.experiment,
        precond=kind.value,
        corners=("on" if config.corners else "off") if schwarz else "n/a",
        fdm=("on" if config.fdm else "off") if schwarz else "n/a",
        N=N, Nv=N + 1, Ex=Ex, Ey=Ey,
        iterations=rep.iterations,
        wall_time_s=statistics.median(times),
        final_rel_residual=rep.final_relative_residual,
        converged=rep.converged,
        setup_time_s=setup,
    )


def experiment_variants(name: str) -> tuple[RunConfig, list[dict]]:
    """Base configuration and preconditioner variants of a named sweep."""
    if name == "corner-study":
        base = RunConfig(elements=(8, 8), fdm=False, experiment=name)
        variants = [
            dict(precond="bj"),
            dict(precond="ras", corners=True),
            dict(precond="ras", corners=False),
            dict(precond="oras-o0", corners=True),
            dict(precond="oras-o0", corners=False),
        ]
    elif name == "fdm-timing":
        base = RunConfig(elements=(16, 16), fdm=True, corners=True, repeats=3, experiment=name)
        variants = [dict(precond="ras"), dict(precond="oras-o0"), dict(precond="oras-o2")]
    else:
        raise ValueError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    return base, variants


def curve_name(row: ResultRow) -> str:
    parts = [row.precond]
    if row.corners != "n/a":
        parts.append("corners" if row.corners == "on" else "cross")
    if row.fdm == "on":
        parts.append("fdm")
    return "-".join(parts)


def write_csv(rows, path: Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_values())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


def summarize(name: str, rows: list[ResultRow]) -> list[dict]:
    """Per-N summary; for ``fdm-timing`` includes ``speedup = t(RAS) / t(ORAS-O0)``."""
    by_n: dict[int, dict[str, ResultRow]] = {}
    for r in rows:
        by_n.setdefault(r.N, {})[curve_name(r)] = r
    out = []
    for N in sorted(by_n):
        entry = {"N": N, "Nv": N + 1}
        for curve, r in sorted(by_n[N].items()):
            entry[f"iters[{curve}]"] = r.iterations
            entry[f"time[{curve}]"] = round(r.wall_time_s, 6)
        if name == "fdm-timing":
            ras, o0 = by_n[N].get("ras-corners-fdm"), by_n[N].get("oras-o0-corners-fdm")
            if ras and o0 and o0.wall_time_s > 0:
                entry["speedup"] = round(ras.wall_time_s / o0.wall_time_s, 4)
        out.append(entry)
    return out


def run_experiment(
    name: str,
    orders=DEFAULT_ORDERS,
    out: str | Path | None = None,
    overrides: dict | None = None,
) -> list[ResultRow]:
    """Run a full sweep; write CSV, summary, one file per curve, and a failure manifest."""
    orders = list(orders)
    if not orders or min(orders) < 4:
        raise ValueError("orders must be a nonempty list with every N >= 4")
    base, variants = experiment_variants(name)
    if overrides:
        base = replace(base, **overrides)
    rows: list[ResultRow] = []
    failures: list[str] = []
    for N in orders:
        for v in variants:
            cfg = replace(base, order=N, **v)
            try:
                row = run_single(cfg)
            except Exception as exc:  # keep the sweep going; failures go to the manifest
                log.exception("run failed: %s", cfg)
                failures.append(f"N={N} {v}: {type(exc).__name__}: {exc}")
                continue
            log.info("%s N=%d %s: %d iterations, %.3fs", name, N, curve_name(row), row.iterations, row.wall_time_s)
            rows.append(row)
    if out is not None:
        out = Path(out)
        write_csv(rows, out)
        summary = summarize(name, rows)
        if summary:
            keys = list(dict.fromkeys(k for s in summary for k in s))
            with open(out.with_suffix(".summary.csv"), "w", encoding="utf-8", newline="") as fh:
                w = csv.DictWriter(fh, keys, lineterminator="\n")
                w.writeheader()
                w.writerows(summary)
        column = "wall_time_s" if name == "fdm-timing" else "iterations"
        curves: dict[str, list[ResultRow]] = {}
        for r in rows:
            curves.setdefault(curve_name(r), []).append(r)
        for curve, rs in curves.items():
            lines = [f"# Nv {column}"] + [f"{r.Nv} {getattr(r, column)}" for r in rs]
            out.with_suffix(f".{curve}.dat").write_text("\n".join(lines) + "\n", encoding="utf-8")
        if failures:
            out.with_suffix(".failures.txt").write_text("\n".join(failures) + "\n", encoding="utf-8")
    return rows


# -- command line ----------------------------------------------------------

def _pair(text: str, cast, sep: str):
    a, b = text.lower().split(sep)
    return cast(a), cast(b)


def _onoff(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, keys mirror the flags."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--elements", type=lambda s: _pair(s, int, "x"), help="ExE, e.g. 8x8")
    p.add_argument("--order", type=int, help="polynomial order N")
    p.add_argument("--overlap", type=int, help="overlap in GL node layers")
    p.add_argument("--precond", choices=[k.value for k in Kind])
    p.add_argument("--corners", type=_onoff)
    p.add_argument("--fdm", type=_onoff)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--domain", type=lambda s: _pair(s, float, ","), help="Lx,Ly")
    p.add_argument("--kmin", type=float)
    p.add_argument("--eta-shift", type=float)
    p.add_argument("--rhs", choices=["noise", "manufactured"])
    p.add_argument("--repeats", type=int)
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="key=value config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semschwarz", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="single pseudo-Poisson solve")
    _add_run_flags(solve)
    exp = sub.add_parser("experiment", help="parameter sweep")
    exp.add_argument("name", choices=EXPERIMENTS)
    exp.add_argument("--orders", type=lambda s: [int(v) for v in s.split(",")], help="comma-separated N list")
    _add_run_flags(exp)
    return parser


_CASTS = {
    "elements": lambda s: _pair(s, int, "x"),
    "domain": lambda s: _pair(s, float, ","),
    "corners": _onoff,
    "fdm": _onoff,
    "orders": lambda s: [int(v) for v in s.split(",")],
}


def _merge(args: argparse.Namespace) -> dict:
    """Config-file values, then explicit flags on top."""
    merged: dict = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            merged[key] = _CASTS.get(key, _guess)(value)
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "name", "verbose"):
            merged[key] = value
    return merged


def _guess(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    values = _merge(args)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known - {"orders"}
    if unknown:
        raise SystemExit(f"unknown configuration keys: {sorted(unknown)}")
    if args.command == "solve":
        cfg = RunConfig(**{k: v for k, v in values.items() if k in known})
        row = run_single(cfg)
        text = write_csv([row], Path(cfg.out) if cfg.out else None)
        if not cfg.out:
            sys.stdout.write(text)
        return 0 if row.converged else 1
    orders = values.pop("orders", DEFAULT_ORDERS)
    out = values.pop("out", None)
    overrides = {k: v for k, v in values.items() if k in known}
    rows = run_experiment(args.name, orders, out, overrides)
    if out is None:
        sys.stdout.write(write_csv(rows))
    for s in summarize(args.name, rows):
        if "speedup" in s:
            print(f"N={s['N']}: speedup t(RAS)/t(ORAS-O0) = {s['speedup']}", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
