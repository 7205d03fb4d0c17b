"""Command-line entry point: ``sample``, ``benchmark`` and ``oracle-check``.

Exit codes: 0 success, 1 run error, 2 configuration error. The
``MIED_OUTPUT_DIR`` environment variable overrides ``output.dir``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import targets as T
from .checks import run_checks
from .config import ConfigError
from .metrics import compare
from .optimizer import RunError, run_method

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2
OUTPUT_DIR_ENV = "MIED_OUTPUT_DIR"
TRACE_COLUMNS = ("iter", "log_energy", "w2", "energy_dist", "elapsed_ms")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return "%.17g" % x


def write_csv(path: Path, header, rows, cfg) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = cfgmod.echo_lines(cfg) + [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Parse a CSV written by :func:`write_csv` (echo lines skipped)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    data = [[float(c) if c else math.nan for c in ln.split(",")] for ln in lines[1:]]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def _out_dir(cfg) -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or cfg["output.dir"])


def _load(path) -> dict[str, str]:
    return cfgmod.resolve(cfgmod.load_config(path))


def cmd_sample(args) -> int:
    cfg = _load(args.config)
    exp = cfgmod.build(cfg)
    trace = run_method(cfg["method"], exp.X0, exp.target, exp.mollifier, exp.constraint,
                       **exp.run_kwargs())
    out = _out_dir(cfg)
    write_csv(out / cfg["output.trace"], TRACE_COLUMNS,
              [[getattr(r, c) for c in TRACE_COLUMNS] for r in trace.rows], cfg)
    dim = trace.particles.shape[1]
    write_csv(out / cfg["output.samples"], [f"x{k}" for k in range(dim)],
              trace.particles.tolist(), cfg)
    print(f"wrote {out / cfg['output.trace']} and {out / cfg['output.samples']}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _load(args.config)
    exp = cfgmod.build(cfg)
    box = float(cfg["reference.box"]) if cfg["reference.box"] else None
    init = compare(exp.X0, exp.reference, box=box)
    rows = []
    for method in cfgmod.split_list(cfg["benchmark.methods"]):
        trace = run_method(method, exp.X0, exp.target, exp.mollifier, exp.constraint,
                           **exp.run_kwargs())
        rep = compare(trace.particles, exp.reference, box=box)
        acc = T.test_accuracy(exp.dataset, trace.particles) if exp.dataset is not None else None
        rows.append([method, rep.w2, rep.energy_dist, _log(rep.w2), _log(rep.energy_dist),
                     acc, init.w2, init.energy_dist])
    header = ("method", "w2", "energy_dist", "log_w2", "log_energy_dist", "accuracy",
              "init_w2", "init_energy_dist")
    path = _out_dir(cfg) / cfg["output.comparison"]
    write_csv(path, header, rows, cfg)
    for r in rows:
        print(f"{r[0]:>5}  w2={r[1]:.4g}  energy_dist={r[2]:.4g}"
              + (f"  accuracy={r[5]:.3f}" if r[5] is not None else ""))
    print(f"wrote {path}")
    return EXIT_OK


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def cmd_oracle_check(args) -> int:
    results = run_checks(kappa_override=args.kappa)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name:<{width}}  measured={r.measured:.6g}  {r.criterion}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_RUN


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mied", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sample", help="run one sampler and write trace + samples")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_sample)
    b = sub.add_parser("benchmark", help="compare methods from a shared initialization")
    b.add_argument("--config", required=True)
    b.set_defaults(func=cmd_benchmark)
    o = sub.add_parser("oracle-check", help="run the quadrature and identity checks")
    # negative-control hook: substitute a diagonal shrink factor
    o.add_argument("--kappa", type=float, default=None, help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunError, ValueError, RuntimeError, FloatingPointError, OSError) as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
