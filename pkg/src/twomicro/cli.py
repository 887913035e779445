"""Command-line runner: ``twomicro run <config.json>`` and ``twomicro list``.

Outputs (written atomically into --out):
  report.json    config echo, defaults table, results, checks, pass flag, wall clock
  sweep.csv      columns: experiment_id, h, value   (one row per sweep point)
  <name>.csv     wavefront heat maps, columns: x0..x{n-1}, angle, slope, status

Exit codes: 0 pass, 2 config error, 3 resource cap, 4 numeric failure,
5 tolerance failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time

from .errors import CapError, ConfigError, TwoMicroError
from .experiments import DEFAULTS, DEFAULTS_VERSION, EXPERIMENTS, SCHEMA, run_experiment

EXIT_PASS, EXIT_CONFIG, EXIT_CAP, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 2, 3, 4, 5
CONFIG_KEYS = {"schema", "experiment", "params", "seed"}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return validate_config(cfg)


def validate_config(cfg) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if cfg.get("schema") != SCHEMA:
        raise ConfigError(f"schema must be {SCHEMA!r}, got {cfg.get('schema')!r}")
    if cfg.get("experiment") not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {list(EXPERIMENTS)}")
    if not isinstance(cfg.get("params", {}), dict):
        raise ConfigError("params must be an object")
    if not isinstance(cfg.get("seed", 0), int):
        raise ConfigError("seed must be an integer")
    return cfg


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run(cfg: dict, out_dir: str = ".", threads: int = 1, seed: int | None = None) -> tuple[int, dict]:
    """Execute one experiment; returns (exit code, report bundle)."""
    cfg = validate_config(cfg)
    seed = cfg.get("seed", 0) if seed is None else seed
    t0 = time.perf_counter()
    outcome = run_experiment(cfg["experiment"], cfg.get("params"), seed, threads)
    bundle = {
        "schema": SCHEMA,
        "config": cfg,
        "seed": seed,
        "defaults_version": DEFAULTS_VERSION,
        "defaults": DEFAULTS[cfg["experiment"]],
        "results": outcome.results,
        "sweeps": [s.to_dict() for s in outcome.sweeps],
        "checks": [c.to_dict() for c in outcome.checks],
        "pass": outcome.passed,
        "wall_clock_s": time.perf_counter() - t0,
    }
    _atomic_write(os.path.join(out_dir, "report.json"),
                  json.dumps(bundle, indent=1, default=_json_default) + "\n")
    rows = [r for s in outcome.sweeps for r in s.csv_rows()]
    _atomic_write(os.path.join(out_dir, "sweep.csv"), _csv_text(["experiment_id", "h", "value"], rows))
    for name, rep in outcome.heatmaps.items():
        hdr = [f"x{a}" for a in range(rep.n)] + ["angle", "slope", "status"]
        rows = [list(c.x_index) + [c.angle_index,
                                   "" if c.regression.no_mass else repr(c.regression.slope), c.status]
                for c in rep.cells]
        _atomic_write(os.path.join(out_dir, f"{name}.csv"), _csv_text(hdr, rows))
    return (EXIT_PASS if outcome.passed else EXIT_TOLERANCE), bundle


def _json_default(o):
    import numpy as np

    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twomicro", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the experiment described by a JSON config",
                       description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("config")
    r.add_argument("--out", default=".", help="output directory (default: current)")
    r.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_parser("list", help="print experiment names and the config schema")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "list":
        print(f"schema: {SCHEMA}  (top-level keys: {', '.join(sorted(CONFIG_KEYS))})")
        for name in EXPERIMENTS:
            print(f"{name}: params {json.dumps(DEFAULTS[name], default=str)}")
        return EXIT_PASS
    try:
        cfg = load_config(args.config)
        code, bundle = run(cfg, args.out, max(1, args.threads), args.seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CapError as e:
        print(f"resource cap: {e}", file=sys.stderr)
        return EXIT_CAP
    except (TwoMicroError, ArithmeticError, ValueError, TypeError, KeyError) as e:
        print(f"numeric failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    for c in bundle["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}: {c['value']} {c['op']} {c['threshold']}")
    print("PASS" if bundle["pass"] else "FAIL")
    return code


if __name__ == "__main__":
    sys.exit(main())
