"""Command-line runner: ``fracheat run|list|validate``.

Configuration files are JSON objects::

    {"schema": "fracheat.config/1", "experiment": "dirichlet-steady",
     "params": {"a": 0.5, "N": 512}}

``--seed`` and ``--override KEY=VAL`` take precedence over file values.
Exit status is 0 when every assertion holds, 1 when one fails and 2 for
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._fft import THREADS_ENV
from .experiments import EXPERIMENTS, list_experiments, resolve
from .persist import atomic_write_text, sha256_file, write_csv, write_json

CONFIG_SCHEMA = "fracheat.config/1"
MANIFEST_SCHEMA = "fracheat.manifest/1"
CONFIG_KEYS = {"schema", "experiment", "params", "out"}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_value(text: str):
    """JSON literal if it parses, the raw string otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def config_errors(cfg: dict) -> list:
    errs = []
    for key in sorted(set(cfg) - CONFIG_KEYS):
        errs.append(f"unknown config key {key!r}")
    if cfg.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
        errs.append(f"unsupported schema {cfg.get('schema')!r} (expected {CONFIG_SCHEMA})")
    if not isinstance(cfg.get("params", {}), dict):
        errs.append("params must be an object")
    if "experiment" not in cfg:
        errs.append("no experiment given")
    return errs


def build_config(args) -> dict:
    cfg = load_config(args.config) if args.config else {}
    cfg = dict(cfg)
    cfg["params"] = dict(cfg.get("params", {})) if isinstance(cfg.get("params", {}), dict) else cfg.get("params")
    if getattr(args, "experiment", None):
        cfg["experiment"] = args.experiment
    if isinstance(cfg.get("params"), dict):
        exp = EXPERIMENTS.get(cfg.get("experiment"))
        if args.seed is not None and (exp is None or "seed" in exp.params):
            cfg["params"]["seed"] = args.seed
        for item in args.override or []:
            if "=" not in item:
                raise UsageError(f"override must look like KEY=VAL, got {item!r}")
            key, val = item.split("=", 1)
            cfg["params"][key.strip()] = parse_value(val)
    if getattr(args, "out", None):
        cfg["out"] = args.out
    return cfg


def validate(cfg: dict):
    """Return ``(resolved_params, errors)`` for a config dict."""
    errs = config_errors(cfg)
    if "experiment" not in cfg or not isinstance(cfg.get("params", {}), dict):
        return {}, errs
    params, perr = resolve(cfg["experiment"], cfg.get("params", {}))
    return params, errs + perr


def _write_plot(path, rows) -> None:
    lines = ["# x y" + (" series" if rows and len(rows[0]) > 2 else "")]
    for r in rows:
        lines.append(" ".join(repr(float(v)) if isinstance(v, (float, np.floating, int, np.integer)) else str(v)
                              for v in r))
    atomic_write_text(path, "\n".join(lines) + "\n")


def run(cfg: dict) -> dict:
    """Execute a validated config and write all outputs; returns the manifest."""
    params, errs = validate(cfg)
    if errs:
        raise UsageError("; ".join(errs))
    if not cfg.get("out"):
        raise UsageError("no output directory given (use --out)")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    exp = EXPERIMENTS[cfg["experiment"]]
    t0 = time.perf_counter()
    try:
        res = exp.runner(params)
    except ValueError as exc:
        raise UsageError(f"{exp.name}: {exc}")
    wall = time.perf_counter() - t0
    files = []
    for name, (header, rows) in res.tables.items():
        write_csv(out / name, header, rows)
        files.append(name)
    for name, rows in res.plots.items():
        _write_plot(out / name, rows)
        files.append(name)
    for name, obj in res.extra_json.items():
        write_json(out / name, obj)
        files.append(name)
    assertions = {k: bool(v) for k, v in res.assertions.items()}
    write_json(out / "summary.json", {
        "experiment": exp.name,
        "anchor": exp.anchor,
        "params": params,
        "assertions": assertions,
        "pass": all(assertions.values()),
        "summary": res.summary,
    })
    files.append("summary.json")
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "config": {"schema": CONFIG_SCHEMA, "experiment": exp.name, "params": params},
        "anchor": exp.anchor,
        "artifacts": {name: sha256_file(out / name) for name in sorted(files)},
        "wall_time_s": wall,
        "assertions": assertions,
        "pass": all(assertions.values()),
        "adaptive_tolerance": exp.adaptive_tolerance,
        "environment": {"fracheat": __version__, "python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__, "threads": os.environ.get(THREADS_ENV, "1")},
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracheat", description="Run fractional heat-equation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the available experiments")
    for name in ("run", "validate"):
        sp = sub.add_parser(name, help=f"{name} an experiment configuration")
        sp.add_argument("experiment", nargs="?", help="experiment name (overrides the config file)")
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--override", action="append", metavar="KEY=VAL", help="set a parameter (repeatable)")
        if name == "run":
            sp.add_argument("--out", help="output directory")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "list":
        cat = list_experiments()
        width = max(len(n) for n, _, _ in cat)
        for name, desc, anchor in cat:
            print(f"{name:<{width}}  {desc}  [{anchor}]")
        return EXIT_OK
    try:
        cfg = build_config(args)
        if args.command == "validate":
            params, errs = validate(cfg)
            for e in errs:
                print(f"error: {e}", file=sys.stderr)
            if errs:
                return EXIT_USAGE
            print(json.dumps({"experiment": cfg["experiment"], "params": params}, indent=2, sort_keys=True))
            return EXIT_OK
        manifest = run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for k, v in manifest["assertions"].items():
        print(f"{'PASS' if v else 'FAIL'}  {k}")
    print(f"{cfg['experiment']}: {'pass' if manifest['pass'] else 'FAIL'} ({manifest['wall_time_s']:.1f} s)")
    return EXIT_OK if manifest["pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
