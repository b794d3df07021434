"""Command-line front end.

Subcommands: simulate, poincare, sweep, oracle, presets.
Exit codes: 0 success, 1 validation error, 2 I/O error, 3 oracle deviation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, config_from_dict, parse_config
from .model import ModelError, TimeGrid
from .oracle import OracleError
from .recurrence import RecurrenceError
from . import runs
from .sampling import PRESETS

log = logging.getLogger("spinbath")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="figure preset (used when no --config)")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--samples", type=int)
    p.add_argument("--epsilon", type=float, help="decoherence threshold on |r|^2")
    p.add_argument("--sustain", type=float, help="time |r|^2 must stay below epsilon")
    p.add_argument("--max-denominator", type=int, dest="max_denominator")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinbath", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "write |r(t)|^2 time series, metrics and metadata"),
        ("poincare", "exact recurrence time of the rationalized couplings"),
        ("oracle", "compare the engine with the full-state oracle (small N)"),
    ):
        _common(sub.add_parser(name, help=help_))
    sw = sub.add_parser("sweep", help="one summary row per parameter value")
    _common(sw)
    sw.add_argument("--vary", required=True, choices=runs.SWEEP_KEYS)
    sw.add_argument("--values", required=True, help="comma-separated values")
    sub.add_parser("presets", help="list the figure presets")
    return parser


def load_config(args) -> RunConfig:
    if args.config is not None:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
        if args.preset is not None and args.preset != cfg.preset:
            raise ConfigError("--preset conflicts with the preset named in --config")
    elif args.preset is not None:
        cfg = config_from_dict({"preset": args.preset})
    else:
        raise ConfigError("either --config or --preset is required")
    if args.seed is not None:
        try:
            cfg = replace(cfg, spec=cfg.spec.with_seed(args.seed))
        except ModelError as exc:
            raise ConfigError(f"--seed: {exc}") from None
    if args.t_end is not None or args.samples is not None:
        g = cfg.grid
        cfg = replace(cfg, grid=TimeGrid(
            g.t_start,
            args.t_end if args.t_end is not None else g.t_end,
            args.samples if args.samples is not None else g.samples,
        ))
    changes = {k: getattr(args, k) for k in ("epsilon", "sustain", "max_denominator")
               if getattr(args, k) is not None}
    if args.out is not None:
        changes["output"] = str(args.out)
    return replace(cfg, **changes) if changes else cfg


def _print(doc) -> None:
    print(runs.dump_json(doc), end="")


def cmd_presets() -> int:
    for name, p in PRESETS.items():
        print(f"{name}: {p.caption}")
        for g in p.groups:
            c = g.coupling
            dist = f"g={c.mean}" if c.kind == "fixed" else f"g~U[{c.low:g}, {c.high:g}]"
            print(f"    {g.count:>3} particles  {dist}  alpha: {g.alpha}")
        print(f"    grid: [{p.grid.t_start:g}, {p.grid.t_end:.6g}] x {p.grid.samples}")
        if p.notes:
            print(f"    note: {p.notes}")
    return runs.EXIT_OK


def dispatch(args) -> int:
    if args.command == "presets":
        return cmd_presets()
    cfg = load_config(args)
    if args.command == "simulate":
        res = runs.run_simulate(cfg)
        _print(runs.metrics_document(cfg, res.metrics) | {"outputs": {k: str(v) for k, v in res.paths.items()}})
        return runs.EXIT_OK
    if args.command == "poincare":
        _, doc = runs.run_poincare(cfg)
        _print(doc)
        return runs.EXIT_OK
    if args.command == "sweep":
        values = [v.strip() for v in args.values.split(",") if v.strip()]
        conv = float if args.vary == "half_width" else int
        try:
            values = [conv(v) for v in values]
        except ValueError:
            raise ConfigError(f"--values: cannot parse {args.values!r}") from None
        rows = runs.run_sweep(cfg, args.vary, values)
        print(runs.sweep_csv(rows), end="")
        return runs.EXIT_OK
    if args.command == "oracle":
        doc = runs.run_oracle(cfg)
        _print(doc)
        return runs.EXIT_OK if doc["passed"] else runs.EXIT_ORACLE
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return dispatch(args)
    except (ConfigError, ModelError, RecurrenceError, OracleError) as exc:
        log.error("%s", exc)
        return runs.EXIT_VALIDATION
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return runs.EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
