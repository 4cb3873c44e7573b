"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical or truncation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import experiment
from .config import (
    SWEEP_EPSILONS,
    ConfigError,
    ExperimentConfig,
    SweepSection,
    load_config,
    parse_window,
    validate,
)
from .cqed_walk import ConfigurationError
from .quantum_core import NumericalError, TruncationError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config or run manifest")
    p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    p.add_argument("--steps", type=int)
    p.add_argument("--delta-theta", type=float)
    p.add_argument("--fock-dim", type=int)
    p.add_argument("--grid", type=int, help="phase grid size s (default: fock dim)")
    p.add_argument("--fit-window", help="inclusive step window a..b or a..b:stride")
    p.add_argument("--allow-nondispersive", action="store_true")
    p.add_argument("--compensate", action="store_true", help="experimental per-step drive retuning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasewalk", description="Quantum walk on a circle in phase space")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ideal", "ideal coined walk"),
        ("cqed", "circuit-QED walk"),
        ("classical", "wrapped binomial random walk"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "cqed":
            p.add_argument("--epsilon", type=float, help="drive amplitude, GHz")
    p = sub.add_parser("sweep", help="cqed sweep over drive amplitudes")
    _add_common(p)
    p.add_argument("--epsilon", help="comma-separated drive amplitudes, GHz")
    p = sub.add_parser("validate-dispersive", help="check the dispersive regime")
    _add_common(p)
    p.add_argument("--epsilon", type=float)
    p = sub.add_parser("fit", help="refit an existing sigma.csv")
    p.add_argument("sigma_csv", type=Path)
    p.add_argument("--fit-window", default="2..10:2")
    p.add_argument("--out", type=Path, help="write fit.json here")
    return parser


def resolve_config(args: argparse.Namespace, engine: str | None) -> ExperimentConfig:
    """Config file (or defaults) with command-line overrides applied.

    ``engine=None`` keeps the engine named in the config file.
    """
    cfg = load_config(args.config) if args.config else ExperimentConfig(engine=engine or "cqed")
    if engine is not None:
        cfg = replace(cfg, engine=engine)
    walk, cqed, analysis = cfg.walk, cfg.cqed, cfg.analysis
    if args.steps is not None:
        walk = replace(walk, steps=args.steps)
    if args.delta_theta is not None:
        walk = replace(walk, delta_theta=args.delta_theta)
    if args.grid is not None:
        analysis = replace(analysis, grid=args.grid)
    if args.fit_window is not None:
        analysis = replace(analysis, fit_window=parse_window(args.fit_window))
    if args.allow_nondispersive:
        cqed = replace(cqed, allow_nondispersive=True)
    if args.compensate:
        cqed = replace(cqed, compensate=True)
    eps = getattr(args, "epsilon", None)
    sweep = cfg.sweep
    if args.command == "sweep":
        values = tuple(float(v) for v in eps.split(",")) if eps else (
            cfg.sweep.values if cfg.sweep else SWEEP_EPSILONS
        )
        sweep = SweepSection("epsilon", values) if eps or cfg.sweep is None else cfg.sweep
    elif eps is not None:
        cqed = replace(cqed, epsilon=eps)
    cfg = replace(cfg, walk=walk, cqed=cqed, analysis=analysis, sweep=sweep)
    if args.fock_dim is not None:
        cfg = replace(cfg, fock_dim=args.fock_dim)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            fit = experiment.refit(args.sigma_csv, parse_window(args.fit_window))
            text = json.dumps(fit.as_dict(), indent=2, sort_keys=True)
            print(text)
            if args.out:
                args.out.mkdir(parents=True, exist_ok=True)
                (args.out / "fit.json").write_text(text + "\n")
            return 0
        if args.command == "validate-dispersive":
            cfg = resolve_config(args, "cqed")
            # the regime check is what this command reports, so it must not abort validation
            validate(replace(cfg, cqed=replace(cfg.cqed, allow_nondispersive=True)))
            report = experiment.validate_dispersive(cfg)
            text = json.dumps(report, indent=2, sort_keys=True)
            print(text)
            if args.out:
                args.out.mkdir(parents=True, exist_ok=True)
                (args.out / "dispersive.json").write_text(text + "\n")
            return 0 if report["status"] != "fail" else EXIT_CONFIG
        engine = (None if args.config else "cqed") if args.command == "sweep" else args.command
        cfg = validate(resolve_config(args, engine))
        result = experiment.run_experiment(cfg, args.out)
        results = result if isinstance(result, list) else [result]
        for r in results:
            fit = r.fit_dict()
            summary = {"engine": r.config.engine, "zeta": fit["zeta"], "xi": fit["xi"]}
            if r.config.engine == "cqed":
                summary["epsilon"] = r.config.cqed.epsilon
            print(json.dumps(summary))
        return 0
    except TruncationError as exc:
        print(f"error: {exc} (raise --fock-dim)", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ConfigurationError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
