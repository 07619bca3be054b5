"""Command-line front end.

Subcommands: generate, run, tightness, analyze, plot-data. Exit codes:
0 success, 2 config error, 3 instance error, 4 oracle failure, 5 divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import analysis
from .errors import ConfigError, InstanceError, OracleFailure, StackgradError
from .estimator import PositiveBasis, SamplingPlan
from .experiments import (
    ExperimentConfig,
    export_convergence_data,
    export_tightness_data,
    run_sweep,
)
from .games import (
    InstanceOptions,
    generate_instance,
    load_instance,
    save_instance,
    smoothness_constants,
)
from .oracles import ORACLE_KINDS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSTANCE = 3
EXIT_ORACLE = 4
EXIT_DIVERGED = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackgrad",
        description="Stackelberg solver experiments driven by inexact best responses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a random quadratic instance file")
    p_gen.add_argument("n", type=int)
    p_gen.add_argument("m", type=int)
    p_gen.add_argument("seed", type=int)
    p_gen.add_argument("--out", required=True, help="instance file to write")
    p_gen.add_argument("--shift", type=float, default=0.1, help="diagonal shift c in G^T G + c I")
    p_gen.add_argument("--scale", type=float, default=None, help="entry scale of G (default 1/sqrt(n+m))")

    for name, descr in (("run", "epsilon sweep"), ("tightness", "bound-tightness study")):
        p = sub.add_parser(name, help=f"run the {descr} and write a result bundle")
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--out", help="output bundle directory (overrides config)")
        p.add_argument("--instance", help="instance file (overrides config instance source)")
        p.add_argument("--seed", type=int, help="base seed (overrides config)")
        p.add_argument("--eps", help="comma-separated epsilon list (overrides config)")
        p.add_argument("--alpha", type=float, help="leader stepsize")
        p.add_argument("--delta", type=float, help="sampling radius")
        p.add_argument("--iters", type=int, help="iterations per run")
        p.add_argument("--oracle", choices=ORACLE_KINDS, help="oracle kind")
        p.add_argument("--reps", type=int, help="seeds per epsilon")

    p_an = sub.add_parser("analyze", help="print the theory constants for one (instance, eps)")
    p_an.add_argument("--instance", required=True, help="instance file")
    p_an.add_argument("--eps", type=float, required=True)
    p_an.add_argument("--delta", type=float, default=0.1)

    p_pd = sub.add_parser("plot-data", help="export plot-ready CSV from a result bundle")
    p_pd.add_argument("kind", choices=("convergence", "tightness"))
    p_pd.add_argument("--bundle", required=True, help="bundle directory")
    p_pd.add_argument("--out", required=True, help="CSV file to write")

    return parser


def cmd_generate(args) -> int:
    options = InstanceOptions(shift=args.shift, scale=args.scale)
    game, rejections = generate_instance(args.n, args.m, args.seed, options)
    save_instance(game, args.out)
    sc = smoothness_constants(game)
    kappa_certified, kappa_tight = analysis.kappa(game)
    print(f"wrote {args.out}")
    print(f"lambda_min(H) = {sc.mu_f!r}, lambda_max(H) = {sc.l_f!r}")
    print(f"kappa_tight = {kappa_tight!r}, kappa_certified = {kappa_certified!r}")
    print(f"rejections = {rejections}")
    return EXIT_OK


def _sweep_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    elif args.instance:
        cfg = ExperimentConfig(instance={"file": args.instance})
    else:
        raise ConfigError("either --config or --instance is required")
    if args.instance:
        cfg = replace(cfg, instance={"file": args.instance})
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.eps:
        try:
            eps = tuple(float(tok) for tok in args.eps.split(",") if tok.strip())
        except ValueError as exc:
            raise ConfigError(f"bad --eps list {args.eps!r}: {exc}") from exc
        cfg = replace(cfg, epsilons=eps)
    if args.reps is not None:
        cfg = replace(cfg, seeds_per_epsilon=args.reps)
    solver_settings = cfg.solver
    if args.alpha is not None:
        solver_settings = replace(solver_settings, alpha=args.alpha)
    if args.delta is not None:
        solver_settings = replace(solver_settings, delta=args.delta)
    if args.iters is not None:
        solver_settings = replace(solver_settings, iters=args.iters)
    cfg = replace(cfg, solver=solver_settings)
    if args.oracle:
        cfg = replace(cfg, oracle=replace(cfg.oracle, kind=args.oracle))
    return cfg


def cmd_sweep(args, mode: str) -> int:
    cfg = _sweep_config(args)
    bundle = run_sweep(cfg, mode=mode)
    out = bundle.write()
    rows = len(bundle.results)
    print(f"wrote bundle {out} ({rows} runs over {len(bundle.reports)} epsilon values)")
    for eps, cond in bundle.skipped:
        print(f"skipped eps={eps!r} (condition value {cond:.6g} >= 0)")
    return EXIT_OK


def cmd_analyze(args) -> int:
    game = load_instance(args.instance)
    plan = SamplingPlan(delta=args.delta, basis=PositiveBasis.standard_double(game.n))
    report = analysis.constants(game, plan, args.eps)
    doc = {
        "a": report.a,
        "b": report.b,
        "kappa": report.kappa,
        "kappa_certified": report.kappa_certified,
        "kappa_printed": report.kappa_printed,
        "mu_f": report.mu_f,
        "L_f": report.l_f,
        "pinv_norm": report.pinv_norm,
        "epsilon": report.epsilon,
        "delta": report.delta,
        "p": report.p,
        "condition_value": report.condition_value,
        "theorem_bound": report.theorem_bound if report.theorem_bound is not None else "condition violated",
        "provenance": list(report.provenance),
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_plot_data(args) -> int:
    if args.kind == "convergence":
        export_convergence_data(args.bundle, args.out)
    else:
        export_tightness_data(args.bundle, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command in ("run", "tightness"):
            return cmd_sweep(args, mode=args.command)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "plot-data":
            return cmd_plot_data(args)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceError as exc:
        print(f"instance error: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except OracleFailure as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except StackgradError as exc:
        message = str(exc)
        print(f"error: {message}", file=sys.stderr)
        if "oracle_failure" in message:
            return EXIT_ORACLE
        if "diverged" in message:
            return EXIT_DIVERGED
        return EXIT_CONFIG
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())
