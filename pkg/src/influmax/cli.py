"""Command-line interface.

Exit codes are a stable contract for scripting: 0 success, 1 runtime error
(including a failed validation check), 2 usage or config error.  Subcommands
write only inside their declared output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import branching, components, configio, experiment
from .errors import ConfigError, InfluMaxError
from .graph_models import Regime, classify_regime


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="influmax",
        description="Influence-maximization bandit simulations on sparse random graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to a JSON config file")
    common.add_argument("--seed", type=int, default=None, help="base seed override")
    common.add_argument("--out", default=None, help="output directory override")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    run_p = sub.add_parser("run", parents=[common],
                           help="run an experiment and write trace CSVs + summary JSON")
    run_p.add_argument("--replicates", type=int, default=None,
                       help="number of replicates (requires --seed or enough config seeds)")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker processes for replicates")

    sub.add_parser("ground-truth", parents=[common],
                   help="compute expected component sizes and the quantile baseline")

    vp = sub.add_parser("validate-props", parents=[common],
                        help="check argmax agreement and the gap inequalities")
    vp.add_argument("--samples", type=int, default=20_000,
                    help="Monte Carlo explorations per class")

    vo = sub.add_parser("validate-oracle", parents=[common],
                        help="compare the lazy explorer against exhaustive enumeration")
    vo.add_argument("--samples", type=int, default=1_000_000)
    vo.add_argument("--vertex", type=int, default=0)

    sub.add_parser("branching", parents=[common],
                   help="print the branching solution of the config's model")

    sweep_p = sub.add_parser("sweep", parents=[common],
                             help="run the experiment over the config's alpha grid")
    sweep_p.add_argument("--threads", type=int, default=1)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "run": cmd_run,
        "ground-truth": cmd_ground_truth,
        "validate-props": cmd_validate_props,
        "validate-oracle": cmd_validate_oracle,
        "branching": cmd_branching,
        "sweep": cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfluMaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures map to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _load(args) -> configio.ExperimentConfig:
    return configio.load_experiment_config(args.config)


def _resolve_seeds(config, args, replicates):
    if args.seed is not None:
        count = replicates or len(config.seeds)
        return configio.derive_seeds(args.seed, count)
    seeds = list(config.seeds)
    if replicates is not None:
        if replicates > len(seeds):
            raise ConfigError(
                f"seeds: config lists {len(seeds)} seeds but --replicates={replicates}")
        seeds = seeds[:replicates]
    return seeds


def _out_dir(config, args) -> Path:
    target = args.out or config.output_dir
    if target is None:
        raise ConfigError("output_dir: set it in the config or pass --out")
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    config = _load(args)
    if config.policy is None:
        raise ConfigError("policy: required for the run subcommand")
    seeds = _resolve_seeds(config, args, args.replicates)
    out = _out_dir(config, args)

    config = dataclasses.replace(config, seeds=tuple(seeds))
    model, ground_truth, traces, summary = experiment.run_experiment(
        config, workers=args.threads)
    for i, trace in enumerate(traces):
        experiment.write_trace_csv(trace, out / f"trace_{i:03d}.csv")
    summary["policy"] = config.policy.to_dict()
    summary["seeds"] = [int(s) for s in seeds]
    summary["c_star_alpha"] = ground_truth.c_star_alpha
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="ascii")

    if not args.quiet:
        print(f"model: {model.kind.value}, lambda_max={model.lambda_max:.6f}, "
              f"regime={model.regime.value}")
        print(f"baseline c*_alpha = {ground_truth.c_star_alpha:.6f} "
              f"(alpha={config.policy.alpha})")
        print(f"{'round':>10}  {'mean regret':>14}  {'stddev':>12}")
        for t, stats in summary["checkpoints"].items():
            print(f"{t:>10}  {stats['mean']:>14.4f}  {stats['stddev']:>12.4f}")
        print(f"wrote {len(traces)} trace file(s) + summary.json to {out}")
    return 0


def cmd_ground_truth(args) -> int:
    config = _load(args)
    if config.policy is None:
        raise ConfigError("policy: required (its alpha defines the baseline)")
    model = config.build_model()
    rng = np.random.default_rng(
        np.random.SeedSequence(args.seed if args.seed is not None
                               else config.ground_truth_seed))
    ground_truth = experiment.compute_ground_truth(
        model, config.policy.alpha, config.ground_truth.method,
        config.ground_truth.mc_samples, rng)
    payload = experiment.ground_truth_to_dict(ground_truth)
    if args.out or config.output_dir:
        out = _out_dir(config, args)
        (out / "ground_truth.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")
    if not args.quiet:
        print(f"c* = {ground_truth.c_star:.6f}")
        print(f"c*_alpha = {ground_truth.c_star_alpha:.6f}")
        print(f"mu*_alpha = {ground_truth.mu_star_alpha:.6f}")
        print(f"near-optimal set size = {ground_truth.v_star_alpha.size}")
    return 0


def cmd_validate_props(args) -> int:
    config = _load(args)
    if args.samples < 1:
        raise ConfigError("--samples: must be >= 1")
    model = config.build_model()
    rng = np.random.default_rng(
        np.random.SeedSequence(args.seed if args.seed is not None else 0))
    report = experiment.validate_propositions(model, args.samples, rng)
    payload = report.to_dict()
    if args.out or config.output_dir:
        out = _out_dir(config, args)
        (out / "validation.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")
    if not args.quiet:
        print(f"regime: {report.regime}")
        print(f"assumptions checked: {', '.join(report.assumptions_checked) or 'none'}")
        if report.degenerate_tie:
            print("argmax agreement: skipped (degenerate tie in mean degrees)")
        else:
            print(f"argmax agreement: {report.argmax_agreement}")
        print(f"gap inequality holds: {report.gap_inequality_holds}")
    ok = report.gap_inequality_holds and report.argmax_agreement is not False
    return 0 if ok else 1


def cmd_validate_oracle(args) -> int:
    config = _load(args)
    model = config.build_model()
    n = model.params.n
    if n > components.MAX_ENUMERATION_VERTICES:
        print(f"config error: exhaustive mode needs n <= "
              f"{components.MAX_ENUMERATION_VERTICES}, got n = {n}", file=sys.stderr)
        return 2
    if args.samples < 1:
        print("config error: --samples must be >= 1", file=sys.stderr)
        return 2
    if not 0 <= args.vertex < n:
        print(f"config error: --vertex must lie in [0, {n})", file=sys.stderr)
        return 2
    rng = np.random.default_rng(
        np.random.SeedSequence(args.seed if args.seed is not None else 0))
    exact = components.exact_outcome_distribution(model, args.vertex)
    empirical = components.empirical_outcome_distribution(
        model, args.vertex, args.samples, rng)
    tv = components.total_variation(exact, empirical)
    passed = tv < 0.01
    if not args.quiet:
        print(f"total variation over {args.samples} samples: {tv:.6f}")
    print(f"oracle equivalence: {'pass' if passed else 'FAIL'} (threshold 0.01)")
    return 0 if passed else 1


def cmd_branching(args) -> int:
    config = _load(args)
    model = config.build_model()
    solution = branching.solve_branching(model)
    if args.out or config.output_dir:
        out = _out_dir(config, args)
        (out / "branching.json").write_text(
            json.dumps(solution.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="ascii")
    print(f"lambda_max = {model.lambda_max:.8f}")
    print(f"regime = {model.regime.value}")
    print(f"b = {_fmt_vector(solution.b)}")
    if solution.regime is Regime.SUBCRITICAL:
        print(f"x = {_fmt_vector(solution.x)}")
    elif solution.regime is Regime.SUPERCRITICAL:
        print(f"rho = {_fmt_vector(solution.rho)}")
    else:
        print("critical band: no total progeny or survival values")
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    if config.policy is None:
        raise ConfigError("policy: required for the sweep subcommand")
    if config.sweep_alphas is None:
        raise ConfigError("sweep.alphas: required for the sweep subcommand")
    seeds = _resolve_seeds(config, args, None)
    out = _out_dir(config, args)
    model = config.build_model()
    gt_rng_seed = config.ground_truth_seed
    results = []
    for alpha in config.sweep_alphas:
        rng = np.random.default_rng(np.random.SeedSequence(gt_rng_seed))
        ground_truth = experiment.compute_ground_truth(
            model, alpha, config.ground_truth.method,
            config.ground_truth.mc_samples, rng)
        policy = configio.PolicyConfig(name=config.policy.name, T=config.policy.T,
                                       alpha=alpha, beta=config.policy.beta)
        traces = experiment.run_replicates(model, ground_truth, policy, seeds,
                                           workers=args.threads)
        summary = experiment.summarize_traces(traces, policy.T)
        results.append({"alpha": alpha,
                        "c_star_alpha": ground_truth.c_star_alpha,
                        "checkpoints": summary["checkpoints"]})
    (out / "sweep.json").write_text(
        json.dumps({"results": results}, indent=2, sort_keys=True) + "\n",
        encoding="ascii")
    if not args.quiet:
        print(f"{'alpha':>8}  {'c*_alpha':>12}  {'final mean regret':>18}")
        for row in results:
            final = row["checkpoints"][str(config.policy.T)]["mean"]
            print(f"{row['alpha']:>8.3f}  {row['c_star_alpha']:>12.4f}  {final:>18.4f}")
    return 0


def _fmt_vector(vec) -> str:
    values = ", ".join(f"{v:.6f}" for v in vec)
    return f"({values})"


if __name__ == "__main__":
    sys.exit(main())
