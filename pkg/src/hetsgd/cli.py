"""Command-line entry points.

Subcommands:
  order-exp     data-order experiment (|f(w) - f(v)| vs rate constant)
  strategy-cmp  five-strategy comparison over a noise sweep
  c2-sweep      final objective vs the second-phase rate
  select-rates  print the chosen order and rates as JSON
  noise-level   print the noise level for given epsilon/sigma/d/batch
"""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import (ExperimentConfig, run_c2_sweep, run_order_experiment,
                          run_strategy_comparison)
from .oracles import dp_noise_level, rcn_noise_level
from .rates import select_rates


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--out-dir", default=None, help="override output directory")
    p.add_argument("--trials", type=int, default=None, help="override trial count")
    p.add_argument("--threads", type=int, default=None, help="override worker count")


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        d = cfg.to_dict()
        d.update(overrides)
        cfg = ExperimentConfig.from_dict(d)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetsgd",
                                     description="SGD with heterogeneous-noise gradient oracles")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("order-exp", "strategy-cmp", "c2-sweep"):
        p = sub.add_parser(name)
        _add_experiment_args(p)

    p = sub.add_parser("select-rates", help="order and rate selection from noise levels")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--beta-c", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--gamma-c-sq", type=float)
    group.add_argument("--epsilon-clean", type=float)
    p.add_argument("--gamma-n-sq", type=float)
    p.add_argument("--epsilon-noisy", type=float)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=1)

    p = sub.add_parser("noise-level", help="second-moment bound for one oracle")
    p.add_argument("--kind", choices=("dp", "rcn"), required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "order-exp":
        run_order_experiment(_load_config(args))
        return 0
    if args.command == "strategy-cmp":
        run_strategy_comparison(_load_config(args))
        return 0
    if args.command == "c2-sweep":
        run_c2_sweep(_load_config(args))
        return 0

    if args.command == "select-rates":
        if args.gamma_c_sq is not None:
            if args.gamma_n_sq is None:
                raise SystemExit("--gamma-n-sq required with --gamma-c-sq")
            gc, gn = args.gamma_c_sq, args.gamma_n_sq
        else:
            if args.epsilon_noisy is None or args.dim is None:
                raise SystemExit("--epsilon-noisy and --dim required with --epsilon-clean")
            gc = dp_noise_level(args.epsilon_clean, args.dim, args.batch_size).gamma_sq
            gn = dp_noise_level(args.epsilon_noisy, args.dim, args.batch_size).gamma_sq
        sel = select_rates(gc, gn, args.beta_c, args.lam)
        print(json.dumps(sel.to_dict(), indent=2, sort_keys=True))
        return 0

    if args.command == "noise-level":
        if args.kind == "dp":
            if args.epsilon is None or args.dim is None:
                raise SystemExit("--epsilon and --dim required for kind=dp")
            level = dp_noise_level(args.epsilon, args.dim, args.batch_size)
        else:
            if args.sigma is None:
                raise SystemExit("--sigma required for kind=rcn")
            level = rcn_noise_level(args.sigma)
        print(json.dumps({"gamma_sq": level.gamma_sq,
                          "gamma_sq_lower": level.gamma_sq_lower}, indent=2, sort_keys=True))
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
