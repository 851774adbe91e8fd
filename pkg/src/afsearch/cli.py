"""Command-line entry point.

Subcommands: list-afs, gradcheck, train, search, experiment, analyze,
selftest. Exit codes: 0 success, 1 usage error, 2 data error, 3 failed
self test. Stdout is byte-reproducible given identical flags and seed;
timing and progress go to stderr.
"""

import argparse
import os
import sys

import numpy as np

from .activations import af_registry
from .data import DataError, load_dataset
from .experiment import (
    evaluate_architecture,
    parse_architecture_spec,
    prepare_split,
    read_config_file,
    run_experiment,
)
from .gradcheck import check_activation_gradients, check_network_gradients
from .samplers import SAMPLER_NAMES, SearchSpace, benchmark_planted_categorical, benchmark_sphere, save_trial_history, study_run
from .special_functions import self_test_max_errors
from . import experiment as _experiment_mod
from . import reports


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 (argparse's default is 2, reserved here for data errors)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _rng(*parts):
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in parts]))


def cmd_list_afs(args) -> int:
    print(f"{'name':<18} {'arity':<12} {'stochastic':<11} {'params'}")
    for kind in af_registry():
        print(f"{kind.name:<18} {kind.arity:<12} {('yes' if kind.stochastic else 'no'):<11} {kind.n_trainable_params}")
    return 0


def cmd_gradcheck(args) -> int:
    ok = True
    print("activation gradients (central differences at safe points):")
    for name, rep in check_activation_gradients(n_points=args.points, seed=args.seed).items():
        status = "ok" if rep.passed else "FAIL"
        print(f"  {name:<18} max_abs_diff {rep.max_abs_diff:.3e}  {status}")
        ok &= rep.passed
    print("network gradients (end to end vs central differences):")
    for rep in check_network_gradients(seed=args.seed):
        status = "ok" if rep.passed else "FAIL"
        print(
            f"  {'-'.join(rep.arch_names):<34} max_rel {rep.max_rel_diff:.3e} "
            f"tight_frac {rep.frac_within_tight:.3f}  {status}"
        )
        ok &= rep.passed
    print("special functions (identity and known-value errors):")
    for name, err in self_test_max_errors().items():
        print(f"  {name:<24} {err:.3e}")
    print("gradcheck:", "PASS" if ok else "FAIL")
    return 0 if ok else 3


def _load(args):
    return load_dataset(args.data, fmt=args.format, label_col=args.label_col)


def cmd_train(args) -> int:
    ds = _load(args)
    split = prepare_split(ds, _rng(args.seed, 0))
    arch = parse_architecture_spec(args.arch)
    out = evaluate_architecture(arch, split, _rng(args.seed, 1), _rng(args.seed, 2), hidden=args.hidden)
    print(f"architecture {','.join(k.name for k in arch)}")
    print(f"failed {str(out.failed).lower()}")
    print(f"train_accuracy {out.train_accuracy:.6f}")
    print(f"test_accuracy {out.test_accuracy:.6f}")
    return 0


def cmd_search(args) -> int:
    ds = _load(args)
    split = prepare_split(ds, _rng(args.seed, 0))
    space = SearchSpace(args.layers)
    counter = {"t": 0}

    def objective(arch):
        t = counter["t"]
        counter["t"] += 1
        out = evaluate_architecture(arch, split, _rng(args.seed, 5, t), hidden=args.hidden, with_test=False)
        return out.train_accuracy, out.failed

    result = study_run(objective, args.method, space, args.trials, _rng(args.seed, 4))
    if args.trial_log:
        save_trial_history(args.trial_log, args.method, result.history, args.seed)
    print(f"method {args.method}")
    print(f"trials {len(result.history)}")
    print(f"best_architecture {','.join(k.name for k in result.best.architecture)}")
    print(f"best_objective {result.best.objective:.6f}")
    print(f"best_failed {str(result.best.failed).lower()}")
    return 0


def cmd_experiment(args) -> int:
    config = read_config_file(args.config)
    if args.output is not None:
        config.output = args.output
    if args.jobs is not None:
        config.jobs = args.jobs
    _, summary = run_experiment(config, log_stream=sys.stderr)
    sys.stdout.write(summary)
    return 0


def cmd_analyze(args) -> int:
    records = _experiment_mod.load_log(args.log)
    if not records:
        raise DataError(f"{args.log}: no records")
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = {
        "table1.csv": reports.table1_csv(records, rounds=args.rounds, seed=args.seed),
        "table2.csv": reports.table2_csv(records, top_k=args.top_k),
        "table3.csv": reports.table3_csv(records),
    }
    for name, text in outputs.items():
        path = os.path.join(args.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(path)
    return 0


def cmd_selftest(args) -> int:
    ok = True
    sphere = benchmark_sphere()
    print(f"cmaes sphere: {sphere.n_converged}/10 seeds reached {sphere.target:g} "
          f"(evals {min(sphere.evals_used)}..{max(sphere.evals_used)})")
    ok &= sphere.n_converged >= 9
    planted = benchmark_planted_categorical()
    print(f"tpe planted: wins_or_ties {planted.n_tpe_wins_or_ties}/30, "
          f"median matches tpe {planted.tpe_median:g} random {planted.random_median:g}")
    ok &= planted.n_tpe_wins_or_ties >= 20
    ok &= planted.tpe_median - planted.random_median >= 1.0
    print("selftest:", "PASS" if ok else "FAIL")
    return 0 if ok else 3


def build_parser() -> _Parser:
    parser = _Parser(prog="afsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list-afs", help="print the 48-row activation registry").set_defaults(fn=cmd_list_afs)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suites and numeric self tests")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gradcheck)

    def add_data_flags(p):
        p.add_argument("--data", required=True, help="dataset path (CSV or ARFF)")
        p.add_argument("--format", choices=("csv", "arff"), default=None)
        p.add_argument("--label-col", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--hidden", type=int, default=64)

    p = sub.add_parser("train", help="train one architecture on one 70/30 split")
    add_data_flags(p)
    p.add_argument("--arch", required=True, help='comma-separated names or "standard:5" / "standard:10"')
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("search", help="run one study on one split")
    add_data_flags(p)
    p.add_argument("--method", choices=SAMPLER_NAMES, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--layers", type=int, default=5, choices=(5, 10))
    p.add_argument("--trial-log", default=None, help="write per-trial JSON lines here")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("experiment", help="run the full per-dataset experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None, help="override the config output path")
    p.add_argument("--jobs", type=int, default=None, help="parallel replicate processes")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("analyze", help="emit score and frequency reports from an experiment log")
    p.add_argument("--log", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--rounds", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(fn=cmd_analyze)

    sub.add_parser("selftest", help="sampler benchmarks: CMA-ES sphere, TPE planted").set_defaults(fn=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DataError as exc:
        print(f"afsearch: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"afsearch: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
