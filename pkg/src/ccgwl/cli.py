"""Command line entry point: ``ccgwl {generate,train,experiment,probe}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import SEED_ENV, experiment_config, load_config
from .experiment import emit_report, online_accuracy, run_experiment, summarize
from .learner import make_state, observe, probe_novel_word, state_from_text, state_to_text
from .scene import ConfigError, DatasetConfig, generate_dataset, load_dataset, save_dataset

log = logging.getLogger("ccgwl")


def _inventory_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--colors", type=int, default=10)
    p.add_argument("--shapes", type=int, default=10)
    p.add_argument("--materials", type=int, default=3)
    p.add_argument("--sizes", type=int, default=3)


def _dataset_from_flags(args, **extra) -> DatasetConfig:
    cfg = DatasetConfig.from_counts(args.colors, args.shapes, args.materials, args.sizes, **extra)
    cfg.check()
    return cfg


def cmd_generate(args) -> int:
    cfg = _dataset_from_flags(args, n_train=args.train, n_test=args.test, seed=args.seed,
                              test_known_words_only=args.test_known_words_only)
    train, test = generate_dataset(cfg)
    save_dataset(args.out, train, test)
    print(json.dumps({"out": str(args.out), "train": len(train), "test": len(test)}))
    return 0


def cmd_train(args) -> int:
    if args.config:
        exp = load_config(args.config)
        dataset, learner = exp.dataset, exp.learner
    else:
        dataset = _dataset_from_flags(args)
        learner = experiment_config({}).learner
    mode = "overhypothesis" if args.mode == "overhyp" else args.mode
    learner = replace(learner, mode=mode, seed=args.seed)
    train, test = load_dataset(args.dataset)
    known = dataset.value_types()
    for t in train + test:
        for o in t.scene:
            if o.color not in known or o.shape not in known:
                raise ConfigError(f"dataset value outside the configured inventory: {o}")
    state = make_state(learner, dataset)
    log_path = Path(args.log)
    with open(log_path, "w") as fh:
        for trial in train:
            fh.write(json.dumps(observe(trial, state).to_record()) + "\n")
    state_path = Path(args.state) if args.state else log_path.with_suffix(".state")
    state_path.write_text(state_to_text(state))
    out = {"trials": state.trials_seen, "lexicon_size": len(state.lexicon),
           "belief": state.belief(), "state": str(state_path)}
    if test:
        out["test_accuracy"] = online_accuracy(state, test)
    print(json.dumps(out))
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config) if args.config else experiment_config({})
    overrides = {k: v for k, v in (("restarts", args.restarts), ("jobs", args.jobs),
                                   ("cadence", args.cadence)) if v is not None}
    cfg = replace(cfg, **overrides)
    log.info("running %d restarts x %d modes (seed %d)", cfg.restarts, len(cfg.modes), cfg.seed)
    result = run_experiment(cfg)
    emit_report(result, args.out, plots=not args.no_plots)
    print(json.dumps(summarize(result), indent=2))
    return 0


def cmd_probe(args) -> int:
    state = state_from_text(Path(args.state).read_text())
    print(json.dumps(probe_novel_word(args.frame, state)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccgwl", description="Grounded CCG word learner.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic reference-game dataset (JSONL)")
    _inventory_flags(g)
    g.add_argument("--train", type=int, default=400)
    g.add_argument("--test", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--test-known-words-only", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="one learner over a dataset, logging every trial")
    t.add_argument("--mode", choices=["base", "overhyp"], required=True)
    t.add_argument("--dataset", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log", required=True, help="per-trial JSONL log")
    t.add_argument("--state", help="learner state output (default: LOG with .state suffix)")
    t.add_argument("--config", help="YAML file for learner and inventory settings")
    _inventory_flags(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("experiment", help="restarts of both modes, curves and plots",
                       epilog=f"{SEED_ENV} overrides the master seed.")
    e.add_argument("--config")
    e.add_argument("--out", required=True)
    e.add_argument("--restarts", type=int)
    e.add_argument("--jobs", type=int)
    e.add_argument("--cadence", type=int)
    e.add_argument("--no-plots", action="store_true")
    e.set_defaults(func=cmd_experiment)

    p = sub.add_parser("probe", help="property-type distribution for a novel word")
    p.add_argument("--state", required=True)
    p.add_argument("--frame", choices=["modifier", "noun"], required=True)
    p.set_defaults(func=cmd_probe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"ccgwl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
