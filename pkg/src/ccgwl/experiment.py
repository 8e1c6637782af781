"""Restart harness: online accuracy curves, the performance gap, belief curves, reports."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .learner import (
    LearnerConfig, LearnerState, make_state, observe, predict_referent, probe_novel_word,
)
from .scene import ConfigError, DatasetConfig, generate_dataset

log = logging.getLogger(__name__)

MODE_FILES = {"base": "accuracy_base.csv", "overhypothesis": "accuracy_overhyp.csv"}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig = DatasetConfig()
    learner: LearnerConfig = LearnerConfig()
    restarts: int = 50
    cadence: int = 1            # evaluate every ``cadence`` trials; 0 disables evaluation
    seed: int = 0               # master seed for restart orderings and bootstrap
    jobs: int = 1
    bootstrap: int = 10_000
    modes: tuple = ("base", "overhypothesis")

    def __post_init__(self):
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.cadence < 0:
            raise ConfigError("cadence must be >= 0")


@dataclass
class RunRecord:
    mode: str
    restart: int
    trials: np.ndarray          # trial indices at which accuracy was measured
    accuracy: np.ndarray
    belief: np.ndarray          # after each trial, index 0 = before training
    skipped: int
    probe_modifier: dict = field(default_factory=dict)
    probe_noun: dict = field(default_factory=dict)


@dataclass
class Curve:
    trials: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray

    def rows(self):
        return zip(self.trials, self.mean, self.ci_low, self.ci_high)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list
    accuracy: dict              # mode -> Curve
    gap: Optional[Curve]
    belief: Optional[Curve]


def online_accuracy(state: LearnerState, test: Sequence) -> float:
    """Fraction of test trials whose predicted referent is the true one. Read-only."""
    if not test:
        raise ConfigError("empty test set")
    hits = sum(predict_referent(t.utterance, t.scene, state) == t.referent for t in test)
    return hits / len(test)


class _AccuracyTracker:
    """Keeps per-test-trial correctness, re-scoring only trials whose words changed."""

    def __init__(self, state: LearnerState, test: Sequence):
        self.state = state
        self.test = test
        self.by_word: dict = {}
        for i, t in enumerate(test):
            for tok in set(t.utterance):
                self.by_word.setdefault(tok, []).append(i)
        self.correct = np.array([self._score(i) for i in range(len(test))], dtype=bool)

    def _score(self, i: int) -> bool:
        t = self.test[i]
        return predict_referent(t.utterance, t.scene, self.state) == t.referent

    def refresh(self, words) -> None:
        dirty = {i for w in words for i in self.by_word.get(w, ())}
        for i in dirty:
            self.correct[i] = self._score(i)

    @property
    def value(self) -> float:
        return float(self.correct.mean())


def restart_order(n: int, master_seed: int, restart: int) -> np.ndarray:
    return np.random.default_rng([master_seed, restart]).permutation(n)


def restart_learner_seed(master_seed: int, restart: int) -> int:
    return int(np.random.SeedSequence([master_seed, restart, 1]).generate_state(1)[0])


def run_single(mode: str, restart: int, train: Sequence, test: Sequence,
               config: ExperimentConfig) -> RunRecord:
    """One learner over one reshuffled pass through ``train``."""
    lcfg = replace(config.learner, mode=mode, seed=restart_learner_seed(config.seed, restart))
    state = make_state(lcfg, config.dataset)
    order = restart_order(len(train), config.seed, restart)
    tracker = _AccuracyTracker(state, test) if config.cadence and test else None
    trials, acc, belief = [], [], [state.belief()]
    if tracker is not None:
        trials.append(0)
        acc.append(tracker.value)
    skipped = 0
    for k, i in enumerate(order, start=1):
        outcome = observe(train[i], state)
        skipped += outcome.skipped
        belief.append(outcome.belief)
        if tracker is not None:
            tracker.refresh(outcome.touched_words)
            if k % config.cadence == 0 or k == len(order):
                trials.append(k)
                acc.append(tracker.value)
    return RunRecord(
        mode=mode, restart=restart,
        trials=np.array(trials, dtype=int), accuracy=np.array(acc), belief=np.array(belief),
        skipped=skipped,
        probe_modifier=probe_novel_word("modifier", state),
        probe_noun=probe_novel_word("noun", state),
    )


def _run_task(args):
    return run_single(*args)


def bootstrap_curve(trials, samples: np.ndarray, n_resamples: int, rng: np.random.Generator,
                    level: float = 0.95) -> Curve:
    """Mean over restarts (rows) with a percentile bootstrap CI that resamples restarts."""
    samples = np.asarray(samples, dtype=float)
    mean = samples.mean(axis=0)
    n = samples.shape[0]
    if n == 1 or n_resamples == 0:
        return Curve(np.asarray(trials), mean, mean.copy(), mean.copy())
    idx = rng.integers(0, n, size=(n_resamples, n))
    boot = samples[idx].mean(axis=1)
    lo, hi = np.quantile(boot, [(1 - level) / 2, (1 + level) / 2], axis=0)
    # keep the band around the point estimate even for degenerate resamples
    return Curve(np.asarray(trials), mean, np.minimum(lo, mean), np.maximum(hi, mean))


def aggregate(config: ExperimentConfig, runs: list) -> ExperimentResult:
    rng = np.random.default_rng([config.seed, 7919])
    by_mode = {m: sorted((r for r in runs if r.mode == m), key=lambda r: r.restart) for m in config.modes}
    accuracy = {}
    for mode, rs in by_mode.items():
        if rs and len(rs[0].trials):
            accuracy[mode] = bootstrap_curve(rs[0].trials, [r.accuracy for r in rs],
                                             config.bootstrap, rng)
    gap = None
    if {"base", "overhypothesis"} <= set(accuracy):
        base = {r.restart: r for r in by_mode["base"]}
        paired = [(r.accuracy - base[r.restart].accuracy) for r in by_mode["overhypothesis"]]
        gap = bootstrap_curve(by_mode["overhypothesis"][0].trials, paired, config.bootstrap, rng)
    belief = None
    if by_mode.get("overhypothesis"):
        rs = by_mode["overhypothesis"]
        belief = bootstrap_curve(np.arange(len(rs[0].belief)), [r.belief for r in rs],
                                 config.bootstrap, rng)
    return ExperimentResult(config, runs, accuracy, gap, belief)


def run_experiment(config: ExperimentConfig, train=None, test=None) -> ExperimentResult:
    """All restarts of every mode on a shared dataset, aggregated into curves."""
    if train is None:
        train, test = generate_dataset(config.dataset)
    tasks = [(mode, r, train, test, config) for r in range(config.restarts) for mode in config.modes]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            runs = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        runs = [_run_task(t) for t in tasks]
    return aggregate(config, runs)


def summarize(result: ExperimentResult) -> dict:
    out: dict = {"restarts": result.config.restarts}
    for mode, curve in result.accuracy.items():
        out[f"final_accuracy_{mode}"] = float(curve.mean[-1])
    if result.gap is not None:
        k = int(np.argmax(result.gap.mean))
        out["peak_gap"] = float(result.gap.mean[k])
        out["peak_gap_trial"] = int(result.gap.trials[k])
        out["final_gap"] = float(result.gap.mean[-1])
    if result.belief is not None:
        out["initial_belief"] = float(result.belief.mean[0])
        out["final_belief"] = float(result.belief.mean[-1])
    over = [r for r in result.runs if r.mode == "overhypothesis"]
    if over:
        out["probe_modifier_color_wins"] = float(np.mean(
            [r.probe_modifier["color"] > r.probe_modifier["shape"] for r in over]))
        out["probe_noun_shape_wins"] = float(np.mean(
            [r.probe_noun["shape"] > r.probe_noun["color"] for r in over]))
    out["skipped_trials"] = int(sum(r.skipped for r in result.runs))
    return out


def _write_csv(path: Path, curve: Curve) -> None:
    lines = ["trial,mean,ci_low,ci_high"]
    lines += [f"{int(t)},{m:.10f},{lo:.10f},{hi:.10f}" for t, m, lo, hi in curve.rows()]
    path.write_text("\n".join(lines) + "\n")


def _plot(result: ExperimentResult, outdir: Path) -> list:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode, color in (("base", "tab:blue"), ("overhypothesis", "tab:red")):
        c = result.accuracy.get(mode)
        if c is None:
            continue
        ax.plot(c.trials, c.mean, color=color, label=mode)
        ax.fill_between(c.trials, c.ci_low, c.ci_high, color=color, alpha=0.25, linewidth=0)
    ax.set_xlabel("training trials")
    ax.set_ylabel("online accuracy")
    ax.set_ylim(0, 1)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(outdir / "accuracy.svg", metadata={"Date": None})
    plt.close(fig)
    written.append(outdir / "accuracy.svg")

    if result.gap is not None and result.belief is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        g, b = result.gap, result.belief
        ax.plot(g.trials, g.mean, color="tab:red")
        ax.fill_between(g.trials, g.ci_low, g.ci_high, color="tab:red", alpha=0.25, linewidth=0)
        ax.set_xlabel("training trials")
        ax.set_ylabel("accuracy gap (overhypothesis - base)", color="tab:red")
        ax2 = ax.twinx()
        ax2.plot(b.trials, b.mean, color="gray")
        ax2.fill_between(b.trials, b.ci_low, b.ci_high, color="gray", alpha=0.25, linewidth=0)
        ax2.set_ylabel("p(t = color | s = NP/NP)", color="gray")
        ax2.set_ylim(0, 1)
        fig.tight_layout()
        fig.savefig(outdir / "gap_belief.svg", metadata={"Date": None})
        plt.close(fig)
        written.append(outdir / "gap_belief.svg")
    return written


def emit_report(result: ExperimentResult, outdir, plots: bool = True) -> list:
    """Write the curve CSVs, plots and ``summary.json`` into ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for mode, curve in result.accuracy.items():
        path = outdir / MODE_FILES[mode]
        _write_csv(path, curve)
        written.append(path)
    for name, curve in (("gap.csv", result.gap), ("belief.csv", result.belief)):
        if curve is not None:
            _write_csv(outdir / name, curve)
            written.append(outdir / name)
    if plots:
        written += _plot(result, outdir)
    summary = summarize(result)
    summary["config"] = json.loads(json.dumps(asdict(result.config), default=list))
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(outdir / "summary.json")
    return written
