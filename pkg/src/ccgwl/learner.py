"""Online lexicon learning from reference trials, with or without the overhypothesis prior."""

from __future__ import annotations

import ast
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .grammar import (
    MODIFIER, NP, GrammarError, Lexicon, best_of, parse_all,
)
from .induction import InductionFailure, bootstrap_lexicon, induce
from .logic import to_text
from .overhypothesis import (
    ConcentrationTable, PropertyOntology, belief_color_given_modifier,
    compute_concentrations, predictive, type_marginal,
)
from .scene import ConfigError, DatasetConfig, ReferenceTrial, Scene, validate

log = logging.getLogger(__name__)

MODES = ("base", "overhypothesis")
NOVEL_TOKEN = "<novel>"


@dataclass(frozen=True)
class LearnerConfig:
    mode: str = "overhypothesis"
    tau: float = 0.2
    rho_s: float = 1.0
    rho_w: float = 1.0
    margin: float = 1.0      # perceptron margin gamma
    epsilon: float = 0.001   # base mode: candidate weights ~ Uniform(0, epsilon)
    kappa: float = 1.0       # overhypothesis mode: candidate weight = kappa * P(t, v | s, w)
    seed: int = 0
    # property types a candidate meaning may refer to
    candidate_types: tuple = ("color", "shape")

    def __post_init__(self):
        object.__setattr__(self, "candidate_types", tuple(self.candidate_types))
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("tau", "rho_s", "rho_w", "margin", "epsilon", "kappa"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be finite and non-negative, got {value}")
        if self.tau <= 0 or self.kappa <= 0:
            raise ConfigError("tau and kappa must be positive")


@dataclass
class LearnerState:
    config: LearnerConfig
    ontology: PropertyOntology
    lexicon: Lexicon = field(default_factory=bootstrap_lexicon)
    trials_seen: int = 0
    table: Optional[ConcentrationTable] = None
    rng: Optional[np.random.Generator] = None

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.config.seed)
        if self.table is None:
            self.refresh_table()

    def refresh_table(self) -> None:
        c = self.config
        self.table = compute_concentrations(self.lexicon, self.ontology, c.tau, c.rho_s, c.rho_w)

    def belief(self) -> float:
        return belief_color_given_modifier(self.table)


@dataclass
class UpdateReport:
    deltas: dict = field(default_factory=dict)   # LexicalEntry -> weight change
    violations: int = 0

    @property
    def norm(self) -> float:
        return math.sqrt(math.fsum(d * d for d in self.deltas.values()))


@dataclass
class TrialOutcome:
    index: int
    correct_before: bool
    parsed: bool
    skipped: bool = False
    induced: dict = field(default_factory=dict)   # token -> (pool size, surviving count)
    added: list = field(default_factory=list)      # permanently inserted entries
    update: UpdateReport = field(default_factory=UpdateReport)
    belief: float = 0.5

    @property
    def touched_words(self) -> set:
        words = {e.word for e in self.added}
        words.update(e.word for e, d in self.update.deltas.items() if d != 0.0)
        return words

    def to_record(self) -> dict:
        return {
            "trial": self.index,
            "correct_before": self.correct_before,
            "parsed": self.parsed,
            "skipped": self.skipped,
            "induced": {t: {"before": b, "after": a} for t, (b, a) in self.induced.items()},
            "winners": [f"{e.word} := {e.category} : {to_text(e.meaning)}" for e in self.added],
            "update_norm": self.update.norm,
            "belief": self.belief,
        }


def make_state(config: LearnerConfig, dataset: DatasetConfig = DatasetConfig()) -> LearnerState:
    """Fresh learner over the dataset's inventory, restricted to the candidate types."""
    values = dataset.values_of()
    ontology = PropertyOntology({t: values[t] for t in config.candidate_types})
    return LearnerState(config, ontology)


def features(derivation) -> Counter:
    """Leaf-entry count vector."""
    return Counter(derivation.leaves)


def perceptron_update(tokens, referent: int, scene: Scene, lexicon: Lexicon,
                      margin: float = 1.0, derivations=None) -> UpdateReport:
    """Separate derivations denoting exactly {referent} from the rest by ``margin``.

    Weights move by mean(phi(good violators)) - mean(phi(bad violators)).
    """
    if derivations is None:
        derivations = parse_all(tokens, lexicon)
    target = frozenset({referent})
    good, bad = [], []
    for d in derivations:
        (good if validate(d.logical_form, scene) == target else bad).append(d)
    if not good or not bad:
        return UpdateReport()
    g_viol, b_viol = {}, {}
    n_pairs = 0
    for gi, g in enumerate(good):
        for bi, b in enumerate(bad):
            if g.score - b.score < margin:
                g_viol[gi] = g
                b_viol[bi] = b
                n_pairs += 1
    if not n_pairs:
        return UpdateReport()
    g_sum = sum((features(d) for d in g_viol.values()), Counter())
    b_sum = sum((features(d) for d in b_viol.values()), Counter())
    delta = {}
    for entry in dict.fromkeys(list(g_sum) + list(b_sum)):
        # divide per group before subtracting so shared leaves cancel exactly
        dw = g_sum[entry] / len(g_viol) - b_sum[entry] / len(b_viol)
        if dw != 0.0:
            delta[entry] = dw
            entry.weight += dw
    return UpdateReport(delta, n_pairs)


def _seed_weights(state: LearnerState, candidates: dict) -> None:
    if state.config.mode == "base":
        for cands in candidates.values():
            for c in cands:
                c.entry.weight = float(state.rng.uniform(0.0, state.config.epsilon))
        return
    posteriors: dict = {}
    for tok, cands in candidates.items():
        for c in cands:
            key = (c.entry.category, tok)
            if key not in posteriors:
                posteriors[key] = predictive(c.entry.category, tok, state.table, state.ontology)
            p = posteriors[key][c.property.ptype, c.property.value]
            c.entry.weight = state.config.kappa * p


def predict_referent(tokens, scene: Scene, state: LearnerState) -> Optional[int]:
    """Referent of the best parse if it denotes exactly one object, else None."""
    try:
        best = best_of(parse_all(tokens, state.lexicon))
    except GrammarError:
        return None
    if best is None:
        return None
    denoted = validate(best.logical_form, scene)
    return next(iter(denoted)) if len(denoted) == 1 else None


def observe(trial: ReferenceTrial, state: LearnerState) -> TrialOutcome:
    """Learn from one trial: induce, seed, pick the winning parse, insert, update."""
    tokens, referent, scene = trial.utterance, trial.referent, trial.scene
    outcome = TrialOutcome(
        index=state.trials_seen,
        correct_before=predict_referent(tokens, scene, state) == referent,
        parsed=True,
    )
    try:
        result = induce(tokens, referent, scene, state.lexicon, state.ontology.values_of)
    except InductionFailure as exc:
        log.info("trial %d skipped: %s", state.trials_seen, exc)
        outcome.skipped = True
        result = None
    if result is not None and result.candidates:
        outcome.parsed = False
        candidates = result.candidates
        outcome.induced = {t: (result.pool_sizes[t], len(c)) for t, c in candidates.items()}
        _seed_weights(state, candidates)
        augmented = state.lexicon.copy()
        for cands in candidates.values():
            for c in cands:
                augmented.insert(c.entry)
        target = frozenset({referent})
        winner = best_of(d for d in parse_all(tokens, augmented)
                         if validate(d.logical_form, scene) == target)
        fresh = {id(c.entry) for cands in candidates.values() for c in cands}
        for e in winner.leaves:
            if id(e) in fresh and state.lexicon.find(e.word, e.category, e.meaning) is None:
                outcome.added.append(state.lexicon.add(e.word, e.category, e.meaning, e.weight))
    if not outcome.skipped:
        try:
            outcome.update = perceptron_update(tokens, referent, scene, state.lexicon,
                                               state.config.margin)
        except GrammarError:
            pass
    state.trials_seen += 1
    state.refresh_table()
    outcome.belief = state.belief()
    return outcome


def probe_novel_word(frame: str, state: LearnerState) -> dict:
    """Distribution over property types for a never-seen word in a noun or modifier frame."""
    category = {"modifier": MODIFIER, "noun": NP}[frame]
    if state.config.mode == "base":
        return {t: 1.0 / len(state.ontology.types) for t in state.ontology.types}
    return type_marginal(predictive(category, NOVEL_TOKEN, state.table, state.ontology))


def state_to_text(state: LearnerState) -> str:
    header = "".join(f"# {k}={v!r}\n" for k, v in asdict(state.config).items())
    header += f"# trials_seen={state.trials_seen}\n"
    header += f"# values_of={state.ontology.values_of!r}\n"
    return header + state.lexicon.dumps()


def state_from_text(text: str, ontology: Optional[PropertyOntology] = None) -> LearnerState:
    """Inverse of ``state_to_text``; the ontology defaults to the one recorded in the header."""
    meta = {}
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line:
            k, v = line[2:].split("=", 1)
            meta[k] = v
    fields = {k: ast.literal_eval(meta[k]) for k in asdict(LearnerConfig()) if k in meta}
    if ontology is None:
        if "values_of" not in meta:
            raise ConfigError("state has no value inventory; pass an ontology")
        ontology = PropertyOntology(ast.literal_eval(meta["values_of"]))
    value_types = {v: t for t, vals in ontology.values_of.items() for v in vals}
    lexicon = Lexicon.loads(text, value_types)
    return LearnerState(LearnerConfig(**fields), ontology, lexicon,
                        trials_seen=int(meta.get("trials_seen", 0)))
