"""Lexicon-derived Dirichlet concentrations and the novel-word posterior P(t, v | s, w).

Concentrations aggregate lexicon weights by (syntax, property type) and
(word, property value), temperature-scaled and exponentiated, then normalized.
Inference uses Dirichlet predictive means, which equal the normalized
concentrations; the mass parameters therefore do not change the posterior here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .grammar import MODIFIER, NP, Category, Lexicon
from .logic import extract_property
from .scene import ConfigError


@dataclass(frozen=True)
class PropertyOntology:
    values_of: Mapping[str, tuple]          # property type -> values (the deterministic P(v|t))
    syntax: tuple = (NP, MODIFIER)

    def __post_init__(self):
        seen = [v for vals in self.values_of.values() for v in vals]
        if len(set(seen)) != len(seen):
            raise ConfigError("each property value must belong to exactly one type")

    @property
    def types(self) -> tuple:
        return tuple(self.values_of)

    def type_of(self, value: str) -> str:
        for t, vals in self.values_of.items():
            if value in vals:
                return t
        raise KeyError(value)


@dataclass
class ConcentrationTable:
    syntax: tuple
    alpha_s_given_t: dict          # type -> normalized vector over ``syntax``
    words: tuple
    alpha_w_given_v: dict          # value -> normalized vector over ``words``
    tau: float
    rho_s: float = 1.0
    rho_w: float = 1.0
    _word_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._word_index = {w: i for i, w in enumerate(self.words)}

    def syntax_given_type(self, s: Category, t: str) -> float:
        return float(self.alpha_s_given_t[t][self.syntax.index(s)])

    def word_given_value(self, w: str, v: str) -> float:
        """Predictive mean of P(w | v); 1.0 (a constant factor) for unseen words."""
        i = self._word_index.get(w)
        if i is None:
            return 1.0
        return float(self.alpha_w_given_v[v][i])


def _softmax(x: np.ndarray) -> np.ndarray:
    # identical to exp(x) / sum(exp(x)), without overflow
    z = np.exp(x - x.max())
    return z / z.sum()


def compute_concentrations(lexicon: Lexicon, ontology: PropertyOntology, tau: float = 1.0,
                           rho_s: float = 1.0, rho_w: float = 1.0) -> ConcentrationTable:
    if not tau > 0:
        raise ConfigError(f"temperature must be positive, got {tau}")
    syntax = tuple(ontology.syntax)
    words = tuple(sorted(lexicon.words()))
    s_index = {s: i for i, s in enumerate(syntax)}
    w_index = {w: i for i, w in enumerate(words)}
    st = {t: np.zeros(len(syntax)) for t in ontology.types}
    wv = {v: np.zeros(len(words)) for vals in ontology.values_of.values() for v in vals}
    for e in lexicon:
        prop = extract_property(e.meaning)
        if prop is None:
            continue
        if e.category in s_index and prop.ptype in st:
            st[prop.ptype][s_index[e.category]] += e.weight
        if prop.value in wv:
            wv[prop.value][w_index[e.word]] += e.weight
    return ConcentrationTable(
        syntax=syntax,
        alpha_s_given_t={t: _softmax(sums / tau) for t, sums in st.items()},
        words=words,
        alpha_w_given_v={v: _softmax(sums / tau) if len(words) else sums for v, sums in wv.items()},
        tau=tau, rho_s=rho_s, rho_w=rho_w,
    )


def predictive(s: Category, w: str, table: ConcentrationTable, ontology: PropertyOntology) -> dict:
    """P(t, v | s, w) as a dict keyed by (type, value); sums to 1."""
    p_t = 1.0 / len(ontology.types)
    unnorm = {}
    for t, vals in ontology.values_of.items():
        syn = table.syntax_given_type(s, t)
        for v in vals:
            unnorm[t, v] = p_t * (1.0 / len(vals)) * syn * table.word_given_value(w, v)
    z = math.fsum(unnorm.values())
    return {k: p / z for k, p in unnorm.items()}


def type_marginal(posterior: Mapping[tuple, float]) -> dict:
    out: dict = {}
    for (t, _), p in posterior.items():
        out[t] = out.get(t, 0.0) + p
    return out


def belief_color_given_modifier(table: ConcentrationTable, types: Sequence[str] = ("color", "shape")) -> float:
    """P(t = color | s = NP/NP), normalized over the utterance-relevant types."""
    weights = {t: table.syntax_given_type(MODIFIER, t) for t in types}
    return weights["color"] / math.fsum(weights.values())
