"""Candidate lexical entries for words that stop an utterance reaching its referent."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .grammar import (
    MODIFIER, NP, Category, LexicalEntry, Lexicon, UnknownWordError, parse_all,
)
from .logic import DETERMINER_MEANING, PropertyDescriptor, modifier_meaning, noun_meaning
from .scene import Scene, validate

# category -> meaning constructor over a single property
TEMPLATES = {NP: noun_meaning, MODIFIER: modifier_meaning}

DETERMINER = "the"


class InductionFailure(Exception):
    def __init__(self, tokens, gaps):
        super().__init__(f"no candidate assignment for {list(gaps)} maps {' '.join(tokens)!r} to its referent")
        self.tokens = tuple(tokens)
        self.gaps = tuple(gaps)


@dataclass
class CandidateEntry:
    entry: LexicalEntry
    property: Optional[PropertyDescriptor]


@dataclass
class InductionResult:
    candidates: dict                               # token -> [CandidateEntry]
    pool_sizes: dict = field(default_factory=dict)  # token -> count before filtering


def bootstrap_lexicon() -> Lexicon:
    """The seeded determiner ``the := NP/NP : lambda p. iota(p)``."""
    lex = Lexicon()
    lex.add(DETERMINER, MODIFIER, DETERMINER_MEANING, 0.0)
    return lex


def _derives(cats: Sequence[frozenset], root: Category = NP) -> bool:
    """Whether some choice of one category per position forward-applies to ``root``."""
    n = len(cats)
    chart = {(i, i + 1): set(c) for i, c in enumerate(cats)}
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = set()
            for k in range(i + 1, j):
                for left in chart[i, k]:
                    if getattr(left, "arg", None) in chart[k, j]:
                        cell.add(left.result)
            chart[i, j] = cell
    return root in chart[0, n]


def syntactic_slot(tokens: Sequence[str], position: int, lexicon: Optional[Lexicon] = None,
                   gaps: Optional[set] = None) -> list:
    """Template categories for ``tokens[position]`` that admit a complete NP parse.

    Gap tokens (default: tokens missing from ``lexicon``) may take any template
    category in addition to their existing ones.
    """
    if lexicon is None:
        lexicon = bootstrap_lexicon()
    if gaps is None:
        gaps = {t for t in tokens if t not in lexicon}
    gaps = set(gaps) | {tokens[position]}
    per_pos = []
    for tok in tokens:
        known = {e.category for e in lexicon.lookup(tok)}
        per_pos.append(frozenset(known | set(TEMPLATES) if tok in gaps else known))
    out = []
    for cat in TEMPLATES:
        cats = list(per_pos)
        cats[position] = frozenset({cat})
        if _derives(cats):
            out.append(cat)
    return out


def _candidate_pool(tokens, gaps, lexicon, values_of) -> dict:
    pool = {}
    for tok in gaps:
        allowed = []
        for pos, t in enumerate(tokens):
            if t == tok:
                allowed += [c for c in syntactic_slot(tokens, pos, lexicon, set(gaps)) if c not in allowed]
        cands = []
        for cat in TEMPLATES:
            if cat not in allowed:
                continue
            for ptype, values in values_of.items():
                for value in values:
                    meaning = TEMPLATES[cat](ptype, value)
                    if lexicon.find(tok, cat, meaning) is None:
                        cands.append(CandidateEntry(LexicalEntry(tok, cat, meaning, 0.0),
                                                    PropertyDescriptor(ptype, value)))
        pool[tok] = cands
    return pool


def valid_derivations(tokens, referent: int, scene: Scene, lexicon: Lexicon) -> list:
    target = frozenset({referent})
    return [d for d in parse_all(tokens, lexicon) if validate(d.logical_form, scene) == target]


def _filter(tokens, referent, scene, lexicon, pool) -> dict:
    augmented = lexicon.copy()
    for cands in pool.values():
        for c in cands:
            augmented.insert(c.entry)
    used = set()
    for d in valid_derivations(tokens, referent, scene, augmented):
        used.update(id(e) for e in d.leaves)
    return {tok: [c for c in cands if id(c.entry) in used] for tok, cands in pool.items()}


def needs_induction(tokens, referent, scene, lexicon) -> bool:
    try:
        return not valid_derivations(tokens, referent, scene, lexicon)
    except UnknownWordError:
        return True


def induce(tokens: Sequence[str], referent: int, scene: Scene, lexicon: Lexicon,
           values_of: Mapping[str, Sequence[str]], fixed_words=(DETERMINER,)) -> InductionResult:
    """Candidates for the words blocking ``tokens`` from denoting exactly ``{referent}``.

    Unknown words are tried first. If no assignment to them works, every
    non-fixed word becomes a gap (known words keep their existing entries).
    Returned candidates carry weight 0 and are not inserted into ``lexicon``.
    """
    if not needs_induction(tokens, referent, scene, lexicon):
        return InductionResult({})
    unknown = [t for t in dict.fromkeys(tokens) if t not in lexicon]
    content = [t for t in dict.fromkeys(tokens) if t not in fixed_words or t not in lexicon]
    attempts = [unknown] if unknown else []
    if content != unknown:
        attempts.append(content)
    for gaps in attempts:
        pool = _candidate_pool(tokens, gaps, lexicon, values_of)
        if any(not cands for tok, cands in pool.items() if tok not in lexicon):
            continue
        survivors = _filter(tokens, referent, scene, lexicon, pool)
        if any(survivors.values()):
            return InductionResult(survivors, {t: len(c) for t, c in pool.items()})
    raise InductionFailure(tokens, attempts[-1] if attempts else [])


def generate_candidates(tokens, referent, scene, lexicon, values_of) -> dict:
    """token -> surviving CandidateEntry list (empty map if nothing is missing)."""
    return induce(tokens, referent, scene, lexicon, values_of).candidates
