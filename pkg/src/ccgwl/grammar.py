"""CCG categories, the weighted lexicon, forward application and chart parsing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .logic import App, Term, TypingError, beta_reduce, parse_term, to_text


class GrammarError(Exception):
    pass


class UnknownWordError(GrammarError):
    def __init__(self, token: str):
        super().__init__(f"no lexical entry for {token!r}")
        self.token = token


class NoParseError(GrammarError):
    pass


class CompositionError(GrammarError):
    """Categories matched but the meanings do not compose."""


# -- categories --------------------------------------------------------------


@dataclass(frozen=True)
class Primitive:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Slash:
    """Forward-slash functor ``result/arg``."""

    result: "Category"
    arg: "Category"

    def __str__(self) -> str:
        def wrap(c):
            return f"({c})" if isinstance(c, Slash) else str(c)
        return f"{wrap(self.result)}/{wrap(self.arg)}"


Category = Union[Primitive, Slash]

NP = Primitive("NP")
MODIFIER = Slash(NP, NP)


def parse_category(text: str) -> Category:
    text = text.strip()
    depth = 0
    split_at = None
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            split_at = i  # slash is left-associative: split at the last one
    if split_at is not None:
        return Slash(parse_category(text[:split_at]), parse_category(text[split_at + 1:]))
    if text.startswith("(") and text.endswith(")"):
        return parse_category(text[1:-1])
    if not text.isalnum():
        raise GrammarError(f"bad category {text!r}")
    return Primitive(text)


# -- lexicon -----------------------------------------------------------------


@dataclass(eq=False)
class LexicalEntry:
    word: str
    category: Category
    meaning: Term
    weight: float = 0.0
    index: int = -1  # insertion order within its lexicon

    @property
    def key(self) -> tuple:
        return (self.word, self.category, self.meaning)

    def __repr__(self) -> str:
        return (f"LexicalEntry({self.word!r} := {self.category} : {to_text(self.meaning)}, "
                f"weight={self.weight:g}, index={self.index})")


class Lexicon:
    """Weighted multimap wordform -> entries, in insertion order."""

    def __init__(self, entries: Iterable[LexicalEntry] = ()):
        self.entries: list = []
        self._by_word: dict = {}
        self._by_key: dict = {}
        for e in entries:
            self.insert(e)

    def add(self, word: str, category: Category, meaning: Term, weight: float = 0.0) -> LexicalEntry:
        return self.insert(LexicalEntry(word, category, meaning, weight))

    def insert(self, entry: LexicalEntry) -> LexicalEntry:
        if entry.key in self._by_key:
            raise GrammarError(f"duplicate entry {entry!r}")
        if not math.isfinite(entry.weight):
            raise GrammarError(f"non-finite weight for {entry!r}")
        entry.index = len(self.entries)
        self.entries.append(entry)
        self._by_word.setdefault(entry.word, []).append(entry)
        self._by_key[entry.key] = entry
        return entry

    def lookup(self, word: str) -> list:
        return self._by_word.get(word, [])

    def find(self, word: str, category: Category, meaning: Term) -> Optional[LexicalEntry]:
        return self._by_key.get((word, category, meaning))

    def words(self) -> list:
        return list(self._by_word)

    def copy(self) -> "Lexicon":
        """Shallow copy: new containers, shared entry objects."""
        new = Lexicon()
        new.entries = list(self.entries)
        new._by_word = {w: list(es) for w, es in self._by_word.items()}
        new._by_key = dict(self._by_key)
        return new

    def __contains__(self, word: str) -> bool:
        return word in self._by_word

    def __iter__(self) -> Iterator[LexicalEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def dumps(self) -> str:
        """One ``word TAB category TAB term TAB weight`` line per entry."""
        return "".join(
            f"{e.word}\t{e.category}\t{to_text(e.meaning)}\t{e.weight!r}\n" for e in self.entries
        )

    @classmethod
    def loads(cls, text: str, value_types: Mapping[str, str]) -> "Lexicon":
        lex = cls()
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            word, cat, term, weight = line.split("\t")
            lex.add(word, parse_category(cat), parse_term(term, value_types), float(weight))
        return lex


# -- derivations -------------------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    leaves: tuple           # LexicalEntry per token, in order
    tree: object            # leaf position, or (left_tree, right_tree)
    category: Category
    logical_form: Term
    score: float

    @property
    def leaf_indices(self) -> tuple:
        return tuple(e.index for e in self.leaves)

    def sort_key(self) -> tuple:
        return (self.leaf_indices, repr(self.tree))


@lru_cache(maxsize=1 << 16)
def _compose(fn: Term, arg: Term) -> Term:
    return beta_reduce(App(fn, arg))


def forward_apply(left: tuple, right: tuple) -> Optional[tuple]:
    """``X/Y : f`` + ``Y : a`` -> ``X : f(a)``; None if the categories don't fit."""
    lcat, lterm = left
    rcat, rterm = right
    if not isinstance(lcat, Slash) or lcat.arg != rcat:
        return None
    try:
        return lcat.result, _compose(lterm, rterm)
    except TypingError as exc:
        raise CompositionError(f"{lcat} + {rcat}: {exc}") from exc


RULES: tuple = (forward_apply,)


def parse_all(tokens: Sequence[str], lexicon: Lexicon, rules: tuple = RULES,
              root: Category = NP) -> list:
    """Every complete derivation of ``tokens`` rooted in ``root`` (CYK, exhaustive).

    Scores are the sum of leaf weights. Output is ordered by leaf insertion
    indices, then tree shape.
    """
    n = len(tokens)
    if n == 0:
        return []
    chart: dict = {}
    for i, tok in enumerate(tokens):
        entries = lexicon.lookup(tok)
        if not entries:
            raise UnknownWordError(tok)
        chart[i, i + 1] = [(e.category, e.meaning, i, (e,)) for e in entries]
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = []
            for k in range(i + 1, j):
                for lcat, lterm, ltree, lleaves in chart[i, k]:
                    for rcat, rterm, rtree, rleaves in chart[k, j]:
                        for rule in rules:
                            out = rule((lcat, lterm), (rcat, rterm))
                            if out is not None:
                                cell.append((out[0], out[1], (ltree, rtree), lleaves + rleaves))
            chart[i, j] = cell
    derivations = [
        Derivation(leaves, tree, cat, term, sum(e.weight for e in leaves))
        for cat, term, tree, leaves in chart[0, n]
        if cat == root
    ]
    derivations.sort(key=Derivation.sort_key)
    return derivations


def parse_distribution(tokens: Sequence[str], lexicon: Lexicon,
                       derivations: Optional[list] = None) -> list:
    """(derivation, probability) pairs under the log-linear model over leaf weights."""
    if derivations is None:
        derivations = parse_all(tokens, lexicon)
    if not derivations:
        raise NoParseError(f"no derivation for {' '.join(tokens)!r}")
    top = max(d.score for d in derivations)
    unnorm = [math.exp(d.score - top) for d in derivations]
    z = math.fsum(unnorm)
    return [(d, u / z) for d, u in zip(derivations, unnorm)]


def best_of(derivations: Iterable[Derivation]) -> Optional[Derivation]:
    """Highest score; ties go to the smallest leaf insertion-index tuple."""
    best = None
    for d in derivations:
        if best is None or d.score > best.score or (
                d.score == best.score and d.sort_key() < best.sort_key()):
            best = d
    return best


def best_parse(tokens: Sequence[str], lexicon: Lexicon) -> Derivation:
    best = best_of(parse_all(tokens, lexicon))
    if best is None:
        raise NoParseError(f"no derivation for {' '.join(tokens)!r}")
    return best
