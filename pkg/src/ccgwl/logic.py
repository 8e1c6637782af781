"""Typed lambda terms for word and sentence meanings.

Terms use de Bruijn indices internally (``Var(0)`` is the innermost binder), so
alpha-equivalent terms are structurally equal and hash identically. The textual
syntax used in logs and fixtures looks like::

    iota(and(sphere(x), blue(x)))
    lambda p. lambda x. and(p(x), blue(x))
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Union


class LogicError(Exception):
    pass


class TypingError(LogicError):
    """Ill-typed application or unbound variable."""


class EvaluationError(LogicError):
    pass


class MalformedEntryError(LogicError):
    """A word-level meaning mentions more than one property constant."""


class TermSyntaxError(LogicError):
    pass


# -- semantic types ----------------------------------------------------------


@dataclass(frozen=True)
class BaseType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FnType:
    arg: "SemanticType"
    result: "SemanticType"

    def __str__(self) -> str:
        return f"<{self.arg},{self.result}>"


SemanticType = Union[BaseType, FnType]

ENTITY = BaseType("e")
TRUTH = BaseType("t")
ENTITY_SET = BaseType("set")
PREDICATE = FnType(ENTITY, TRUTH)


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyDescriptor:
    ptype: str
    value: str

    def __str__(self) -> str:
        return f"{self.ptype}:{self.value}"


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Lam:
    var_type: SemanticType
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Prop:
    """A property constant; denotes the predicate ``Entity -> Truth``."""

    ptype: str
    value: str

    @property
    def descriptor(self) -> PropertyDescriptor:
        return PropertyDescriptor(self.ptype, self.value)


@dataclass(frozen=True)
class And:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Iota:
    pred: "Term"


Term = Union[Var, Lam, App, Prop, And, Iota]


def type_of(term: Term, ctx: tuple = ()) -> SemanticType:
    """Infer the type of ``term``; ``ctx[i]`` is the type bound by ``Var(i)``."""
    if isinstance(term, Var):
        if term.index >= len(ctx):
            raise TypingError(f"unbound variable #{term.index}")
        return ctx[term.index]
    if isinstance(term, Lam):
        return FnType(term.var_type, type_of(term.body, (term.var_type,) + ctx))
    if isinstance(term, App):
        fn_t = type_of(term.fn, ctx)
        arg_t = type_of(term.arg, ctx)
        if not isinstance(fn_t, FnType):
            raise TypingError(f"cannot apply non-function of type {fn_t}")
        if fn_t.arg != arg_t:
            raise TypingError(f"expected argument of type {fn_t.arg}, got {arg_t}")
        return fn_t.result
    if isinstance(term, Prop):
        return PREDICATE
    if isinstance(term, And):
        for side in (term.left, term.right):
            side_t = type_of(side, ctx)
            if side_t != TRUTH:
                raise TypingError(f"conjunct must be of type t, got {side_t}")
        return TRUTH
    if isinstance(term, Iota):
        pred_t = type_of(term.pred, ctx)
        if pred_t != PREDICATE:
            raise TypingError(f"iota needs a predicate, got {pred_t}")
        return ENTITY_SET
    raise TypeError(f"not a term: {term!r}")


# -- beta reduction ----------------------------------------------------------


def _shift(term: Term, d: int, cutoff: int = 0) -> Term:
    if isinstance(term, Var):
        return Var(term.index + d) if term.index >= cutoff else term
    if isinstance(term, Lam):
        return Lam(term.var_type, _shift(term.body, d, cutoff + 1))
    if isinstance(term, App):
        return App(_shift(term.fn, d, cutoff), _shift(term.arg, d, cutoff))
    if isinstance(term, And):
        return And(_shift(term.left, d, cutoff), _shift(term.right, d, cutoff))
    if isinstance(term, Iota):
        return Iota(_shift(term.pred, d, cutoff))
    return term


def _subst(term: Term, j: int, s: Term) -> Term:
    if isinstance(term, Var):
        return s if term.index == j else term
    if isinstance(term, Lam):
        return Lam(term.var_type, _subst(term.body, j + 1, _shift(s, 1)))
    if isinstance(term, App):
        return App(_subst(term.fn, j, s), _subst(term.arg, j, s))
    if isinstance(term, And):
        return And(_subst(term.left, j, s), _subst(term.right, j, s))
    if isinstance(term, Iota):
        return Iota(_subst(term.pred, j, s))
    return term


def _normalize(term: Term) -> Term:
    if isinstance(term, Lam):
        return Lam(term.var_type, _normalize(term.body))
    if isinstance(term, App):
        fn = _normalize(term.fn)
        if isinstance(fn, Lam):
            reduced = _shift(_subst(fn.body, 0, _shift(term.arg, 1)), -1)
            return _normalize(reduced)
        return App(fn, _normalize(term.arg))
    if isinstance(term, And):
        return And(_normalize(term.left), _normalize(term.right))
    if isinstance(term, Iota):
        return Iota(_normalize(term.pred))
    return term


@lru_cache(maxsize=1 << 16)
def beta_reduce(term: Term) -> Term:
    """Return the beta-normal form of a closed, well-typed term.

    Raises TypingError if any application inside ``term`` is ill-typed.
    """
    type_of(term)
    return _normalize(term)


def is_normal(term: Term) -> bool:
    if isinstance(term, App):
        return not isinstance(term.fn, Lam) and is_normal(term.fn) and is_normal(term.arg)
    if isinstance(term, Lam):
        return is_normal(term.body)
    if isinstance(term, And):
        return is_normal(term.left) and is_normal(term.right)
    if isinstance(term, Iota):
        return is_normal(term.pred)
    return True


# -- evaluation --------------------------------------------------------------


def _holds(body: Term, env: tuple) -> bool:
    if isinstance(body, And):
        return _holds(body.left, env) and _holds(body.right, env)
    if isinstance(body, App) and isinstance(body.fn, Prop):
        return getattr(_entity(body.arg, env), body.fn.ptype) == body.fn.value
    raise EvaluationError(f"cannot evaluate truth of {to_text(body, strict=False)}")


def _entity(term: Term, env: tuple):
    if isinstance(term, Var) and term.index < len(env):
        return env[term.index]
    raise EvaluationError("entity argument is not a bound variable")


@lru_cache(maxsize=1 << 14)
def _conjuncts(pred: Term) -> Optional[tuple]:
    """Flatten ``lambda x. a(x) & b(x) & ...`` into ((ptype, value), ...)."""
    if isinstance(pred, Prop):
        return ((pred.ptype, pred.value),)
    if not isinstance(pred, Lam):
        return None
    out = []
    stack = [pred.body]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, App) and isinstance(node.fn, Prop) and node.arg == Var(0):
            out.append((node.fn.ptype, node.fn.value))
        else:
            return None
    return tuple(out)


def _satisfiers(pred: Term, objects: Iterable) -> frozenset:
    tests = _conjuncts(pred)
    if tests is not None:
        return frozenset(
            o.id for o in objects if all(getattr(o, t) == v for t, v in tests)
        )
    if isinstance(pred, Lam):
        return frozenset(o.id for o in objects if _holds(pred.body, (o,)))
    raise EvaluationError(f"cannot evaluate predicate {to_text(pred, strict=False)}")


def evaluate(term: Term, objects: Iterable) -> frozenset:
    """Ids of the objects denoted by a closed predicate or iota term.

    ``objects`` are anything with an ``id`` and one attribute per property type
    (a Scene's objects). Iota denotes its full satisfier set: zero, one or many.
    """
    try:
        t = type_of(term)
    except TypingError as exc:
        raise EvaluationError(str(exc)) from exc
    if t == ENTITY_SET:
        if not isinstance(term, Iota):
            raise EvaluationError("entity-set term is not in normal form")
        return _satisfiers(term.pred, objects)
    if t == PREDICATE:
        return _satisfiers(term, objects)
    raise EvaluationError(f"cannot evaluate a term of type {t}")


def properties_in(term: Term) -> list:
    if isinstance(term, Prop):
        return [term.descriptor]
    if isinstance(term, Lam):
        return properties_in(term.body)
    if isinstance(term, App):
        return properties_in(term.fn) + properties_in(term.arg)
    if isinstance(term, And):
        return properties_in(term.left) + properties_in(term.right)
    if isinstance(term, Iota):
        return properties_in(term.pred)
    return []


def extract_property(term: Term) -> Optional[PropertyDescriptor]:
    found = properties_in(term)
    if len(found) > 1:
        raise MalformedEntryError(f"{len(found)} property constants in {to_text(term)}")
    return found[0] if found else None


# -- constructors for the word-level templates -------------------------------


def noun_meaning(ptype: str, value: str) -> Term:
    """``lambda x. v(x)``"""
    return Lam(ENTITY, App(Prop(ptype, value), Var(0)))


def modifier_meaning(ptype: str, value: str) -> Term:
    """``lambda p. lambda x. p(x) & v(x)``"""
    return Lam(PREDICATE, Lam(ENTITY, And(App(Var(1), Var(0)), App(Prop(ptype, value), Var(0)))))


DETERMINER_MEANING: Term = Lam(PREDICATE, Iota(Var(0)))


# -- printing ----------------------------------------------------------------

_NAME_POOLS = {"e": "xyzuvw", "pred": "pqrs", "other": "fghk"}


def _pool(t: SemanticType) -> str:
    if t == ENTITY:
        return "e"
    if t == PREDICATE:
        return "pred"
    return "other"


def _fresh(t: SemanticType, names: tuple) -> str:
    letters = _NAME_POOLS[_pool(t)]
    n = 0
    while True:
        for ch in letters:
            cand = ch if n == 0 else f"{ch}{n}"
            if cand not in names:
                return cand
        n += 1


def _type_annotation(t: SemanticType) -> str:
    default = {"e": ENTITY, "pred": PREDICATE}.get(_pool(t))
    return "" if default == t else f":{t}"


def to_text(term: Term, names: tuple = (), strict: bool = True) -> str:
    """Render a term in the ``lambda p. lambda x. and(p(x), blue(x))`` syntax."""
    if isinstance(term, Var):
        if term.index < len(names):
            return names[term.index]
        if strict:
            raise TypingError(f"unbound variable #{term.index}")
        return f"#{term.index}"
    if isinstance(term, Prop):
        return term.value
    if isinstance(term, Lam):
        name = _fresh(term.var_type, names)
        body = to_text(term.body, (name,) + names, strict)
        return f"lambda {name}{_type_annotation(term.var_type)}. {body}"
    if isinstance(term, App):
        fn = to_text(term.fn, names, strict)
        if isinstance(term.fn, Lam):
            fn = f"({fn})"
        return f"{fn}({to_text(term.arg, names, strict)})"
    if isinstance(term, And):
        return f"and({to_text(term.left, names, strict)}, {to_text(term.right, names, strict)})"
    if isinstance(term, Iota):
        pred = term.pred
        if isinstance(pred, Lam) and pred.var_type == ENTITY:
            name = _fresh(ENTITY, names)
            return f"iota({to_text(pred.body, (name,) + names, strict)})"
        return f"iota({to_text(pred, names, strict)})"
    raise TypeError(f"not a term: {term!r}")


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(lambda\b|\\|λ)|([A-Za-z_][A-Za-z0-9_\-]*)|(<|>|\(|\)|,|\.|:))")


def _tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        out.append("lambda" if m.group(1) else (m.group(2) or m.group(3)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, value_types: Mapping[str, str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.value_types = value_types

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise TermSyntaxError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def type_(self) -> SemanticType:
        tok = self.take()
        if tok == "<":
            arg = self.type_()
            self.take(",")
            res = self.type_()
            self.take(">")
            return FnType(arg, res)
        try:
            return {"e": ENTITY, "t": TRUTH, "set": ENTITY_SET}[tok]
        except KeyError:
            raise TermSyntaxError(f"unknown type {tok!r}") from None

    def term(self, scope: tuple) -> Term:
        if self.peek() == "lambda":
            self.take()
            name = self.take()
            if self.peek() == ":":
                self.take()
                var_type = self.type_()
            else:
                var_type = PREDICATE if name[0] in "pqrs" else ENTITY
            self.take(".")
            body = self.term(((name, var_type),) + scope)
            return Lam(var_type, body)
        head = self.atom(scope)
        while self.peek() == "(":
            self.take("(")
            head = App(head, self.term(scope))
            while self.peek() == ",":
                self.take(",")
                head = App(head, self.term(scope))
            self.take(")")
        return head

    def atom(self, scope: tuple) -> Term:
        tok = self.take()
        if tok == "(":
            inner = self.term(scope)
            self.take(")")
            return inner
        if tok == "and" and self.peek() == "(":
            self.take("(")
            left = self.term(scope)
            self.take(",")
            right = self.term(scope)
            self.take(")")
            return And(left, right)
        if tok == "iota" and self.peek() == "(":
            self.take("(")
            # an implicit entity binder lets ``iota(and(sphere(x), blue(x)))`` parse
            implicit = (("x", ENTITY),) + scope
            inner = self.term(implicit)
            self.take(")")
            ctx = tuple(t for _, t in implicit)
            if type_of(inner, ctx) == TRUTH:
                return Iota(Lam(ENTITY, inner))
            return Iota(_shift(inner, -1, 0))
        for idx, (name, _) in enumerate(scope):
            if name == tok:
                return Var(idx)
        if tok in self.value_types:
            return Prop(self.value_types[tok], tok)
        raise TermSyntaxError(f"unknown symbol {tok!r}")


def parse_term(text: str, value_types: Mapping[str, str]) -> Term:
    """Parse the textual syntax; ``value_types`` maps property value -> type."""
    parser = _Parser(text, value_types)
    term = parser.term(())
    if parser.peek() is not None:
        raise TermSyntaxError(f"trailing input at {parser.peek()!r}")
    type_of(term)
    return term
