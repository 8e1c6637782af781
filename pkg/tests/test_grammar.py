import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccgwl.grammar import (
    MODIFIER, NP, CompositionError, Lexicon, NoParseError, Primitive, Slash, UnknownWordError,
    best_parse, forward_apply, parse_all, parse_category, parse_distribution,
)
from ccgwl.induction import bootstrap_lexicon
from ccgwl.logic import (
    App, DETERMINER_MEANING, Iota, beta_reduce, modifier_meaning, noun_meaning, to_text,
)
from ccgwl.scene import DatasetConfig

from oracles import brute_force_parses, random_lexicon

BLUE = modifier_meaning("color", "blue")
SPHERE = noun_meaning("shape", "sphere")
VALUES = [("color", "red"), ("color", "blue"), ("shape", "cube"), ("shape", "sphere")]


def fig3_lexicon():
    lex = bootstrap_lexicon()
    lex.add("blue", MODIFIER, BLUE, 0.4)
    lex.add("ball", NP, SPHERE, -0.2)
    return lex


def test_category_text():
    assert str(MODIFIER) == "NP/NP"
    assert parse_category("NP/NP") == MODIFIER
    assert parse_category("(NP/NP)/(NP/NP)") == Slash(MODIFIER, MODIFIER)
    assert parse_category("NP") == Primitive("NP")


def test_forward_apply_modifier():
    cat, term = forward_apply((MODIFIER, BLUE), (NP, SPHERE))
    assert cat == NP
    assert to_text(term) == "lambda x. and(sphere(x), blue(x))"


def test_forward_apply_needs_functor():
    assert forward_apply((NP, SPHERE), (NP, SPHERE)) is None


def test_forward_apply_determiner():
    cat, term = forward_apply((MODIFIER, DETERMINER_MEANING), (NP, beta_reduce(App(BLUE, SPHERE))))
    assert cat == NP
    assert to_text(term) == "iota(and(sphere(x), blue(x)))"


def test_forward_apply_type_clash():
    with pytest.raises(CompositionError):
        forward_apply((MODIFIER, DETERMINER_MEANING), (NP, Iota(SPHERE)))


def test_parse_the_blue_ball():
    lex = fig3_lexicon()
    (d,) = parse_all(["the", "blue", "ball"], lex)
    assert to_text(d.logical_form) == "iota(and(sphere(x), blue(x)))"
    assert d.score == pytest.approx(0.0 + 0.4 - 0.2)
    assert [e.word for e in d.leaves] == ["the", "blue", "ball"]


def test_unknown_word():
    with pytest.raises(UnknownWordError) as exc:
        parse_all(["the", "dax", "ball"], fig3_lexicon())
    assert exc.value.token == "dax"


def test_two_by_two_entries_give_four_parses():
    lex = fig3_lexicon()
    lex.add("blue", MODIFIER, modifier_meaning("shape", "cube"), 0.1)
    lex.add("ball", NP, noun_meaning("color", "red"), 0.3)
    derivs = parse_all(["the", "blue", "ball"], lex)
    assert len(derivs) == 4
    expected = list(itertools.product([lex.lookup("the")[0].index],
                                      [e.index for e in lex.lookup("blue")],
                                      [e.index for e in lex.lookup("ball")]))
    assert [d.leaf_indices for d in derivs] == expected
    assert {(d.leaf_indices, d.tree, d.logical_form, d.score) for d in derivs} == \
        brute_force_parses(["the", "blue", "ball"], lex)


def two_parse_lexicon(s1, s2):
    lex = Lexicon()
    lex.add("w", NP, noun_meaning("color", "red"), s1)
    lex.add("w", NP, noun_meaning("color", "blue"), s2)
    return lex


def test_distribution_single():
    lex = fig3_lexicon()
    ((_, p),) = parse_distribution(["the", "blue", "ball"], lex)
    assert p == 1.0


def test_distribution_equal_scores():
    probs = [p for _, p in parse_distribution(["w"], two_parse_lexicon(0.3, 0.3))]
    assert probs == [0.5, 0.5]


def test_distribution_one_zero():
    probs = [p for _, p in parse_distribution(["w"], two_parse_lexicon(1.0, 0.0))]
    e = math.e
    assert probs[0] == pytest.approx(e / (e + 1), abs=1e-12)
    assert probs[1] == pytest.approx(1 / (e + 1), abs=1e-12)
    assert probs[0] == pytest.approx(0.7311, abs=1e-4)


def test_distribution_no_parse():
    lex = Lexicon()
    lex.add("w", MODIFIER, BLUE)
    with pytest.raises(NoParseError):
        parse_distribution(["w"], lex)


def test_distribution_overflow_safe():
    probs = [p for _, p in parse_distribution(["w"], two_parse_lexicon(2000.0, 1999.0))]
    assert probs[0] == pytest.approx(math.e / (math.e + 1))


def test_best_parse_argmax_and_ties():
    assert best_parse(["w"], two_parse_lexicon(2.0, 1.0)).leaves[0].weight == 2.0
    assert best_parse(["w"], two_parse_lexicon(1.0, 2.0)).leaves[0].weight == 2.0
    lex = Lexicon()
    for v in ["red", "blue"]:
        lex.add("a", MODIFIER, modifier_meaning("color", v), 0.5)
    for v in ["cube", "sphere"]:
        lex.add("b", NP, noun_meaning("shape", v), 0.5)
    first = best_parse(["a", "b"], lex)
    assert first.leaf_indices == (0, 2)
    # replay: identical lexicon contents give the identical choice
    again = Lexicon()
    for e in lex:
        again.add(e.word, e.category, e.meaning, e.weight)
    assert best_parse(["a", "b"], again).leaf_indices == first.leaf_indices


def test_lexicon_serialization_round_trip():
    lex = fig3_lexicon()
    text = lex.dumps()
    assert text.splitlines()[1] == "blue\tNP/NP\tlambda p. lambda x. and(p(x), blue(x))\t0.4"
    back = Lexicon.loads(text, DatasetConfig().value_types())
    assert [(e.word, e.category, e.meaning, e.weight) for e in back] == \
        [(e.word, e.category, e.meaning, e.weight) for e in lex]


def test_duplicate_entry_rejected():
    lex = fig3_lexicon()
    with pytest.raises(Exception):
        lex.add("blue", MODIFIER, BLUE, 1.0)


def _build(rows):
    lex = Lexicon()
    for w, c, m, theta in rows:
        lex.add(w, c, m, theta)
    return lex


def _chart_set(tokens, lex):
    return {(d.leaf_indices, d.tree, d.logical_form, d.score) for d in parse_all(tokens, lex)}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_chart_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    lex = _build(random_lexicon(rng, ["a", "b", "c"], VALUES))
    for n in range(1, 4):
        for tokens in itertools.product("abc", repeat=n):
            assert _chart_set(tokens, lex) == brute_force_parses(tokens, lex)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-50, 50))
def test_shift_invariance(seed, c):
    rng = np.random.default_rng(seed)
    rows = random_lexicon(rng, ["a", "b"], VALUES)
    lex = _build(rows)
    shifted = _build([(w, cat, m, theta + c) for w, cat, m, theta in rows])
    for tokens in itertools.product("ab", repeat=3):
        try:
            p1 = parse_distribution(tokens, lex)
        except NoParseError:
            continue
        p2 = parse_distribution(tokens, shifted)
        assert [p for _, p in p1] == pytest.approx([p for _, p in p2], abs=1e-9)
        assert math.fsum(p for _, p in p1) == pytest.approx(1.0, abs=1e-9)
        assert best_parse(tokens, lex).sort_key() == best_parse(tokens, shifted).sort_key()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_removing_entries_never_adds_derivations(seed):
    rng = np.random.default_rng(seed)
    rows = random_lexicon(rng, ["a", "b"], VALUES)
    drop = int(rng.integers(len(rows)))
    full = _build(rows)
    fewer = _build(rows[:drop] + rows[drop + 1:])
    for tokens in itertools.product("ab", repeat=3):
        try:
            small = {(tuple(e.key for e in d.leaves), d.tree) for d in parse_all(tokens, fewer)}
        except UnknownWordError:
            continue
        big = {(tuple(e.key for e in d.leaves), d.tree) for d in parse_all(tokens, full)}
        assert small <= big
