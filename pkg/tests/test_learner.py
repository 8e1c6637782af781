import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccgwl.grammar import MODIFIER, NP, Lexicon, parse_all
from ccgwl.induction import bootstrap_lexicon, induce
from ccgwl.learner import (
    LearnerConfig, _seed_weights, features, make_state, observe, perceptron_update,
    predict_referent, probe_novel_word, state_from_text, state_to_text,
)
from ccgwl.logic import modifier_meaning, noun_meaning
from ccgwl.overhypothesis import predictive
from ccgwl.scene import (
    ConfigError, DatasetConfig, ReferenceTrial, Scene, SceneObject, generate_dataset, validate,
)

CFG = DatasetConfig()


def obj(i, color, shape):
    return SceneObject(i, color, shape, "rubber", "small")


TWO = Scene((obj(0, "red", "sphere"), obj(1, "blue", "cube")))


def margin(tokens, lex, scene, referent):
    derivs = parse_all(tokens, lex)
    good = [d for d in derivs if validate(d.logical_form, scene) == {referent}]
    bad = [d for d in derivs if validate(d.logical_form, scene) != {referent}]
    return good[0].score - bad[0].score, good[0], bad[0]


def sq_dist(g, b):
    fg, fb = features(g), features(b)
    return sum((fg[k] - fb[k]) ** 2 for k in set(fg) | set(fb))


def test_single_pair_margin_increases_by_feature_distance():
    lex = Lexicon()
    lex.add("w", NP, noun_meaning("color", "red"), 0.0)
    lex.add("w", NP, noun_meaning("color", "blue"), 0.5)
    before, g, b = margin(["w"], lex, TWO, 0)
    rep = perceptron_update(["w"], 0, TWO, lex, margin=1.0)
    after, _, _ = margin(["w"], lex, TWO, 0)
    assert rep.violations == 1
    assert after - before == sq_dist(g, b) == 2
    assert [e.weight for e in lex] == [1.0, -0.5]


def test_shared_determiner_cancels():
    lex = bootstrap_lexicon()
    lex.add("a", MODIFIER, modifier_meaning("color", "blue"), 0.3)
    lex.add("b", NP, noun_meaning("shape", "sphere"), 0.1)
    lex.add("b", NP, noun_meaning("shape", "cube"), 0.2)
    scene = Scene((obj(0, "blue", "sphere"), obj(1, "blue", "cube")))
    tokens = ["the", "a", "b"]
    before, g, b = margin(tokens, lex, scene, 0)
    the_before = lex.lookup("the")[0].weight
    perceptron_update(tokens, 0, scene, lex)
    after, _, _ = margin(tokens, lex, scene, 0)
    assert after - before == sq_dist(g, b) == 2
    assert lex.lookup("the")[0].weight == the_before
    assert lex.lookup("a")[0].weight == 0.3


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 5))
def test_single_pair_property(wg, wb, gamma):
    lex = Lexicon()
    lex.add("w", NP, noun_meaning("color", "red"), wg)
    lex.add("w", NP, noun_meaning("color", "blue"), wb)
    before, g, b = margin(["w"], lex, TWO, 0)
    snapshot = [e.weight for e in lex]
    rep = perceptron_update(["w"], 0, TWO, lex, margin=gamma)
    after, _, _ = margin(["w"], lex, TWO, 0)
    if before < gamma:
        assert rep.violations == 1
        assert after - before == pytest.approx(sq_dist(g, b), abs=1e-12)
    else:
        assert rep.violations == 0
        assert [e.weight for e in lex] == snapshot


def test_noop_when_margin_met():
    lex = Lexicon()
    lex.add("w", NP, noun_meaning("color", "red"), 5.0)
    lex.add("w", NP, noun_meaning("color", "blue"), 0.1)
    snapshot = [(e.weight).hex() for e in lex]
    rep = perceptron_update(["w"], 0, TWO, lex)
    assert rep.deltas == {} and rep.norm == 0.0
    assert [(e.weight).hex() for e in lex] == snapshot


@pytest.mark.parametrize("meanings", [["red"], ["green", "blue"]], ids=["no-bad", "no-good"])
def test_noop_without_both_groups(meanings):
    lex = Lexicon()
    for m in meanings:
        lex.add("w", NP, noun_meaning("color", m), 0.25)
    snapshot = [(e.weight).hex() for e in lex]
    perceptron_update(["w"], 0, TWO, lex)
    assert [(e.weight).hex() for e in lex] == snapshot


def test_mean_over_violators():
    lex = Lexicon()
    lex.add("w", NP, noun_meaning("color", "red"), 0.0)
    lex.add("w", NP, noun_meaning("shape", "cube"), 0.0)
    lex.add("w", NP, noun_meaning("color", "blue"), 0.0)
    perceptron_update(["w"], 0, TWO, lex)
    assert [e.weight for e in lex] == [1.0, -0.5, -0.5]


def test_config_validation():
    with pytest.raises(ConfigError):
        LearnerConfig(mode="other")
    with pytest.raises(ConfigError):
        LearnerConfig(tau=0.0)
    with pytest.raises(ConfigError):
        LearnerConfig(margin=-1.0)


FIRST = ReferenceTrial(TWO, ("the", "blue", "ball"), 1)


@pytest.mark.parametrize("mode", ["base", "overhypothesis"])
def test_first_observation(mode):
    state = make_state(LearnerConfig(mode=mode, seed=3), CFG)
    out = observe(FIRST, state)
    assert not out.correct_before and not out.parsed and not out.skipped
    assert sorted(e.word for e in out.added) == ["ball", "blue"]
    assert out.induced == {"blue": (20, 2), "ball": (20, 2)}
    assert predict_referent(FIRST.utterance, TWO, state) == 1
    assert state.trials_seen == 1
    # second exposure parses with the stored entries and induces nothing
    out2 = observe(FIRST, state)
    assert out2.correct_before and out2.parsed and not out2.added


def test_seed_weights_by_mode():
    trial = ReferenceTrial(TWO, ("the", "dax", "wug"), 0)
    base = make_state(LearnerConfig(mode="base", epsilon=0.01, seed=1), CFG)
    cands = induce(trial.utterance, 0, TWO, base.lexicon, base.ontology.values_of).candidates
    _seed_weights(base, cands)
    ws = [c.entry.weight for cs in cands.values() for c in cs]
    assert all(0.0 <= w < 0.01 for w in ws) and len(set(ws)) == len(ws)

    over = make_state(LearnerConfig(mode="overhypothesis", kappa=2.0), CFG)
    cands = induce(trial.utterance, 0, TWO, over.lexicon, over.ontology.values_of).candidates
    _seed_weights(over, cands)
    for tok, cs in cands.items():
        for c in cs:
            post = predictive(c.entry.category, tok, over.table, over.ontology)
            assert c.entry.weight == 2.0 * post[c.property.ptype, c.property.value]


def _train(mode, n, seed=0):
    train, _ = generate_dataset(CFG)
    state = make_state(LearnerConfig(mode=mode, seed=seed), CFG)
    outs = [observe(t, state) for t in train[:n]]
    return state, outs


def test_replay_is_deterministic():
    a, oa = _train("base", 40, seed=5)
    b, ob = _train("base", 40, seed=5)
    assert state_to_text(a) == state_to_text(b)
    assert [o.to_record() for o in oa] == [o.to_record() for o in ob]


def test_predict_referent_none_cases():
    state = make_state(LearnerConfig(), CFG)
    assert predict_referent(("the", "dax"), TWO, state) is None
    state.lexicon.add("dax", NP, noun_meaning("color", "green"))
    assert predict_referent(("dax",), TWO, state) is None  # empty denotation


def test_probes():
    base = make_state(LearnerConfig(mode="base"), CFG)
    assert probe_novel_word("modifier", base) == {"color": 0.5, "shape": 0.5}
    fresh = make_state(LearnerConfig(), CFG)
    assert probe_novel_word("noun", fresh) == pytest.approx({"color": 0.5, "shape": 0.5})
    state, outs = _train("overhypothesis", 400)
    mod, noun = probe_novel_word("modifier", state), probe_novel_word("noun", state)
    assert mod["color"] > mod["shape"] and noun["shape"] > noun["color"]
    assert math.fsum(mod.values()) == pytest.approx(1.0)
    assert outs[-1].belief == state.belief() > 0.5


def test_state_round_trip():
    state, _ = _train("overhypothesis", 20)
    text = state_to_text(state)
    back = state_from_text(text, state.ontology)
    assert back.config == state.config and back.trials_seen == 20
    assert state_to_text(back) == text
    assert back.belief() == state.belief()


def test_learning_improves_accuracy():
    train, test = generate_dataset(CFG)
    state = make_state(LearnerConfig(), CFG)
    before = np.mean([predict_referent(t.utterance, t.scene, state) == t.referent for t in test])
    for t in train:
        observe(t, state)
    assert before == 0.0
    hits = np.mean([predict_referent(t.utterance, t.scene, state) == t.referent for t in test])
    assert hits > 0.8
