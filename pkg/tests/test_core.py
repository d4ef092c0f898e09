import json
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nesykc.core import (
    Language,
    ProbabilityVector,
    State,
    Theory,
    VariableSet,
    card_theory,
    edge_theory,
    three_path_theory,
    logit,
    ranked,
    satisfies,
    sigmoid,
    vertex_theory,
)
from nesykc.errors import CycleError, DimensionError, OracleCapError, TheoryError, UnsatisfiableError
from nesykc.generators import random_probs, random_theory
from nesykc.oracle import model_mask, oracle_model_matrix, oracle_models, oracle_query, state_chunks

THREE_PATH_MODELS = [("Y1", "Y4"), ("Y1", "Y3", "Y5", "Y6"), ("Y2", "Y5", "Y6")]
THREE_PATH_P = [0.9, 0.2, 0.6, 0.3, 0.8, 0.7]


def names(states, vars):
    return {tuple(s.true_names(vars)) for s in states}


def test_variable_set_rejects_duplicates_and_empty():
    with pytest.raises(TheoryError):
        VariableSet(("a", "a"))
    with pytest.raises(TheoryError):
        VariableSet(())
    vs = VariableSet(("x", "y"))
    assert vs.index("y") == 1 and vs[0] == "x" and len(vs) == 2


def test_state_dimension_check():
    t = three_path_theory()
    with pytest.raises(DimensionError):
        satisfies(t, State((1, 0)))


def test_three_path_satisfies():
    t = three_path_theory()
    assert satisfies(t, State.from_true(t.vars, ["Y1", "Y4"]))
    assert not satisfies(t, State.from_true(t.vars, ["Y1", "Y2"]))
    assert not satisfies(t, State.zeros(6))


def test_card_eq_zero():
    t = card_theory(3, "eq", 0)
    models = oracle_models(t)
    assert models == [State((0, 0, 0))]


def test_three_path_oracle_models():
    t = three_path_theory()
    assert names(oracle_models(t), t.vars) == set(THREE_PATH_MODELS)


def test_match_path_models():
    t = edge_theory("match", [("a", "b"), ("b", "c"), ("c", "d")])
    got = names(oracle_models(t), t.vars)
    assert got == {(), ("Y1",), ("Y2",), ("Y3",), ("Y1", "Y3")}


def test_hier_single_edge_closures():
    t = vertex_theory("hier", ["u", "v"], [("u", "v")])
    assert names(oracle_models(t), t.vars) == {(), ("u",), ("u", "v")}


def test_oracle_models_are_lexicographic(rng):
    for lang in Language:
        t = random_theory(lang, rng, 10)
        models = oracle_models(t)
        assert models == sorted(models)


def test_oracle_queries_on_three_path_dag():
    t = three_path_theory()
    u = ProbabilityVector.uniform(t.vars)
    assert oracle_query(t, u, "pqe").value == pytest.approx(3 / 64, rel=1e-12)
    assert oracle_query(t, u, "eqe").value == pytest.approx(math.log(3), abs=1e-12)
    p = ProbabilityVector(t.vars, THREE_PATH_P)
    mpe = oracle_query(t, p, "mpe")
    assert mpe.state.true_names(t.vars) == ["Y1", "Y3", "Y5", "Y6"]
    assert mpe.value == pytest.approx(0.169344, rel=1e-12)
    assert oracle_query(t, p, "pqe").value == pytest.approx(0.177664, rel=1e-12)
    th = oracle_query(t, p, "thresh", 0.003)
    assert th.probabilities == pytest.approx((0.169344, 0.005184, 0.003136), rel=1e-12)


def test_oracle_mpe_tie_break_is_smallest_bit_string():
    t = three_path_theory()
    res = oracle_query(t, ProbabilityVector.uniform(t.vars), "mpe")
    assert res.state.true_names(t.vars) == ["Y2", "Y5", "Y6"]
    assert res.value == pytest.approx(1 / 64)


def test_oracle_unsatisfiable_and_cap():
    t = card_theory(2, "ge", 2)
    p = ProbabilityVector.uniform(t.vars)
    with pytest.raises(OracleCapError):
        oracle_models(card_theory(30, "le", 3))
    with pytest.raises(OracleCapError):
        oracle_query(t, p, "pqe", cap=1)
    # every well-formed theory has a model, so supply an empty model set directly
    empty = np.zeros((0, 2), dtype=np.uint8)
    with pytest.raises(UnsatisfiableError):
        oracle_query(t, p, "mpe", models=empty)
    with pytest.raises(UnsatisfiableError):
        oracle_query(t, p, "eqe", models=empty)


def test_card_bound_validated():
    with pytest.raises(TheoryError):
        card_theory(2, "eq", 3)


def test_aspath_rejects_cycles():
    with pytest.raises(CycleError):
        edge_theory("aspath", [("a", "b"), ("b", "a")])
    edge_theory("spath", [("a", "b"), ("b", "a")])


def test_tree_languages_require_arborescence():
    with pytest.raises(TheoryError):
        vertex_theory("tree-hier", ["a", "b", "c"], [("a", "c"), ("b", "c")])


def test_logit_values():
    assert logit(0.5) == 0.0
    assert logit(0.9) == pytest.approx(math.log(9), rel=1e-12)
    assert logit(0.2) < logit(0.3)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_sigmoid_inverts_logit(p):
    assert sigmoid(logit(p)) == pytest.approx(p, abs=1e-12)


def test_probability_vector_validation():
    vs = VariableSet.default(2)
    with pytest.raises(TheoryError):
        ProbabilityVector(vs, [0.0, 0.5])
    with pytest.raises(DimensionError):
        ProbabilityVector(vs, [0.5])
    with pytest.raises(TheoryError):
        ProbabilityVector.from_json(vs, {"probs": {"Y1": 0.5}})
    with pytest.raises(TheoryError):
        ProbabilityVector.from_json(vs, {"probs": {"Y1": 0.5, "Y2": 0.5, "Y3": 0.5}})


@pytest.mark.parametrize("lang", list(Language))
def test_theory_json_round_trip(lang, rng):
    t = random_theory(lang, rng, 10)
    again = Theory.from_json(json.loads(json.dumps(t.to_json())))
    assert again == t


def test_theory_json_errors():
    with pytest.raises(TheoryError):
        Theory.from_json({"language": "card"})
    with pytest.raises(TheoryError):
        Theory.from_json({"language": "nope", "variables": ["a"], "payload": {}})
    with pytest.raises(TheoryError):
        Theory.from_json({"language": "aspath", "variables": ["a"], "payload": {"vertices": ["u", "v"], "edges": [["u", "v"]]}})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(list(Language)))
def test_vectorized_mask_matches_scalar_semantics(seed, lang):
    rng = random.Random(seed)
    t = random_theory(lang, rng, 9)
    chunk = next(state_chunks(t.k))
    mask = model_mask(t, chunk)
    expected = [satisfies(t, State(tuple(int(b) for b in row))) for row in chunk]
    assert mask.tolist() == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(list(Language)))
def test_log_probability_is_logit_linear(seed, lang):
    rng = random.Random(seed)
    t = random_theory(lang, rng, 9)
    p = random_probs(t.vars, rng)
    y = State(tuple(rng.randint(0, 1) for _ in range(t.k)))
    linear = float(np.dot(p.logits, y.bits) + np.sum(p.log_neg))
    assert p.log_prob(y) == pytest.approx(linear, abs=1e-9)


def test_match_models_are_downward_closed(rng):
    for _ in range(20):
        t = random_theory("match", rng, 10)
        models = {s.bits for s in oracle_models(t)}
        for bits in models:
            for i, b in enumerate(bits):
                if b:
                    assert bits[:i] + (0,) + bits[i + 1 :] in models


def test_hier_models_are_closures(rng):
    for _ in range(20):
        t = random_theory("hier", rng, 10)
        var = t.vertex_var()
        for s in oracle_models(t):
            for u, v in t.payload.edges:
                assert not s[var[v]] or s[var[u]]


def test_pqe_of_theory_and_complement_sum_to_one(rng):
    for lang in Language:
        t = random_theory(lang, rng, 10)
        p = random_probs(t.vars, rng)
        inside = oracle_query(t, p, "pqe").value
        everything = np.concatenate(list(state_chunks(t.k)))
        outside = everything[~model_mask(t, everything)]
        rest = oracle_query(t, p, "pqe", models=outside).value
        assert inside + rest == pytest.approx(1.0, abs=1e-12)


def test_ranked_orders_by_probability_then_bits():
    a, b, c = State((0, 1)), State((1, 0)), State((1, 1))
    out = ranked([(-1.0, c), (-0.5, b), (-1.0 + 1e-13, a)])
    assert [s for _, s in out] == [b, a, c]


def test_te_hier_models_are_chains(rng):
    for _ in range(10):
        t = random_theory("te-hier", rng, 10)
        assert len(oracle_model_matrix(t)) == t.k + 1
