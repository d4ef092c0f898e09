import itertools
import math
import random

import numpy as np
import pytest

from nesykc.core import ProbabilityVector, State, sigmoid, vertex_theory
from nesykc.errors import InconsistentForcingError, TheoryError
from nesykc.generators import random_probs, random_theory
from nesykc.oracle import oracle_query
from nesykc.solve_closure import (
    FlowNetwork,
    closure_mpe,
    closure_thresh_enum,
    closure_top_k,
    max_flow,
)


def edge_uv(wu, wv):
    t = vertex_theory("hier", ["u", "v"], [("u", "v")])
    return t, ProbabilityVector(t.vars, [sigmoid(wu), sigmoid(wv)])


def test_both_positive_selects_both():
    t, p = edge_uv(1.0, 2.0)
    assert closure_mpe(t, p)[0].true_names(t.vars) == ["u", "v"]


def test_negative_parent_blocks_child():
    t, p = edge_uv(-3.0, 2.0)
    assert closure_mpe(t, p)[0] == State((0, 0))


def test_forcing():
    t, p = edge_uv(-3.0, 2.0)
    assert closure_mpe(t, p, forced={"v": 1})[0] == State((1, 1))
    with pytest.raises(InconsistentForcingError):
        closure_mpe(t, p, forced={"v": 1, "u": 0})


def test_uniform_is_deterministic_empty_set():
    rng = random.Random(3)
    for _ in range(10):
        t = random_theory("hier", rng, 10)
        state, prob = closure_mpe(t, ProbabilityVector.uniform(t.vars))
        assert state == State.zeros(t.k) and prob == pytest.approx(0.5**t.k)


def test_thresh_on_single_edge():
    t, _ = edge_uv(0.0, 0.0)
    u = ProbabilityVector.uniform(t.vars)
    assert closure_thresh_enum(t, u, 0.2) == [State((0, 0)), State((1, 0)), State((1, 1))]
    assert closure_thresh_enum(t, u, 0.3) == []


def test_random_dags_match_oracle():
    rng = random.Random(17)
    for _ in range(30):
        t = random_theory("hier", rng, 12)
        p = random_probs(t.vars, rng)
        state, prob = closure_mpe(t, p)
        want = oracle_query(t, p, "mpe")
        assert prob == pytest.approx(want.value, rel=1e-9)
        var = t.vertex_var()
        assert all(not state[var[v]] or state[var[u]] for u, v in t.payload.edges)
        th = want.value * rng.uniform(0.01, 1)
        assert closure_thresh_enum(t, p, th) == list(oracle_query(t, p, "thresh", th).states)
        assert closure_top_k(t, p, 5) == list(oracle_query(t, p, "top-k", 5).states)


def test_scaling_logits_keeps_argmax():
    rng = random.Random(23)
    for _ in range(10):
        t = random_theory("hier", rng, 10)
        p = random_probs(t.vars, rng, 0.2, 0.8)
        scaled = ProbabilityVector(t.vars, [sigmoid(3 * x) for x in p.logits])
        assert closure_mpe(t, p)[0] == closure_mpe(t, scaled)[0]


def test_max_flow_examples():
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, 5)
    net.add_arc(1, 2, 3)
    assert max_flow(net)[0] == pytest.approx(3)
    empty = FlowNetwork(2, 0, 1)
    assert max_flow(empty) == (0.0, frozenset({0}))


def exhaustive_min_cut(n, arcs, s, t):
    inner = [v for v in range(n) if v not in (s, t)]
    best = math.inf
    for mask in range(1 << len(inner)):
        side = {s} | {v for i, v in enumerate(inner) if mask >> i & 1}
        best = min(best, sum(c for a, b, c in arcs if a in side and b not in side))
    return best


def test_max_flow_equals_exhaustive_min_cut():
    for seed in range(100):
        rng = random.Random(seed)
        n = rng.randint(2, 10)
        net = FlowNetwork(n, 0, n - 1)
        for a, b in itertools.permutations(range(n), 2):
            if rng.random() < 0.35:
                net.add_arc(a, b, rng.choice([0.0, rng.uniform(0, 10)]))
        value, side = max_flow(net)
        arcs = list(net.arcs())
        assert value == pytest.approx(exhaustive_min_cut(n, arcs, 0, n - 1), abs=1e-9)
        assert value == pytest.approx(sum(c for a, b, c in arcs if a in side and b not in side), abs=1e-9)


def test_negative_capacity_rejected():
    with pytest.raises(ValueError):
        FlowNetwork(2, 0, 1).add_arc(0, 1, -1)


def test_wrong_language():
    from nesykc.core import card_theory

    t = card_theory(2, "eq", 1)
    with pytest.raises(TheoryError):
        closure_mpe(t, ProbabilityVector.uniform(t.vars))
