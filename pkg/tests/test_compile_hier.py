import random

import numpy as np
import pytest

from nesykc.circuit import check_structure, circuit_model_matrix, circuit_models
from nesykc.cnf import cnf_mask, emit_dimacs, parse_dimacs
from nesykc.compile_hier import compile_te_hier, compile_tree_hier, emit_hex_2horn, hier_clauses
from nesykc.core import three_path_theory, vertex_theory
from nesykc.errors import CircuitFormatError, TheoryError
from nesykc.generators import random_theory
from nesykc.oracle import oracle_model_matrix, state_chunks


def true_sets(c):
    return {tuple(s.true_names(c.vars)) for s in circuit_models(c)}


def test_tree_single_edge():
    c = compile_tree_hier(vertex_theory("tree-hier", ["u", "v"], [("u", "v")]))
    assert true_sets(c) == {(), ("u",), ("u", "v")}


def test_tree_star():
    c = compile_tree_hier(vertex_theory("tree-hier", ["r", "a", "b"], [("r", "a"), ("r", "b")]))
    assert true_sets(c) == {(), ("r",), ("r", "a"), ("r", "b"), ("r", "a", "b")}


def test_te_chain():
    c = compile_te_hier(vertex_theory("te-hier", ["r", "a", "b"], [("r", "a"), ("a", "b")]))
    assert true_sets(c) == {(), ("r",), ("r", "a"), ("r", "a", "b")}


def test_te_single_vertex():
    c = compile_te_hier(vertex_theory("te-hier", ["r"], []))
    assert true_sets(c) == {(), ("r",)}


@pytest.mark.parametrize("lang,compiler", [("tree-hier", compile_tree_hier), ("te-hier", compile_te_hier)])
def test_random_trees_match_oracle(lang, compiler):
    rng = random.Random(5)
    for _ in range(40):
        t = random_theory(lang, rng, 12)
        c = compiler(t)
        models = circuit_model_matrix(c)
        assert np.array_equal(models, oracle_model_matrix(t))
        r = check_structure(c)
        assert r.is_decomposable and r.is_deterministic is True
        assert c.size_wires <= 10 * t.k
        if lang == "te-hier":
            assert len(models) == t.k + 1


def test_forests_rejected():
    with pytest.raises(TheoryError):
        vertex_theory("tree-hier", ["a", "b"], [])
    with pytest.raises(TheoryError):
        compile_tree_hier(three_path_theory())


def test_hier_edge_clause():
    t = vertex_theory("hier", ["u", "v"], [("u", "v")])
    assert hier_clauses(t) == [(1, -2)]
    assert emit_hex_2horn(t).splitlines()[1:] == ["p cnf 2 1", "1 -2 0"]


def test_hex_exclusion_clause():
    t = vertex_theory("hex", ["a", "b"], [], exclusions=[("a", "b")])
    assert hier_clauses(t) == [(-1, -2)]


@pytest.mark.parametrize("lang", ["hier", "hex"])
def test_2horn_models_match_oracle(lang):
    rng = random.Random(11)
    for _ in range(40):
        t = random_theory(lang, rng, 12)
        vars, clauses = parse_dimacs(emit_hex_2horn(t))
        assert vars == t.vars
        bits = next(state_chunks(t.k))
        assert np.array_equal(bits[cnf_mask(clauses, bits)], oracle_model_matrix(t))


def test_dimacs_round_trip_and_errors():
    text = emit_dimacs(3, [(1, -2), (-1, 3, 2)])
    vars, clauses = parse_dimacs(text)
    assert clauses == [(1, -2), (-1, 3, 2)] and len(vars) == 3
    with pytest.raises(CircuitFormatError):
        parse_dimacs("1 2 0\n")
    with pytest.raises(CircuitFormatError):
        parse_dimacs("p cnf 2 1\n1 5 0\n")
    with pytest.raises(CircuitFormatError):
        parse_dimacs("p cnf 2 2\n1 0\n")
