import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nesykc.circuit import (
    CircuitBuilder,
    check_structure,
    circuit_model_matrix,
    circuit_models,
    condition,
    constant_circuit,
    emit,
    evaluate,
    literal_circuit,
    parse,
    smooth,
    trim,
)
from nesykc.compile_card import compile_card
from nesykc.compile_path import compile_aspath
from nesykc.core import State, VariableSet, card_theory, three_path_theory
from nesykc.errors import CircuitFormatError
from randcirc import random_dnnf

CNF_CIRCUIT = """nnf 6 6 3
L 1
L -2
L -3
O 0 2 0 1
O 0 2 0 2
A 2 3 4
"""


def two_clause_circuit():
    """(Y1 OR NOT Y2) AND (Y1 OR NOT Y3), sharing the Y1 leaf."""
    return parse(CNF_CIRCUIT)


def test_evaluate_cnf_circuit():
    c = two_clause_circuit()
    assert evaluate(c, State((1, 1, 1)))
    assert not evaluate(c, State((0, 1, 0)))


def test_true_circuit_accepts_everything():
    c = constant_circuit(VariableSet.default(2), True)
    assert all(evaluate(c, State((a, b))) for a in (0, 1) for b in (0, 1))


def test_cnf_circuit_is_neither_decomposable_nor_deterministic():
    r = check_structure(two_clause_circuit())
    assert not r.is_decomposable
    assert r.is_deterministic is False
    assert r.obdd_order is None
    assert r.size_wires == 6


def test_literal_report():
    r = check_structure(literal_circuit(VariableSet.default(1), 0))
    assert r.is_nnf and r.is_decomposable and r.is_deterministic and r.is_smooth
    assert r.obdd_order == ("Y1",)


def test_card_report_has_natural_order():
    r = check_structure(compile_card(card_theory(6, "eq", 3)))
    assert r.is_decomposable and r.is_deterministic
    assert r.obdd_order == tuple(f"Y{i}" for i in range(1, 7))


def test_determinism_falls_back_to_enumeration():
    vs = VariableSet.default(2)
    b = CircuitBuilder(vs)
    # (Y1 AND Y2) OR (Y1 AND NOT Y2) OR (NOT Y1): disjoint, though not pairwise by one literal
    root = b.disj([
        b.conj([b.literal(0), b.literal(1)]),
        b.conj([b.literal(0), b.literal(1, False)]),
        b.literal(0, False),
    ])
    assert check_structure(b.build(root)).is_deterministic is True
    b2 = CircuitBuilder(vs)
    root = b2.disj([b2.literal(0), b2.literal(1)])
    assert check_structure(b2.build(root)).is_deterministic is False


def test_condition_three_path_dag():
    c = compile_aspath(three_path_theory())
    on = condition(c, "Y1", True)
    models = circuit_model_matrix(on, fixed={0: 1})
    assert len(models) == 2
    assert trim(condition(literal_circuit(VariableSet.default(1), 0), 0, False)).kind.tolist() == [0]
    assert emit(condition(on, "Y1", True)) == emit(on)


def test_smooth_gadget_shape():
    vs = VariableSet.default(2)
    b = CircuitBuilder(vs)
    root = b.disj([b.literal(0), b.conj([b.literal(0, False), b.literal(1)])])
    c = b.build(root)
    s = smooth(c, pad_root=False)
    assert check_structure(s).is_smooth
    # left child: Y1 AND (Y2 OR NOT Y2)
    left = s.node_children(s.root)[0]
    kids = s.node_children(left).tolist()
    assert [s.kind[j] for j in kids] == [2, 4]
    assert sorted(s.lit[j] for j in s.node_children(kids[1]).tolist()) == [-2, 2]


def test_smooth_leaves_smooth_circuit_alone():
    c = compile_aspath(three_path_theory())
    assert check_structure(c).is_smooth
    assert smooth(c).size_wires == c.size_wires


def test_trim_folds_constants():
    vs = VariableSet.default(1)
    b = CircuitBuilder(vs, simplify=False)
    x = b.literal(0)
    and_node = b.build(b.conj([b.true(), x]))
    or_node = b.build(b.disj([b.false(), x]))
    assert emit(trim(and_node)) == emit(literal_circuit(vs, 0))
    assert emit(trim(or_node)) == emit(literal_circuit(vs, 0))


def test_trim_shrinks_raw_path_circuit():
    raw = compile_aspath(three_path_theory(), trim=False)
    assert trim(raw).size_wires < raw.size_wires
    assert compile_aspath(three_path_theory()).size_wires < raw.size_wires


def test_emit_parse_round_trip_is_byte_identical():
    for c in (compile_aspath(three_path_theory()), compile_card(card_theory(5, "le", 2)), two_clause_circuit()):
        text = emit(c)
        assert emit(parse(text)) == text
    assert emit(two_clause_circuit()).splitlines()[2:] == CNF_CIRCUIT.splitlines()[1:]


@pytest.mark.parametrize(
    "text",
    [
        "",
        "nnf 1 0 1\nX\n",
        "nnf 2 1 1\nL 1\nA 1 5\n",
        "nnf 1 0 1\nL 3\n",
        "nnf 2 0 1\nL 1\n",
        "nnf 3 2 1\nL 1\nL -1\nO 0 3 0 1\n",
        "nnf 1 0 2\nc vars [\"a\"]\nT\n",
    ],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(CircuitFormatError):
        parse(text)


def test_parse_accepts_empty_gates_and_default_names():
    c = parse("nnf 2 0 2\nA 0\nO 0 0\n")
    assert c.vars.names == ("Y1", "Y2")
    assert circuit_models(c) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 10))
def test_transformations_preserve_models(seed, k):
    c = random_dnnf(seed, k)
    models = circuit_model_matrix(c)
    assert np.array_equal(circuit_model_matrix(trim(c)), models)
    assert np.array_equal(circuit_model_matrix(smooth(c)), models)
    assert check_structure(smooth(c)).is_smooth
    assert check_structure(smooth(c)).is_decomposable
    var = seed % k
    for value in (0, 1):
        cond = circuit_model_matrix(condition(c, var, value), fixed={var: value})
        assert np.array_equal(cond, models[models[:, var] == value])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 10))
def test_decision_circuits_are_deterministic(seed, k):
    c = random_dnnf(seed, k, det=True)
    r = check_structure(c)
    assert r.is_decomposable and r.is_deterministic is True


def test_smoothing_size_bound(rng):
    for seed in range(20):
        c = random_dnnf(seed, 8)
        or_children = sum(len(c.node_children(i)) for i in range(c.n_nodes) if c.kind[i] == 4)
        extra = smooth(c, pad_root=False).size_wires - c.size_wires
        assert extra <= len(c.vars) * or_children * 2
