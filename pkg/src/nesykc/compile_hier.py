"""Tree-shaped hierarchies compiled to circuits, and hierarchies with exclusions emitted as 2-Horn CNF."""

from __future__ import annotations

import networkx as nx

from .circuit import DECOMPOSABLE, DETERMINISTIC, Circuit, CircuitBuilder
from .cnf import emit_dimacs
from .core import Language, Theory
from .errors import TheoryError


def _tree(t: Theory, language: Language):
    if t.language is not language:
        raise TheoryError(f"expected a {language.value} theory, got {t.language.value}")
    g = t.digraph()
    if not nx.is_arborescence(g):
        raise TheoryError("the hierarchy must be a single rooted tree")
    root = next(v for v in g if g.in_degree(v) == 0)
    return g, root


def compile_tree_hier(t: Theory) -> Circuit:
    """Circuit accepting exactly the closures of a rooted tree.

    ``free(v)`` covers the subtree of ``v`` once its parent is selected: either
    ``v`` is selected and each child subtree is free, or the whole subtree is off.
    """
    g, root = _tree(t, Language.TREE_HIER)
    var = t.vertex_var()
    b = CircuitBuilder(t.vars)
    free, off = {}, {}
    for v in nx.dfs_postorder_nodes(g, root):
        kids = list(g.successors(v))
        off[v] = b.conj([b.literal(var[v], False)] + [off[c] for c in kids])
        on = b.conj([b.literal(var[v], True)] + [free[c] for c in kids])
        free[v] = b.disj([on, off[v]], decision=var[v] + 1)
    return b.build(free[root], flags=(DECOMPOSABLE, DETERMINISTIC))


def compile_te_hier(t: Theory) -> Circuit:
    """Circuit accepting the empty state and every root-to-vertex chain.

    ``chain(v)`` selects ``v`` and continues into at most one child subtree.
    Choosing among the children ``c_1..c_m`` is a right fold
    ``pick_j = (chain(c_j) AND off(c_{j+1..m})) OR (off(c_j) AND pick_{j+1})``
    so the size stays linear in the tree.
    """
    g, root = _tree(t, Language.TE_HIER)
    var = t.vertex_var()
    b = CircuitBuilder(t.vars)
    chain, off = {}, {}
    for v in nx.dfs_postorder_nodes(g, root):
        kids = list(g.successors(v))
        pick = b.true()
        rest_off = b.true()
        for c in reversed(kids):
            pick = b.disj(
                [b.conj([chain[c], rest_off]), b.conj([off[c], pick])],
                decision=var[c] + 1,
            )
            rest_off = b.conj([off[c], rest_off])
        off[v] = b.conj([b.literal(var[v], False), rest_off])
        chain[v] = b.conj([b.literal(var[v], True), pick])
    root_node = b.disj([chain[root], off[root]], decision=var[root] + 1)
    return b.build(root_node, flags=(DECOMPOSABLE, DETERMINISTIC))


def hier_clauses(t: Theory) -> list[tuple[int, int]]:
    """Two-literal clauses: ``parent OR NOT child`` per edge, ``NOT a OR NOT b`` per exclusion."""
    if not t.language.vertex_based or t.language is Language.TE_HIER:
        raise TheoryError(f"no 2-Horn encoding for {t.language.value} theories")
    var = t.vertex_var()
    clauses = [(var[u] + 1, -(var[v] + 1)) for u, v in t.payload.edges]
    if t.language is Language.HEX:
        clauses += [(-(var[u] + 1), -(var[v] + 1)) for u, v in t.payload.exclusions]
    return clauses


def emit_hex_2horn(t: Theory) -> str:
    """DIMACS text of the 2-Horn encoding; a ``c vars`` comment records the names."""
    return emit_dimacs(t.k, hier_clauses(t), t.vars.names)
