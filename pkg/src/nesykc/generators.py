"""Random theories and probability vectors for tests and benchmarks."""

from __future__ import annotations

import random

import numpy as np

from .core import Language, ProbabilityVector, Theory, VariableSet, card_theory, edge_theory, vertex_theory


def random_dag_edges(rng: random.Random, n_vertices: int, density: float = 0.5, max_edges: int | None = None):
    """Edges ``(a, b)`` with ``a < b`` over ``v0..v{n-1}``, in random order."""
    edges = [(f"v{a}", f"v{b}") for a in range(n_vertices) for b in range(a + 1, n_vertices) if rng.random() < density]
    rng.shuffle(edges)
    return edges[:max_edges] if max_edges is not None else edges


def random_tree_edges(rng: random.Random, n_vertices: int):
    return [(f"v{rng.randrange(i)}", f"v{i}") for i in range(1, n_vertices)]


def random_theory(language: Language | str, rng: random.Random, max_vars: int = 12) -> Theory:
    """A valid theory in ``language`` with between 1 and ``max_vars`` variables."""
    lang = Language(language)
    if lang is Language.CARD:
        n = rng.randint(1, max_vars)
        return card_theory(n, rng.choice(["le", "ge", "eq"]), rng.randint(0, n))
    if lang in (Language.TREE_HIER, Language.TE_HIER):
        n = rng.randint(1, max_vars)
        return vertex_theory(lang, [f"v{i}" for i in range(n)], random_tree_edges(rng, n))
    if lang in (Language.HIER, Language.HEX):
        n = rng.randint(1, max_vars)
        vertices = [f"v{i}" for i in range(n)]
        edges = random_dag_edges(rng, n, density=rng.uniform(0.1, 0.5))
        if lang is Language.HIER:
            return vertex_theory(lang, vertices, edges)
        pairs = [(vertices[a], vertices[b]) for a in range(n) for b in range(a + 1, n)]
        excl = [e for e in pairs if rng.random() < 0.2]
        return vertex_theory(lang, vertices, edges, exclusions=excl)
    if lang is Language.ASPATH:
        while True:
            edges = random_dag_edges(rng, rng.randint(2, 7), density=rng.uniform(0.3, 0.8), max_edges=max_vars)
            if edges:
                return edge_theory(lang, edges)
    if lang is Language.SPATH:
        # a path v0 -> ... -> v{n-1} plus random forward and backward chords; no chord
        # enters v0 or leaves v{n-1}, so a source and a sink always survive
        n = rng.randint(2, 6)
        edges = [(f"v{i}", f"v{i + 1}") for i in range(n - 1)]
        chords = [(f"v{a}", f"v{b}") for a in range(n - 1) for b in range(1, n) if abs(a - b) > 1 or b < a]
        rng.shuffle(chords)
        edges += [e for e in chords if rng.random() < 0.4]
        return edge_theory(lang, edges[:max_vars])
    # matching on a simple undirected graph
    while True:
        n = rng.randint(2, 7)
        pairs = [(f"v{a}", f"v{b}") for a in range(n) for b in range(a + 1, n)]
        rng.shuffle(pairs)
        edges = [e for e in pairs if rng.random() < 0.5][:max_vars]
        if edges:
            return edge_theory(lang, edges)


def random_probs(vars: VariableSet, rng: random.Random, low: float = 0.02, high: float = 0.98) -> ProbabilityVector:
    return ProbabilityVector(vars, np.array([rng.uniform(low, high) for _ in vars]))


def grid_dag(rows: int, cols: int) -> Theory:
    """Acyclic grid path theory: edges point right, down and diagonally down-right."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            here = f"g{r}_{c}"
            if c + 1 < cols:
                edges.append((here, f"g{r}_{c + 1}"))
            if r + 1 < rows:
                edges.append((here, f"g{r + 1}_{c}"))
            if r + 1 < rows and c + 1 < cols:
                edges.append((here, f"g{r + 1}_{c + 1}"))
    vertices = [f"g{r}_{c}" for r in range(rows) for c in range(cols)]
    return edge_theory(Language.ASPATH, edges, vertices=vertices)
