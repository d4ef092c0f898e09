"""Acyclic simple-path theories compiled to decision-node circuits.

After merging all sources into one ``s`` and all sinks into one ``t``, the
edges are put in topological order ``e_1..e_k``. Cell ``(v, i)`` accepts the
assignments of ``e_1..e_i`` whose selected edges form a path from ``s`` that
currently ends at ``v``; ``(s, i)`` is the all-zero prefix. Each step decides
on ``e_{i+1} = (u, w)``: selecting it moves a path ending at ``u`` to ``w``,
skipping it leaves every cell as it was. The root is ``(t, k)``.
"""

from __future__ import annotations

import heapq

from .circuit import DECOMPOSABLE, DETERMINISTIC, Circuit, CircuitBuilder
from .core import DirectedGraphPayload, Language, Theory
from .errors import CycleError, TheoryError


def normalize_graph(t: Theory) -> Theory:
    """Copy of ``t`` with a single source and a single sink.

    Edges leaving any source are re-attached to the first source in vertex
    order, edges entering any sink to the first sink. Variable labels move with
    their edges, so parallel edges may appear. Isolated vertices are dropped.
    """
    if t.language is not Language.ASPATH:
        raise TheoryError(f"expected an aspath theory, got {t.language.value}")
    pl = t.payload
    if not pl.edges:
        raise TheoryError("a path theory needs at least one edge")
    has_in = {v for _, v in pl.edges}
    has_out = {u for u, _ in pl.edges}
    used = has_in | has_out
    vertices = [v for v in pl.vertices if v in used]
    sources = [v for v in vertices if v not in has_in]
    sinks = [v for v in vertices if v not in has_out]
    s, sink = sources[0], sinks[0]
    merged = set(sources[1:]) | set(sinks[1:])
    edges = tuple(
        (s if u in sources else u, sink if v in sinks else v) for u, v in pl.edges
    )
    payload = DirectedGraphPayload(
        tuple(v for v in vertices if v not in merged),
        edges,
        pl.labels,
        edge_labeled=True,
        multigraph=pl.multigraph or len(set(edges)) < len(edges),
    )
    return Theory(Language.ASPATH, t.vars, payload)


def topo_edge_order(t: Theory) -> list[int]:
    """Edge positions in topological order, preferring the smallest position among ready edges.

    An edge is ready once every edge entering its tail has been placed.
    """
    edges = t.payload.edges
    pending_in: dict = {}
    out_edges: dict = {}
    for j, (u, v) in enumerate(edges):
        pending_in[v] = pending_in.get(v, 0) + 1
        out_edges.setdefault(u, []).append(j)
    heap = [j for j, (u, _) in enumerate(edges) if pending_in.get(u, 0) == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        j = heapq.heappop(heap)
        order.append(j)
        v = edges[j][1]
        pending_in[v] -= 1
        if pending_in[v] == 0:
            for nxt in out_edges.get(v, ()):
                heapq.heappush(heap, nxt)
    if len(order) != len(edges):
        raise CycleError("edges do not admit a topological order")
    return order


def compile_aspath(t: Theory, trim: bool = True) -> Circuit:
    """Circuit whose models are the total simple paths of ``t``.

    With ``trim`` only cells reachable from the root are built and constant
    subcircuits are folded away; otherwise every cell of the grid is kept.
    """
    norm = normalize_graph(t)
    edges = norm.payload.edges
    labels = norm.payload.labels
    order = topo_edge_order(norm)
    k = len(order)
    s = _single(norm, source=True)
    sink = _single(norm, source=False)
    seq = [(edges[j][0], edges[j][1], labels[j]) for j in order]

    if trim:
        # demand[i]: vertices whose cell (v, i) some cell of step i+1 refers to
        demand = [set() for _ in range(k + 1)]
        demand[k].add(sink)
        for i in range(k, 1, -1):
            u, w, _ = seq[i - 1]
            for v in demand[i]:
                demand[i - 1].add(v)
                if v == w:
                    demand[i - 1].add(u)
    else:
        every = set(norm.payload.vertices)
        demand = [every] * (k + 1)

    b = CircuitBuilder(t.vars, simplify=trim)
    u1, w1, var1 = seq[0]
    cells = {}
    for v in demand[1]:
        if v == w1:
            cells[v] = b.literal(var1, True)
        elif v == s:
            cells[v] = b.literal(var1, False)
        else:
            cells[v] = b.false()
    for i in range(1, k):
        u, w, var = seq[i]
        nxt = {}
        for v in demand[i + 1]:
            high = cells[u] if v == w else b.false()
            nxt[v] = b.decide(var, high, cells[v])
        cells = nxt
    return b.build(cells[sink], flags=(DECOMPOSABLE, DETERMINISTIC))


def _single(t: Theory, source: bool):
    ends = {v for _, v in t.payload.edges} if source else {u for u, _ in t.payload.edges}
    return next(v for v in t.payload.vertices if v not in ends)
