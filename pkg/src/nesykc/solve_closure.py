"""Most probable closure of a DAG hierarchy through a minimum cut.

A state's log-probability is a constant plus the sum of the logits of the
selected vertices, so MPE is a maximum-weight closure problem. Positive
vertices hang off the source, negative ones feed the sink, and every
hierarchy edge ``u -> v`` becomes an uncuttable arc ``v -> u``. The source
side of a minimum cut is an optimal closure.
"""

from __future__ import annotations

import math
from collections import deque

import networkx as nx

from .core import Language, ProbabilityVector, State, Theory
from .errors import InconsistentForcingError, TheoryError
from .ranking import enumerate_ranked

EPS = 1e-12


class FlowNetwork:
    """Residual graph with float capacities for Dinic's algorithm."""

    def __init__(self, n_nodes: int, source: int, sink: int):
        self.n = n_nodes
        self.source = source
        self.sink = sink
        self.head: list[int] = []
        self.cap: list[float] = []
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.original: list[float] = []

    def add_arc(self, u: int, v: int, cap: float) -> int:
        if cap < 0:
            raise ValueError("capacities must be non-negative")
        a = len(self.head)
        self.head += [v, u]
        self.cap += [float(cap), 0.0]
        self.original += [float(cap), 0.0]
        self.adj[u].append(a)
        self.adj[v].append(a + 1)
        return a

    def arcs(self):
        """``(u, v, capacity)`` for every arc added."""
        for a in range(0, len(self.head), 2):
            yield self.head[a + 1], self.head[a], self.original[a]


def max_flow(net: FlowNetwork, eps: float = EPS) -> tuple[float, frozenset]:
    """Maximum flow value and the minimal source side of a minimum cut.

    Residual capacities at or below ``eps`` count as saturated.
    """
    s, t = net.source, net.sink
    head, cap, adj = net.head, net.cap, net.adj
    total = 0.0
    while True:
        level = [-1] * net.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for a in adj[u]:
                if cap[a] > eps and level[head[a]] < 0:
                    level[head[a]] = level[u] + 1
                    q.append(head[a])
        if level[t] < 0:
            break
        it = [0] * net.n
        while True:
            # walk the level graph from s, retreating from dead ends
            path: list[int] = []
            u = s
            while u != t:
                while it[u] < len(adj[u]):
                    a = adj[u][it[u]]
                    if cap[a] > eps and level[head[a]] == level[u] + 1:
                        break
                    it[u] += 1
                else:
                    if u == s:
                        break
                    level[u] = -1
                    u = head[path.pop() ^ 1]
                    it[u] += 1
                    continue
                path.append(a)
                u = head[a]
            if u != t:
                break
            f = min(cap[a] for a in path)
            for a in path:
                cap[a] -= f
                cap[a ^ 1] += f
            total += f
    side = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for a in adj[u]:
            if cap[a] > eps and head[a] not in side:
                side.add(head[a])
                q.append(head[a])
    return total, frozenset(side)


def _check(t: Theory):
    if t.language not in (Language.HIER, Language.TREE_HIER):
        raise TheoryError(f"closure solving needs a hierarchy theory, got {t.language.value}")


def _normalize_forced(t: Theory, forced) -> dict[int, int]:
    out = {}
    for key, val in (forced or {}).items():
        idx = key if isinstance(key, int) else t.vars.index(key)
        out[idx] = int(bool(val))
    return out


def _consistent(t: Theory, forced: dict[int, int]) -> bool:
    """Whether some closure agrees with ``forced``: no forced-on vertex has a forced-off ancestor."""
    if not forced:
        return True
    var = t.vertex_var()
    g = t.digraph()
    for v in t.payload.vertices:
        if forced.get(var[v]) == 1:
            if any(forced.get(var[a]) == 0 for a in nx.ancestors(g, v)):
                return False
    return True


def closure_network(t: Theory, weights, forced: dict[int, int]) -> tuple[FlowNetwork, float]:
    """Network whose minimum cut selects a maximum-weight closure; also returns the infinite capacity."""
    vertices = t.payload.vertices
    pos = {v: i for i, v in enumerate(vertices)}
    var = t.vertex_var()
    n = len(vertices)
    inf = sum(abs(float(w)) for w in weights) + 1.0
    net = FlowNetwork(n + 2, n, n + 1)
    for v in vertices:
        i = pos[v]
        w = float(weights[var[v]])
        fix = forced.get(var[v])
        if fix == 1:
            net.add_arc(net.source, i, inf)
        elif w > 0:
            net.add_arc(net.source, i, w)
        if fix == 0:
            net.add_arc(i, net.sink, inf)
        elif w < 0:
            net.add_arc(i, net.sink, -w)
    for u, v in t.payload.edges:
        net.add_arc(pos[v], pos[u], inf)
    return net, inf


def _closure_solve(t: Theory, p: ProbabilityVector, forced: dict[int, int]):
    if not _consistent(t, forced):
        return None
    net, _ = closure_network(t, p.logits, forced)
    _, side = max_flow(net)
    var = t.vertex_var()
    bits = [0] * t.k
    for i, v in enumerate(t.payload.vertices):
        if i in side:
            bits[var[v]] = 1
    for u, v in t.payload.edges:
        if bits[var[v]] and not bits[var[u]]:
            raise AssertionError("minimum cut produced a set that is not a closure")
    if any(bits[i] != val for i, val in forced.items()):
        raise AssertionError("minimum cut ignored a forced assignment")
    state = State(tuple(bits))
    return state.bits, p.log_prob(state)


def closure_mpe(t: Theory, p: ProbabilityVector, forced=None) -> tuple[State, float]:
    """Most probable closure agreeing with ``forced`` ({variable name or index: 0/1}).

    Among equally good closures the smallest one is returned, which is also the
    smallest bit-string since optimal closures are closed under intersection.
    """
    _check(t)
    fixed = _normalize_forced(t, forced)
    found = _closure_solve(t, p, fixed)
    if found is None:
        raise InconsistentForcingError("forced assignments admit no closure")
    bits, logp = found
    return State(bits), math.exp(logp)


def closure_ranked(t: Theory, p: ProbabilityVector, k: int | None = None, threshold: float | None = None):
    """``(log-probability, state)`` pairs in decreasing probability via Lawler partitioning."""
    _check(t)
    return enumerate_ranked(lambda fixed: _closure_solve(t, p, fixed), t.k, k=k, threshold=threshold)


def closure_thresh_enum(t: Theory, p: ProbabilityVector, threshold: float) -> list[State]:
    return [s for _, s in closure_ranked(t, p, threshold=threshold)]


def closure_top_k(t: Theory, p: ProbabilityVector, k: int) -> list[State]:
    return [s for _, s in closure_ranked(t, p, k=k)]
