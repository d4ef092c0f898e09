"""Variables, states, theories in the eight constraint languages, and probabilities.

:func:`satisfies` is the reference semantics: every compiler and solver in the
package is tested against it (through :mod:`nesykc.oracle`).
"""

from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import CycleError, DimensionError, TheoryError

# Two log-probabilities closer than this are treated as a tie.
LOG_ATOL = 1e-10
LOG_RTOL = 1e-12


def log_close(a: float, b: float) -> bool:
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= LOG_ATOL + LOG_RTOL * max(abs(a), abs(b))


class Language(enum.Enum):
    CARD = "card"
    HIER = "hier"
    TREE_HIER = "tree-hier"
    TE_HIER = "te-hier"
    HEX = "hex"
    ASPATH = "aspath"
    SPATH = "spath"
    MATCH = "match"

    @property
    def edge_based(self):
        return self in (Language.ASPATH, Language.SPATH, Language.MATCH)

    @property
    def vertex_based(self):
        return self in (Language.HIER, Language.TREE_HIER, Language.TE_HIER, Language.HEX)


class CardOp(enum.Enum):
    LE = "le"
    GE = "ge"
    EQ = "eq"


@dataclass(frozen=True)
class VariableSet:
    """Ordered, duplicate-free variable names. Index 0 is ``Y1`` in the docs."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise TheoryError("a variable set needs at least one variable")
        if len(set(names)) != len(names):
            raise TheoryError("duplicate variable names")

    @classmethod
    def default(cls, k: int) -> VariableSet:
        return cls(tuple(f"Y{i + 1}" for i in range(k)))

    @functools.cached_property
    def _positions(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._positions[str(name)]
        except KeyError:
            raise TheoryError(f"unknown variable {name!r}") from None

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __getitem__(self, i):
        return self.names[i]


@dataclass(frozen=True, order=True)
class State:
    """Total assignment; ``bits[i]`` is the value of variable ``i``.

    States order lexicographically on their bit-strings (``Y1`` most significant,
    0 before 1), which is the tie-break used by every ranked query.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(1 if b else 0 for b in self.bits))

    @classmethod
    def from_true(cls, vars: VariableSet, names: Iterable[str]) -> State:
        bits = [0] * len(vars)
        for name in names:
            bits[vars.index(name)] = 1
        return cls(tuple(bits))

    @classmethod
    def zeros(cls, k: int) -> State:
        return cls((0,) * k)

    def true_names(self, vars: VariableSet) -> list[str]:
        self.check(vars)
        return [n for n, b in zip(vars.names, self.bits) if b]

    def check(self, vars: VariableSet):
        if len(self.bits) != len(vars):
            raise DimensionError(f"state has {len(self.bits)} bits, theory has {len(vars)} variables")

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]


# -- payloads ---------------------------------------------------------------


@dataclass(frozen=True)
class CardPayload:
    n: int
    op: CardOp
    l: int


@dataclass(frozen=True)
class DirectedGraphPayload:
    """Directed graph with a labeling onto variable indices.

    ``labels`` is aligned with ``edges`` when ``edge_labeled`` and with
    ``vertices`` otherwise. ``multigraph`` admits parallel edges (produced
    internally by source/sink merging, never accepted from input).
    """

    vertices: tuple[Hashable, ...]
    edges: tuple[tuple[Hashable, Hashable], ...]
    labels: tuple[int, ...]
    edge_labeled: bool
    multigraph: bool = False


@dataclass(frozen=True)
class HexPayload:
    vertices: tuple[Hashable, ...]
    edges: tuple[tuple[Hashable, Hashable], ...]
    exclusions: tuple[tuple[Hashable, Hashable], ...]
    labels: tuple[int, ...]


@dataclass(frozen=True)
class UndirectedGraphPayload:
    vertices: tuple[Hashable, ...]
    edges: tuple[tuple[Hashable, Hashable], ...]
    labels: tuple[int, ...]


_PAYLOAD_TYPE = {
    Language.CARD: CardPayload,
    Language.HIER: DirectedGraphPayload,
    Language.TREE_HIER: DirectedGraphPayload,
    Language.TE_HIER: DirectedGraphPayload,
    Language.ASPATH: DirectedGraphPayload,
    Language.SPATH: DirectedGraphPayload,
    Language.HEX: HexPayload,
    Language.MATCH: UndirectedGraphPayload,
}


@dataclass(frozen=True)
class Theory:
    language: Language
    vars: VariableSet
    payload: Any

    def __post_init__(self):
        _validate(self)

    @property
    def k(self) -> int:
        return len(self.vars)

    # graph views -------------------------------------------------------

    def vertex_var(self) -> dict:
        """vertex -> variable index, for vertex-based theories."""
        return dict(zip(self.payload.vertices, self.payload.labels))

    def edge_vars(self) -> list[tuple[Hashable, Hashable, int]]:
        """(u, v, variable index) for edge-based theories, in payload order."""
        return [(u, v, i) for (u, v), i in zip(self.payload.edges, self.payload.labels)]

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.payload.vertices)
        g.add_edges_from(self.payload.edges)
        return g

    # JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        lang = self.language
        out: dict[str, Any] = {"language": lang.value, "variables": list(self.vars.names)}
        pl = self.payload
        if lang is Language.CARD:
            out["payload"] = {"n": pl.n, "op": pl.op.value, "l": pl.l}
        elif lang.edge_based:
            out["payload"] = {
                "vertices": list(pl.vertices),
                "edges": [[u, v, self.vars[i]] for (u, v), i in zip(pl.edges, pl.labels)],
            }
        else:
            body: dict[str, Any] = {"vertices": list(pl.vertices), "edges": [list(e) for e in pl.edges]}
            if lang is Language.HEX:
                body["exclusions"] = [list(e) for e in pl.exclusions]
            if any(str(v) != self.vars[i] for v, i in zip(pl.vertices, pl.labels)):
                body["labels"] = {str(v): self.vars[i] for v, i in zip(pl.vertices, pl.labels)}
            out["payload"] = body
        return out

    @classmethod
    def from_json(cls, data: dict) -> Theory:
        try:
            lang = Language(data["language"])
            vars = VariableSet(tuple(data["variables"]))
            raw = data["payload"]
            if lang is Language.CARD:
                payload = CardPayload(int(raw["n"]), CardOp(raw["op"]), int(raw["l"]))
            elif lang.edge_based:
                vertices = tuple(raw["vertices"])
                edges, labels = [], []
                for e in raw["edges"]:
                    if len(e) != 3:
                        raise TheoryError(f"edge-based edges are [u, v, variable], got {e!r}")
                    edges.append((e[0], e[1]))
                    labels.append(vars.index(e[2]))
                if lang is Language.MATCH:
                    payload = UndirectedGraphPayload(vertices, tuple(edges), tuple(labels))
                else:
                    payload = DirectedGraphPayload(vertices, tuple(edges), tuple(labels), edge_labeled=True)
            else:
                vertices = tuple(raw["vertices"])
                mapping = raw.get("labels")
                if mapping is None:
                    labels = tuple(vars.index(str(v)) for v in vertices)
                else:
                    labels = tuple(vars.index(mapping[str(v)]) for v in vertices)
                edges = []
                for e in raw["edges"]:
                    if len(e) != 2:
                        raise TheoryError(f"vertex-based edges are [u, v], got {e!r}")
                    edges.append((e[0], e[1]))
                if lang is Language.HEX:
                    excl = tuple((e[0], e[1]) for e in raw.get("exclusions", []))
                    payload = HexPayload(vertices, tuple(edges), excl, labels)
                else:
                    payload = DirectedGraphPayload(vertices, tuple(edges), labels, edge_labeled=False)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TheoryError):
                raise
            raise TheoryError(f"malformed theory JSON: {exc}") from exc
        return cls(lang, vars, payload)


def load_theory(path) -> Theory:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TheoryError(f"{path}: {exc}") from exc
    return Theory.from_json(data)


def _validate(t: Theory):
    if not isinstance(t.language, Language):
        raise TheoryError(f"unknown language {t.language!r}")
    expected = _PAYLOAD_TYPE[t.language]
    pl = t.payload
    if not isinstance(pl, expected):
        raise TheoryError(f"{t.language.value} theories need a {expected.__name__}")
    k = len(t.vars)
    if t.language is Language.CARD:
        if pl.n != k:
            raise TheoryError(f"card payload n={pl.n} but {k} variables")
        if not 0 <= pl.l <= pl.n:
            raise TheoryError(f"card bound l={pl.l} outside [0, {pl.n}]")
        return

    vertices = pl.vertices
    if len(set(vertices)) != len(vertices):
        raise TheoryError("duplicate vertices")
    vset = set(vertices)
    for u, v in pl.edges:
        if u not in vset or v not in vset:
            raise TheoryError(f"edge ({u!r}, {v!r}) has an unknown endpoint")
        if u == v:
            raise TheoryError(f"self-loop on {u!r}")
    labeled = pl.edges if t.language.edge_based else vertices
    if len(pl.labels) != len(labeled) or sorted(pl.labels) != list(range(k)):
        raise TheoryError("labeling must be a bijection onto the variables")

    if isinstance(pl, UndirectedGraphPayload):
        keys = [frozenset(e) for e in pl.edges]
        if len(set(keys)) != len(keys):
            raise TheoryError("duplicate undirected edge")
        return
    if not getattr(pl, "multigraph", False) and len(set(pl.edges)) != len(pl.edges):
        raise TheoryError("duplicate directed edge")
    if isinstance(pl, HexPayload):
        seen = set()
        for u, v in pl.exclusions:
            if u not in vset or v not in vset:
                raise TheoryError(f"exclusion ({u!r}, {v!r}) has an unknown endpoint")
            if u == v:
                raise TheoryError("exclusion edges are irreflexive")
            key = frozenset((u, v))
            if key in seen:
                raise TheoryError("duplicate exclusion edge")
            seen.add(key)

    if t.language is Language.SPATH:
        return
    g = nx.MultiDiGraph() if getattr(pl, "multigraph", False) else nx.DiGraph()
    g.add_nodes_from(vertices)
    g.add_edges_from(pl.edges)
    if not nx.is_directed_acyclic_graph(g):
        raise CycleError(f"{t.language.value} theories need an acyclic graph")
    if t.language in (Language.TREE_HIER, Language.TE_HIER):
        if not nx.is_arborescence(nx.DiGraph(g)):
            raise TheoryError(f"{t.language.value} theories need a rooted tree")


# -- theory constructors ------------------------------------------------------


def card_theory(n: int, op: str | CardOp, l: int, vars: VariableSet | None = None) -> Theory:
    vars = vars or VariableSet.default(n)
    return Theory(Language.CARD, vars, CardPayload(n, CardOp(op), l))


def edge_theory(language: Language | str, edges: Sequence[tuple], vertices=None, names=None) -> Theory:
    """Edge-based theory; edge ``i`` gets variable ``names[i]`` (default ``Y{i+1}``)."""
    language = Language(language)
    names = tuple(names) if names is not None else tuple(f"Y{i + 1}" for i in range(len(edges)))
    if vertices is None:
        vertices = _vertices_in_order(edges)
    vars = VariableSet(names)
    edges = tuple((u, v) for u, v in edges)
    labels = tuple(range(len(edges)))
    if language is Language.MATCH:
        return Theory(language, vars, UndirectedGraphPayload(tuple(vertices), edges, labels))
    return Theory(language, vars, DirectedGraphPayload(tuple(vertices), edges, labels, edge_labeled=True))


def vertex_theory(language: Language | str, vertices: Sequence, edges: Sequence[tuple], exclusions=()) -> Theory:
    """Vertex-based theory whose variable names are the vertex ids."""
    language = Language(language)
    vars = VariableSet(tuple(str(v) for v in vertices))
    labels = tuple(range(len(vertices)))
    edges = tuple((u, v) for u, v in edges)
    if language is Language.HEX:
        excl = tuple((u, v) for u, v in exclusions)
        return Theory(language, vars, HexPayload(tuple(vertices), edges, excl, labels))
    if exclusions:
        raise TheoryError("only hex theories carry explicit exclusions")
    return Theory(language, vars, DirectedGraphPayload(tuple(vertices), edges, labels, edge_labeled=False))


def _vertices_in_order(edges):
    seen = {}
    for u, v in edges:
        seen.setdefault(u, None)
        seen.setdefault(v, None)
    return tuple(seen)


def three_path_theory() -> Theory:
    """Six-edge DAG with one source ``s`` and one sink ``t``; three total paths."""
    return edge_theory(
        Language.ASPATH,
        [("s", "a"), ("s", "b"), ("a", "b"), ("a", "t"), ("b", "c"), ("c", "t")],
        vertices=("s", "a", "b", "c", "t"),
    )


# -- probabilities ------------------------------------------------------------


def logit(p: float) -> float:
    """Natural-log inverse sigmoid."""
    return math.log(p) - math.log1p(-p)


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    vars: VariableSet
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.p, dtype=np.float64).reshape(-1)
        if arr.shape[0] != len(self.vars):
            raise DimensionError(f"{arr.shape[0]} probabilities for {len(self.vars)} variables")
        if not np.all((arr > 0.0) & (arr < 1.0)):
            raise TheoryError("probabilities must lie strictly between 0 and 1")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @classmethod
    def uniform(cls, vars: VariableSet, value: float = 0.5) -> ProbabilityVector:
        return cls(vars, np.full(len(vars), value))

    @classmethod
    def from_json(cls, vars: VariableSet, data: dict) -> ProbabilityVector:
        try:
            probs = data["probs"]
            missing = [n for n in vars if n not in probs]
            if missing:
                raise TheoryError(f"missing probabilities for {missing}")
            extra = set(probs) - set(vars.names)
            if extra:
                raise TheoryError(f"probabilities for unknown variables {sorted(extra)}")
            return cls(vars, [float(probs[n]) for n in vars])
        except (KeyError, TypeError) as exc:
            raise TheoryError(f"malformed probability JSON: {exc}") from exc

    def to_json(self) -> dict:
        return {"probs": {n: float(x) for n, x in zip(self.vars, self.p)}}

    @functools.cached_property
    def log_pos(self) -> np.ndarray:
        return np.log(self.p)

    @functools.cached_property
    def log_neg(self) -> np.ndarray:
        return np.log1p(-self.p)

    @functools.cached_property
    def logits(self) -> np.ndarray:
        return self.log_pos - self.log_neg

    def log_prob(self, state: State) -> float:
        state.check(self.vars)
        bits = np.asarray(state.bits, dtype=bool)
        return math.fsum(np.where(bits, self.log_pos, self.log_neg))

    def prob(self, state: State) -> float:
        return math.exp(self.log_prob(state))

    def __len__(self):
        return len(self.vars)


def load_probs(path, vars: VariableSet) -> ProbabilityVector:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TheoryError(f"{path}: {exc}") from exc
    return ProbabilityVector.from_json(vars, data)


# -- reference semantics --------------------------------------------------------


def satisfies(theory: Theory, state: State) -> bool:
    state.check(theory.vars)
    y = state.bits
    lang = theory.language
    pl = theory.payload
    if lang is Language.CARD:
        count = sum(y)
        if pl.op is CardOp.LE:
            return count <= pl.l
        if pl.op is CardOp.GE:
            return count >= pl.l
        return count == pl.l
    if lang.vertex_based:
        val = {v: y[i] for v, i in zip(pl.vertices, pl.labels)}
        if any(val[v] and not val[u] for u, v in pl.edges):
            return False
        if lang is Language.HEX:
            return not any(val[u] and val[v] for u, v in pl.exclusions)
        if lang is Language.TE_HIER:
            desc = descendants_reflexive(pl.vertices, pl.edges)
            chosen = [v for v in pl.vertices if val[v]]
            for a in range(len(chosen)):
                for b in range(a + 1, len(chosen)):
                    if not desc[chosen[a]] & desc[chosen[b]]:
                        return False
        return True
    if lang is Language.MATCH:
        used = set()
        for (u, v), i in zip(pl.edges, pl.labels):
            if y[i]:
                if u in used or v in used:
                    return False
                used.update((u, v))
        return True
    return _is_total_simple_path(pl, y)


def _is_total_simple_path(pl: DirectedGraphPayload, y) -> bool:
    selected = [(u, v) for (u, v), i in zip(pl.edges, pl.labels) if y[i]]
    if not selected:
        return False
    has_in = {v for _, v in pl.edges}
    has_out = {u for u, _ in pl.edges}
    succ: dict = {}
    indeg: dict = {}
    for u, v in selected:
        if u in succ:
            return False
        succ[u] = v
        indeg[v] = indeg.get(v, 0) + 1
        if indeg[v] > 1:
            return False
    starts = [u for u in succ if u not in indeg]
    if len(starts) != 1 or starts[0] in has_in:
        return False
    node, steps = starts[0], 0
    while node in succ:
        node = succ[node]
        steps += 1
    return steps == len(selected) and node not in has_out


@functools.lru_cache(maxsize=256)
def descendants_reflexive(vertices: tuple, edges: tuple) -> dict:
    """vertex -> frozenset of vertices reachable from it, itself included."""
    g = nx.DiGraph()
    g.add_nodes_from(vertices)
    g.add_edges_from(edges)
    return {v: frozenset(nx.descendants(g, v)) | {v} for v in vertices}


# -- queries and results ----------------------------------------------------------


class QueryKind(enum.Enum):
    PQE = "pqe"
    EQE = "eqe"
    MPE = "mpe"
    TOP_K = "top-k"
    THRESH = "thresh"


@dataclass(frozen=True)
class QueryResult:
    kind: QueryKind
    value: Any = None
    state: State | None = None
    states: tuple[State, ...] | None = None
    probabilities: tuple[float, ...] | None = None


def ranked(items: Iterable[tuple[float, State]]) -> list[tuple[float, State]]:
    """Sort (log-probability, state) pairs by decreasing probability, then bit-string.

    Log-probabilities within :func:`log_close` count as equal.
    """

    def cmp(a, b):
        if not log_close(a[0], b[0]):
            return -1 if a[0] > b[0] else 1
        if a[1] == b[1]:
            return 0
        return -1 if a[1] < b[1] else 1

    return sorted(items, key=functools.cmp_to_key(cmp))


def meets_threshold(logp: float, threshold: float) -> bool:
    if threshold <= 0:
        return True
    lt = math.log(threshold)
    return logp >= lt or log_close(logp, lt)
