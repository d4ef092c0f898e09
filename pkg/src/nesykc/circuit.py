"""NNF circuits stored as an append-only node arena.

Children always have smaller indices than their parents and the root is the
last node, so a single forward sweep evaluates anything bottom-up.
"""

from __future__ import annotations

import functools
import heapq
import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import State, VariableSet
from .errors import CircuitFormatError, DimensionError
from .kernels import AND, FALSE, LIT, OR, TRUE

BRUTE_FORCE_VARS = 20

# structural properties a constructor may vouch for
DECOMPOSABLE = "decomposable"
DETERMINISTIC = "deterministic"
SMOOTH = "smooth"


class Circuit:
    """Immutable rooted NNF DAG.

    ``flags`` lists properties guaranteed by construction; anything else is
    established lazily through :func:`check_structure`.
    """

    def __init__(self, vars: VariableSet, kind, lit, offsets, children, decision, flags=()):
        self.vars = vars
        self.kind = _frozen(kind, np.int8)
        self.lit = _frozen(lit, np.int32)
        self.offsets = _frozen(offsets, np.int64)
        self.children = _frozen(children, np.int32)
        self.decision = _frozen(decision, np.int32)
        self.flags = frozenset(flags)
        if len(self.kind) == 0:
            raise CircuitFormatError("a circuit needs at least one node")

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    @property
    def size_wires(self) -> int:
        return len(self.children)

    @property
    def root(self) -> int:
        return self.n_nodes - 1

    def node_children(self, i: int) -> np.ndarray:
        return self.children[self.offsets[i] : self.offsets[i + 1]]

    @functools.cached_property
    def level_plan(self):
        return kernels.LevelPlan(self.kind, self.lit, self.offsets, self.children)

    @functools.cached_property
    def analysis(self):
        return _analyse(self)

    @functools.cached_property
    def report(self) -> StructureReport:
        return check_structure(self)

    @functools.cached_property
    def is_smooth(self) -> bool:
        an = self.analysis
        for i in np.flatnonzero(self.kind == OR).tolist():
            if any(an.varset[j] != an.varset[i] for j in self.node_children(i).tolist()):
                return False
        return True

    def has(self, prop: str) -> bool:
        if prop in self.flags:
            return True
        if prop == SMOOTH:
            return self.is_smooth
        return getattr(self.report, f"is_{prop}") is True

    @property
    def covers_all_vars(self) -> bool:
        return self.analysis.varset[self.root] == (1 << len(self.vars)) - 1

    @functools.cached_property
    def smoothed(self) -> Circuit:
        """Smooth version whose root also mentions every variable."""
        if self.has(SMOOTH) and self.covers_all_vars:
            return self
        return smooth(self)

    def __repr__(self):
        return f"Circuit(nodes={self.n_nodes}, wires={self.size_wires}, vars={len(self.vars)})"


def _frozen(a, dtype):
    arr = np.ascontiguousarray(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class CircuitBuilder:
    """Hash-consing node factory.

    With ``simplify`` the factory folds constants (``AND`` with ``FALSE`` is
    ``FALSE``, ``TRUE`` children vanish, and dually for ``OR``). One-child
    gates always collapse onto their child.
    """

    def __init__(self, vars: VariableSet, simplify: bool = True):
        self.vars = vars
        self.simplify = simplify
        self.kind: list[int] = []
        self.lit: list[int] = []
        self.kids: list[tuple[int, ...]] = []
        self.dec: list[int] = []
        self._memo: dict = {}

    def _add(self, kind, lit=0, kids=(), dec=0):
        key = (kind, lit, kids, dec)
        idx = self._memo.get(key)
        if idx is None:
            idx = len(self.kind)
            self.kind.append(kind)
            self.lit.append(lit)
            self.kids.append(kids)
            self.dec.append(dec)
            self._memo[key] = idx
        return idx

    def true(self):
        return self._add(TRUE)

    def false(self):
        return self._add(FALSE)

    def literal(self, var: int, positive: bool = True):
        """Literal on 0-based variable ``var``."""
        return self._add(LIT, var + 1 if positive else -(var + 1))

    def conj(self, children):
        kids = []
        for c in children:
            k = self.kind[c]
            if self.simplify:
                if k == TRUE:
                    continue
                if k == FALSE:
                    return self.false()
            if c not in kids:
                kids.append(c)
        if not kids:
            return self.true()
        if len(kids) == 1:
            return kids[0]
        return self._add(AND, 0, tuple(kids))

    def disj(self, children, decision: int = 0):
        """OR gate; ``decision`` is the 1-based variable it branches on, 0 if none."""
        kids = []
        for c in children:
            k = self.kind[c]
            if self.simplify:
                if k == FALSE:
                    continue
                if k == TRUE:
                    return self.true()
            if c not in kids:
                kids.append(c)
        if not kids:
            return self.false()
        if len(kids) == 1:
            return kids[0]
        return self._add(OR, 0, tuple(kids), decision if len(kids) == 2 else 0)

    def decide(self, var: int, high, low):
        """``(Y_var AND high) OR (NOT Y_var AND low)``."""
        return self.disj(
            [self.conj([self.literal(var, True), high]), self.conj([self.literal(var, False), low])],
            decision=var + 1,
        )

    def build(self, root: int, flags=()) -> Circuit:
        """Freeze the sub-DAG reachable from ``root``; unreachable nodes are dropped."""
        counts = np.fromiter((len(k) for k in self.kids), dtype=np.int64, count=len(self.kids))
        offsets = np.zeros(len(self.kids) + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        children = np.fromiter(itertools.chain.from_iterable(self.kids), dtype=np.int32, count=int(offsets[-1]))
        mark = kernels.reachable(offsets, children, root)
        counts = counts[: root + 1]
        keep_wire = np.repeat(mark, counts)
        new_index = np.cumsum(mark) - 1
        new_children = new_index[children[: offsets[root + 1]][keep_wire]]
        new_offsets = np.zeros(int(mark.sum()) + 1, dtype=np.int64)
        np.cumsum(counts[mark], out=new_offsets[1:])
        sel = np.flatnonzero(mark)
        return Circuit(
            self.vars,
            np.asarray(self.kind, dtype=np.int8)[sel],
            np.asarray(self.lit, dtype=np.int32)[sel],
            new_offsets,
            new_children,
            np.asarray(self.dec, dtype=np.int32)[sel],
            flags,
        )


def literal_circuit(vars: VariableSet, var: int, positive: bool = True) -> Circuit:
    b = CircuitBuilder(vars)
    return b.build(b.literal(var, positive), flags=(DECOMPOSABLE, DETERMINISTIC))


def constant_circuit(vars: VariableSet, value: bool) -> Circuit:
    b = CircuitBuilder(vars)
    return b.build(b.true() if value else b.false(), flags=(DECOMPOSABLE, DETERMINISTIC))


# -- evaluation -----------------------------------------------------------------


def evaluate(c: Circuit, y: State) -> bool:
    y.check(c.vars)
    return bool(kernels.eval_pass(c, np.asarray([y.bits], dtype=np.uint8))[0])


def evaluate_many(c: Circuit, bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[1] != len(c.vars):
        raise DimensionError(f"expected a (rows, {len(c.vars)}) bit matrix")
    return kernels.eval_pass(c, bits)


def circuit_model_matrix(c: Circuit, cap: int = 25, fixed: dict | None = None) -> np.ndarray:
    """Models of ``c`` as uint8 rows in lexicographic order (exhaustive, ``len(vars) <= cap``)."""
    from .oracle import state_chunks

    k = len(c.vars)
    if k > cap:
        raise DimensionError(f"{k} variables exceeds the enumeration cap {cap}")
    parts = []
    for chunk in state_chunks(k):
        keep = evaluate_many(c, chunk)
        for var, value in (fixed or {}).items():
            keep &= chunk[:, var] == int(value)
        parts.append(chunk[keep])
    return np.concatenate(parts, axis=0)


def circuit_models(c: Circuit, cap: int = 25, fixed: dict | None = None) -> list[State]:
    return [State(tuple(int(b) for b in row)) for row in circuit_model_matrix(c, cap, fixed)]


# -- structure --------------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    is_nnf: bool
    is_decomposable: bool
    is_deterministic: bool | None  # None: could not be decided
    is_smooth: bool
    obdd_order: tuple[str, ...] | None
    size_wires: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["obdd_order"] = list(self.obdd_order) if self.obdd_order is not None else None
        return d


@dataclass
class _Analysis:
    varset: list[int]  # bitset of variables below each node
    pos: list[int]  # bitset of variables forced true by each node
    neg: list[int]  # bitset of variables forced false


def _analyse(c: Circuit) -> _Analysis:
    n = c.n_nodes
    full = (1 << len(c.vars)) - 1
    vs = [0] * n
    pos = [0] * n
    neg = [0] * n
    kind = c.kind.tolist()
    lit = c.lit.tolist()
    off = c.offsets.tolist()
    ch = c.children.tolist()
    for i in range(n):
        k = kind[i]
        if k == FALSE:
            pos[i] = neg[i] = full
        elif k == LIT:
            bit = 1 << (abs(lit[i]) - 1)
            vs[i] = bit
            if lit[i] > 0:
                pos[i] = bit
            else:
                neg[i] = bit
        elif k == AND:
            a = p = q = 0
            for j in ch[off[i] : off[i + 1]]:
                a |= vs[j]
                p |= pos[j]
                q |= neg[j]
            vs[i], pos[i], neg[i] = a, p, q
        elif k == OR:
            a, p, q = 0, full, full
            for j in ch[off[i] : off[i + 1]]:
                a |= vs[j]
                p &= pos[j]
                q &= neg[j]
            vs[i], pos[i], neg[i] = a, p, q
    return _Analysis(vs, pos, neg)


def _conflict(an: _Analysis, a: int, b: int) -> int:
    return (an.pos[a] & an.neg[b]) | (an.neg[a] & an.pos[b])


def _bits_of(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _subdag(c: Circuit, node: int) -> list[int]:
    seen = {node}
    stack = [node]
    while stack:
        i = stack.pop()
        for j in c.node_children(i).tolist():
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return sorted(seen)


def _or_disjoint_by_enumeration(c: Circuit, node: int, varset: int) -> bool:
    """True iff no assignment of ``var(node)`` satisfies two children of ``node``."""
    vars_ = list(_bits_of(varset))
    m = len(vars_)
    idx = np.arange(1 << m, dtype=np.int64)
    cols = {v: ((idx >> (m - 1 - j)) & 1).astype(bool) for j, v in enumerate(vars_)}
    rows = len(idx)
    val: dict[int, np.ndarray] = {}
    for i in _subdag(c, node):
        k = c.kind[i]
        if k == FALSE:
            val[i] = np.zeros(rows, dtype=bool)
        elif k == TRUE:
            val[i] = np.ones(rows, dtype=bool)
        elif k == LIT:
            col = cols[abs(int(c.lit[i])) - 1]
            val[i] = col if c.lit[i] > 0 else ~col
        elif k == AND:
            val[i] = np.logical_and.reduce([val[j] for j in c.node_children(i).tolist()])
        else:
            val[i] = np.logical_or.reduce([val[j] for j in c.node_children(i).tolist()])
    hits = np.sum([val[j] for j in c.node_children(node).tolist()], axis=0)
    return bool(np.all(hits <= 1))


def check_structure(c: Circuit) -> StructureReport:
    """Decomposability, determinism, smoothness and OBDD order of ``c``.

    Determinism is proved structurally when every pair of OR children forces
    opposite literals on some variable; otherwise OR nodes over at most
    ``BRUTE_FORCE_VARS`` variables are enumerated, and larger ones are reported
    as undecided (``None``).
    """
    an = c.analysis
    kind = c.kind.tolist()
    k_vars = len(c.vars)
    decomposable = True
    deterministic: bool | None = True
    smooth_ok = True
    ordered = True
    top = [0] * c.n_nodes  # nearest decision variables below each node
    succ = [0] * k_vars  # decision variable -> variables decided below it
    for i in range(c.n_nodes):
        kids = c.node_children(i).tolist()
        if kind[i] == LIT:
            # a bare literal is a degenerate decision on its variable
            top[i] = an.varset[i]
        elif kind[i] == AND:
            acc = 0
            t = 0
            for j in kids:
                if acc & an.varset[j]:
                    decomposable = False
                acc |= an.varset[j]
                t |= top[j]
            top[i] = t
        elif kind[i] == OR:
            if any(an.varset[j] != an.varset[i] for j in kids):
                smooth_ok = False
            pairwise = all(
                _conflict(an, a, b) for a, b in itertools.combinations(kids, 2)
            )
            if not pairwise and deterministic is not False:
                if an.varset[i].bit_count() <= BRUTE_FORCE_VARS:
                    if not _or_disjoint_by_enumeration(c, i, an.varset[i]):
                        deterministic = False
                else:
                    deterministic = None
            if ordered:
                if len(kids) != 2 or not _conflict(an, kids[0], kids[1]):
                    ordered = False
                    continue
                conflict = _conflict(an, kids[0], kids[1])
                label = int(c.decision[i]) - 1
                var = label if label >= 0 and (conflict >> label) & 1 else _lowest_bit(conflict)
                below = (top[kids[0]] | top[kids[1]]) & ~(1 << var)
                succ[var] |= below
                top[i] = 1 << var
    order = _topological_vars(succ) if ordered and decomposable else None
    return StructureReport(
        is_nnf=True,
        is_decomposable=decomposable,
        is_deterministic=deterministic,
        is_smooth=smooth_ok,
        obdd_order=tuple(c.vars[v] for v in order) if order is not None else None,
        size_wires=c.size_wires,
    )


def _topological_vars(succ: list[int]) -> list[int] | None:
    """Smallest-index-first topological order of the decision precedence graph."""
    k = len(succ)
    indeg = [0] * k
    for v in range(k):
        for w in _bits_of(succ[v]):
            indeg[w] += 1
    heap = [v for v in range(k) if indeg[v] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        v = heapq.heappop(heap)
        out.append(v)
        for w in _bits_of(succ[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return out if len(out) == k else None


# -- transformations ------------------------------------------------------------------


def _rebuild(c: Circuit, builder: CircuitBuilder, leaf=None) -> list[int]:
    """Copy ``c`` into ``builder`` node by node; ``leaf(var, positive)`` may replace literals."""
    new = [0] * c.n_nodes
    kind = c.kind.tolist()
    lit = c.lit.tolist()
    dec = c.decision.tolist()
    for i in range(c.n_nodes):
        k = kind[i]
        if k == FALSE:
            new[i] = builder.false()
        elif k == TRUE:
            new[i] = builder.true()
        elif k == LIT:
            var, positive = abs(lit[i]) - 1, lit[i] > 0
            new[i] = leaf(var, positive) if leaf else builder.literal(var, positive)
        elif k == AND:
            new[i] = builder.conj([new[j] for j in c.node_children(i).tolist()])
        else:
            new[i] = builder.disj([new[j] for j in c.node_children(i).tolist()], dec[i])
    return new


def _kept_flags(c: Circuit) -> tuple:
    return tuple(f for f in (DECOMPOSABLE, DETERMINISTIC) if f in c.flags)


def trim(c: Circuit) -> Circuit:
    """Fold constants upward and drop unreachable nodes; the model set is unchanged."""
    b = CircuitBuilder(c.vars, simplify=True)
    new = _rebuild(c, b)
    return b.build(new[c.root], flags=_kept_flags(c))


def condition(c: Circuit, var, value: bool) -> Circuit:
    """Replace literals on ``var`` (name or index) by constants and simplify."""
    v = var if isinstance(var, int) else c.vars.index(var)
    if not 0 <= v < len(c.vars):
        raise DimensionError(f"variable index {v} out of range")
    b = CircuitBuilder(c.vars, simplify=True)

    def leaf(x, positive):
        if x != v:
            return b.literal(x, positive)
        return b.true() if positive == bool(value) else b.false()

    new = _rebuild(c, b, leaf)
    return b.build(new[c.root], flags=_kept_flags(c))


def smooth(c: Circuit, pad_root: bool = True) -> Circuit:
    """Make every OR's children mention the same variables using ``(Y OR NOT Y)`` gadgets.

    With ``pad_root`` the root is also extended to every variable of ``c.vars``
    so that queries see the full distribution.
    """
    an = c.analysis
    b = CircuitBuilder(c.vars, simplify=False)
    kind = c.kind.tolist()
    lit = c.lit.tolist()
    dec = c.decision.tolist()
    new = [0] * c.n_nodes

    def pad(node, missing):
        if not missing:
            return node
        gadgets = [b.disj([b.literal(v, True), b.literal(v, False)]) for v in _bits_of(missing)]
        return b.conj([node] + gadgets)

    for i in range(c.n_nodes):
        k = kind[i]
        kids = c.node_children(i).tolist()
        if k == FALSE:
            new[i] = b.false()
        elif k == TRUE:
            new[i] = b.true()
        elif k == LIT:
            new[i] = b.literal(abs(lit[i]) - 1, lit[i] > 0)
        elif k == AND:
            new[i] = b.conj([new[j] for j in kids])
        else:
            union = an.varset[i]
            new[i] = b.disj([pad(new[j], union & ~an.varset[j]) for j in kids], dec[i])
    root = new[c.root]
    if pad_root:
        root = pad(root, ((1 << len(c.vars)) - 1) & ~an.varset[c.root])
    return b.build(root, flags=_kept_flags(c) + (SMOOTH,))


# -- text format ------------------------------------------------------------------------


def emit(c: Circuit) -> str:
    """Serialize to the ``nnf`` text format (a ``c vars`` line carries the names)."""
    lines = [f"nnf {c.n_nodes} {c.size_wires} {len(c.vars)}", "c vars " + json.dumps(list(c.vars.names))]
    kind = c.kind.tolist()
    lit = c.lit.tolist()
    dec = c.decision.tolist()
    for i in range(c.n_nodes):
        k = kind[i]
        if k == FALSE:
            lines.append("F")
        elif k == TRUE:
            lines.append("T")
        elif k == LIT:
            lines.append(f"L {lit[i]}")
        else:
            kids = c.node_children(i).tolist()
            body = " ".join(map(str, kids))
            if k == AND:
                lines.append(f"A {len(kids)} {body}")
            else:
                lines.append(f"O {dec[i]} {len(kids)} {body}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> Circuit:
    header = None
    names = None
    kind, lit, kids, dec = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            if line.startswith("c vars "):
                try:
                    names = json.loads(line[len("c vars "):])
                except json.JSONDecodeError as exc:
                    raise CircuitFormatError(f"line {lineno}: bad variable list") from exc
            continue
        tok = line.split()
        try:
            if header is None:
                if tok[0] != "nnf" or len(tok) != 4:
                    raise CircuitFormatError(f"line {lineno}: expected 'nnf <nodes> <wires> <vars>'")
                header = tuple(int(t) for t in tok[1:])
                continue
            i = len(kind)
            tag = tok[0]
            if tag == "L":
                v = int(tok[1])
                if v == 0 or abs(v) > header[2]:
                    raise CircuitFormatError(f"line {lineno}: literal {v} out of range")
                kind.append(LIT), lit.append(v), kids.append(()), dec.append(0)
            elif tag in ("T", "F"):
                kind.append(TRUE if tag == "T" else FALSE), lit.append(0), kids.append(()), dec.append(0)
            elif tag == "A":
                n = int(tok[1])
                ch = tuple(int(t) for t in tok[2:])
                if len(ch) != n:
                    raise CircuitFormatError(f"line {lineno}: child count mismatch")
                kind.append(AND if n else TRUE), lit.append(0), kids.append(ch), dec.append(0)
            elif tag == "O":
                d, n = int(tok[1]), int(tok[2])
                ch = tuple(int(t) for t in tok[3:])
                if len(ch) != n:
                    raise CircuitFormatError(f"line {lineno}: child count mismatch")
                if d < 0 or d > header[2]:
                    raise CircuitFormatError(f"line {lineno}: decision variable {d} out of range")
                kind.append(OR if n else FALSE), lit.append(0), kids.append(ch), dec.append(d)
            else:
                raise CircuitFormatError(f"line {lineno}: unknown node tag {tag!r}")
            if any(j < 0 or j >= i for j in kids[-1]):
                raise CircuitFormatError(f"line {lineno}: children must precede their parent")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, CircuitFormatError):
                raise
            raise CircuitFormatError(f"line {lineno}: {exc}") from exc
    if header is None:
        raise CircuitFormatError("empty circuit file")
    n_nodes, n_wires, n_vars = header
    if len(kind) != n_nodes:
        raise CircuitFormatError(f"header announces {n_nodes} nodes, found {len(kind)}")
    if sum(len(k) for k in kids) != n_wires:
        raise CircuitFormatError(f"header announces {n_wires} wires, found {sum(len(k) for k in kids)}")
    if n_vars < 1:
        raise CircuitFormatError("a circuit needs at least one variable")
    vars = VariableSet(tuple(names)) if names is not None else VariableSet.default(n_vars)
    if len(vars) != n_vars:
        raise CircuitFormatError("variable list length differs from the header")
    offsets = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum([len(k) for k in kids], out=offsets[1:])
    children = np.fromiter(itertools.chain.from_iterable(kids), dtype=np.int32, count=n_wires)
    return Circuit(vars, kind, lit, offsets, children, dec)


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        return parse(fh.read())


def save_circuit(c: Circuit, path):
    with open(path, "w") as fh:
        fh.write(emit(c))
