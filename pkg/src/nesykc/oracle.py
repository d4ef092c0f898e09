"""Exhaustive ground truth: enumerate all 2^k states and filter by the language semantics.

Enumeration is chunked and vectorized with numpy; the per-language predicates
mirror :func:`nesykc.core.satisfies`, which the test-suite cross-checks.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .core import (
    CardOp,
    Language,
    ProbabilityVector,
    QueryKind,
    QueryResult,
    State,
    Theory,
    descendants_reflexive,
    log_close,
    meets_threshold,
    ranked,
    _is_total_simple_path,
)
from .errors import OracleCapError, UnsatisfiableError

DEFAULT_CAP = 25
CHUNK_BITS = 16


def oracle_cap() -> int:
    raw = os.environ.get("NESYKC_ORACLE_CAP")
    return int(raw) if raw else DEFAULT_CAP


def _check_cap(theory: Theory, cap):
    cap = oracle_cap() if cap is None else cap
    if theory.k > cap:
        raise OracleCapError(f"{theory.k} variables exceeds the oracle cap of {cap}")


def state_chunks(k: int):
    """Yield uint8 bit matrices covering all 2^k states in lexicographic order."""
    total = 1 << k
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    step = 1 << CHUNK_BITS
    for start in range(0, total, step):
        idx = np.arange(start, min(total, start + step), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def model_mask(theory: Theory, bits: np.ndarray) -> np.ndarray:
    """Boolean mask over the rows of ``bits`` selecting the models of ``theory``."""
    lang = theory.language
    pl = theory.payload
    y = bits.astype(bool, copy=False)
    if lang is Language.CARD:
        count = bits.sum(axis=1, dtype=np.int64)
        if pl.op is CardOp.LE:
            return count <= pl.l
        if pl.op is CardOp.GE:
            return count >= pl.l
        return count == pl.l

    if lang.vertex_based:
        col = dict(zip(pl.vertices, pl.labels))
        ok = np.ones(len(bits), dtype=bool)
        for u, v in pl.edges:
            ok &= ~y[:, col[v]] | y[:, col[u]]
        if lang is Language.HEX:
            for u, v in pl.exclusions:
                ok &= ~(y[:, col[u]] & y[:, col[v]])
        elif lang is Language.TE_HIER:
            desc = descendants_reflexive(pl.vertices, pl.edges)
            vs = pl.vertices
            for a in range(len(vs)):
                for b in range(a + 1, len(vs)):
                    if not desc[vs[a]] & desc[vs[b]]:
                        ok &= ~(y[:, col[vs[a]]] & y[:, col[vs[b]]])
        return ok

    if lang is Language.MATCH:
        ok = np.ones(len(bits), dtype=bool)
        load: dict = {}
        for (u, v), i in zip(pl.edges, pl.labels):
            for w in (u, v):
                load[w] = load.get(w, 0) + bits[:, i].astype(np.int64)
        for total in load.values():
            ok &= total <= 1
        return ok

    # total simple paths: degree filter first, then walk the survivors
    out_deg: dict = {}
    in_deg: dict = {}
    for (u, v), i in zip(pl.edges, pl.labels):
        col = bits[:, i].astype(np.int64)
        out_deg[u] = out_deg.get(u, 0) + col
        in_deg[v] = in_deg.get(v, 0) + col
    ok = bits.any(axis=1)
    starts = np.zeros(len(bits), dtype=np.int64)
    ends = np.zeros(len(bits), dtype=np.int64)
    graph_sources = {u for u in out_deg if u not in in_deg}
    graph_sinks = {v for v in in_deg if v not in out_deg}
    for w in set(out_deg) | set(in_deg):
        o = out_deg.get(w, 0)
        d = in_deg.get(w, 0)
        ok &= (np.asarray(o) <= 1) & (np.asarray(d) <= 1)
        start_here = (np.asarray(o) == 1) & (np.asarray(d) == 0)
        end_here = (np.asarray(o) == 0) & (np.asarray(d) == 1)
        if w not in graph_sources:
            ok &= ~start_here
        if w not in graph_sinks:
            ok &= ~end_here
        starts += start_here
        ends += end_here
    ok &= (starts == 1) & (ends == 1)
    if lang is Language.SPATH:
        # detached cycles survive the degree filter on cyclic graphs
        for row in np.flatnonzero(ok):
            ok[row] = _is_total_simple_path(pl, bits[row])
    return ok


def oracle_model_matrix(theory: Theory, cap=None) -> np.ndarray:
    """All models as a uint8 matrix, one row per model, in lexicographic order."""
    _check_cap(theory, cap)
    parts = [chunk[model_mask(theory, chunk)] for chunk in state_chunks(theory.k)]
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, theory.k), np.uint8)


def oracle_models(theory: Theory, cap=None) -> list[State]:
    return [State(tuple(int(b) for b in row)) for row in oracle_model_matrix(theory, cap)]


def _log_probs(models: np.ndarray, p: ProbabilityVector) -> np.ndarray:
    m = models.astype(np.float64)
    return m @ p.log_pos + (1.0 - m) @ p.log_neg


def oracle_query(theory: Theory, p: ProbabilityVector, query, param=None, cap=None,
                 models: np.ndarray | None = None) -> QueryResult:
    """Answer any query by brute force. ``param`` is k for top-k, the threshold for thresh."""
    kind = QueryKind(query)
    if models is None:
        models = oracle_model_matrix(theory, cap)
    logp = _log_probs(models, p)

    if kind is QueryKind.PQE:
        return QueryResult(kind, value=math.fsum(np.exp(logp)))
    if kind is QueryKind.TOP_K or kind is QueryKind.THRESH:
        if kind is QueryKind.THRESH:
            keep = [i for i in range(len(logp)) if meets_threshold(logp[i], float(param))]
        else:
            keep = range(len(logp))
        order = ranked((float(logp[i]), State(tuple(int(b) for b in models[i]))) for i in keep)
        if kind is QueryKind.TOP_K:
            order = order[: int(param)]
        return QueryResult(
            kind,
            states=tuple(s for _, s in order),
            probabilities=tuple(math.exp(lp) for lp, _ in order),
        )

    if len(models) == 0:
        raise UnsatisfiableError(f"{kind.value} needs a satisfiable theory")
    if kind is QueryKind.MPE:
        best = float(np.max(logp))
        # rows are lexicographic, so the first near-maximal row is the tie-break winner
        i = next(i for i in range(len(logp)) if log_close(logp[i], best))
        state = State(tuple(int(b) for b in models[i]))
        return QueryResult(kind, value=math.exp(logp[i]), state=state)
    # EQE in nats over the conditioned distribution
    top = float(np.max(logp))
    log_z = top + math.log(math.fsum(np.exp(logp - top)))
    log_q = logp - log_z
    return QueryResult(kind, value=-math.fsum(np.exp(log_q) * log_q))
