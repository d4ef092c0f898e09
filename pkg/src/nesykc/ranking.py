"""Lawler partitioning: ranked enumeration on top of a constrained MPE solver.

The solver receives a partial assignment ``{variable index: 0/1}`` and returns
the best completion as ``(bits, log-probability)`` or ``None`` when the
restricted space is empty. Each emitted solution splits its subproblem by
agreeing with it on a prefix of the free variables and disagreeing on the next.
"""

from __future__ import annotations

import heapq
import itertools
from typing import Callable, Optional

from .core import State, log_close, meets_threshold, ranked

Solver = Callable[[dict], Optional[tuple]]


def _children(fixed: dict, bits, k: int):
    free = [i for i in range(k) if i not in fixed]
    prefix = dict(fixed)
    for i in free:
        child = dict(prefix)
        child[i] = 1 - bits[i]
        yield child
        prefix[i] = bits[i]


def enumerate_ranked(solve: Solver, k_vars: int, k: int | None = None, threshold: float | None = None,
                     fixed: dict | None = None) -> list[tuple[float, State]]:
    """Best solutions in decreasing probability (ties by bit-string).

    Stops after ``k`` solutions or below ``threshold``; exactly one limit is required.
    """
    if (k is None) == (threshold is None):
        raise ValueError("give exactly one of k and threshold")
    if k is not None and k <= 0:
        return []
    tick = itertools.count()
    heap = []

    def push(constraints):
        found = solve(constraints)
        if found is not None:
            bits, logp = found
            heapq.heappush(heap, (-logp, tuple(bits), next(tick), constraints))

    push(dict(fixed or {}))
    out = []
    while heap:
        neg, bits, _, constraints = heap[0]
        logp = -neg
        if threshold is not None and not meets_threshold(logp, threshold):
            break
        # for top-k, drain everything tied with the k-th value before truncating
        if k is not None and len(out) >= k and not log_close(logp, out[-1][0]):
            break
        heapq.heappop(heap)
        out.append((logp, State(bits)))
        for child in _children(constraints, bits, k_vars):
            push(child)
    out = ranked(out)
    return out[:k] if k is not None else out
