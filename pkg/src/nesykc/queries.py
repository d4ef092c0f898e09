"""Probabilistic queries on compiled circuits.

Every query is one bottom-up pass over the node arena (plus a top-down
traceback for MPE). Structural preconditions are checked up front and violated
ones raise :class:`~nesykc.errors.StructureError`.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuit import DECOMPOSABLE, DETERMINISTIC, SMOOTH, Circuit
from .core import ProbabilityVector, State, log_close, meets_threshold, ranked
from .errors import DimensionError, StructureError, UnsatisfiableError
from .kernels import AND, LIT, OR
from .ranking import enumerate_ranked


@dataclass
class PassCounter:
    passes: int = 0
    wires: int = 0
    nodes: int = 0


_counter: contextvars.ContextVar[PassCounter | None] = contextvars.ContextVar("nesykc_counter", default=None)


@contextlib.contextmanager
def counting():
    """Count circuit passes issued by queries inside the block."""
    ctr = PassCounter()
    token = _counter.set(ctr)
    try:
        yield ctr
    finally:
        _counter.reset(token)


def _run(pass_fn, c: Circuit, *args):
    ctr = _counter.get()
    if ctr is not None:
        ctr.passes += 1
        ctr.wires += c.size_wires
        ctr.nodes += c.n_nodes
    return pass_fn(c, *args)


def _require(c: Circuit, p: ProbabilityVector, *props):
    if len(p) != len(c.vars):
        raise DimensionError(f"{len(p)} probabilities for a circuit over {len(c.vars)} variables")
    for prop in props:
        if not c.has(prop):
            raise StructureError(f"query needs a {prop} circuit")


def pqe(c: Circuit, p: ProbabilityVector) -> float:
    """Probability that a random state satisfies ``c``.

    Unmentioned variables need no smoothing since their weights sum to one.
    """
    _require(c, p, DECOMPOSABLE, DETERMINISTIC)
    z = _run(kernels.pqe_pass, c, p.p, 1.0 - p.p)
    return float(z[-1])


def eqe(c: Circuit, p: ProbabilityVector) -> float:
    """Entropy in nats of the distribution conditioned on ``c``."""
    _require(c, p, DECOMPOSABLE, DETERMINISTIC)
    if not c.has(SMOOTH):
        warnings.warn("circuit is not smooth; smoothing it before computing entropy", stacklevel=2)
    s = c.smoothed
    lz, r = _run(kernels.eqe_pass, s, p.log_pos, p.log_neg)
    if lz[-1] == -np.inf:
        raise UnsatisfiableError("entropy of an unsatisfiable circuit is undefined")
    return max(0.0, float(lz[-1] - r[-1]))


# -- MPE -------------------------------------------------------------------------


def _evidence_weights(p: ProbabilityVector, fixed: dict | None):
    """Leaf weights relative to each variable's best value, plus the dropped constant.

    Free variables get ``log w - max(log p, log(1-p))`` so a branch that never
    mentions a variable implicitly picks its best value at cost 0. Fixed
    variables score 0 for the allowed literal and ``-inf`` for the other; their
    true weight goes into the constant.
    """
    best = np.maximum(p.log_pos, p.log_neg)
    lpos = p.log_pos - best
    lneg = p.log_neg - best
    const = float(np.sum(best))
    if fixed:
        lpos = lpos.copy()
        lneg = lneg.copy()
        for v, val in fixed.items():
            const += (p.log_pos[v] if val else p.log_neg[v]) - best[v]
            lpos[v] = 0.0 if val else -np.inf
            lneg[v] = -np.inf if val else 0.0
    return lpos, lneg, const


def _best_logp(c: Circuit, p: ProbabilityVector, fixed: dict | None) -> float:
    lpos, lneg, const = _evidence_weights(p, fixed)
    m = _run(kernels.maxsum_pass, c, lpos, lneg)
    return float(m[-1]) + const if m[-1] > -np.inf else -np.inf


def _traceback(c: Circuit, m: np.ndarray, lpos, lneg, fixed: dict):
    """Follow argmax children from the root; report whether any choice was a near-tie."""
    k = len(c.vars)
    bits = [None] * k
    tie = False
    kind = c.kind
    stack = [c.root]
    seen = set()
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        kd = kind[i]
        if kd == LIT:
            lit = int(c.lit[i])
            bits[abs(lit) - 1] = 1 if lit > 0 else 0
        elif kd == AND:
            stack.extend(c.node_children(i).tolist())
        elif kd == OR:
            kids = c.node_children(i).tolist()
            close = [j for j in kids if m[j] > -np.inf and log_close(m[j], m[i])]
            if len(close) > 1:
                tie = True
            stack.append(close[0] if close else max(kids, key=lambda j: m[j]))
    for v in range(k):
        if bits[v] is None:
            if v in fixed:
                bits[v] = fixed[v]
            else:
                if log_close(lpos[v], lneg[v]):
                    tie = True
                bits[v] = 1 if lpos[v] > lneg[v] else 0
    return bits, tie


def _greedy_lexicographic(c: Circuit, p: ProbabilityVector, fixed: dict, target: float):
    """Smallest bit-string whose log-probability is within tolerance of ``target``."""
    fixed = dict(fixed)
    for v in range(len(c.vars)):
        if v in fixed:
            continue
        fixed[v] = 0
        lp = _best_logp(c, p, fixed)
        if not (lp > -np.inf and log_close(lp, target)):
            fixed[v] = 1
    return [fixed[v] for v in range(len(c.vars))]


def mpe_log(c: Circuit, p: ProbabilityVector, fixed: dict | None = None):
    """``(bits, log-probability)`` of the most probable model agreeing with ``fixed``, or None."""
    fixed = dict(fixed or {})
    lpos, lneg, const = _evidence_weights(p, fixed)
    m = _run(kernels.maxsum_pass, c, lpos, lneg)
    if m[-1] == -np.inf:
        return None
    bits, tie = _traceback(c, m, lpos, lneg, fixed)
    if tie:
        bits = _greedy_lexicographic(c, p, fixed, float(m[-1]) + const)
    return tuple(bits), p.log_prob(State(tuple(bits)))


def mpe(c: Circuit, p: ProbabilityVector, fixed: dict | None = None) -> tuple[State, float]:
    """Most probable model and its probability; ties go to the smallest bit-string.

    Only decomposability is needed: the relative leaf weights make unmentioned
    variables free, so no smoothing pass is required.
    """
    _require(c, p, DECOMPOSABLE)
    found = mpe_log(c, p, fixed)
    if found is None:
        raise UnsatisfiableError("MPE of an unsatisfiable circuit is undefined")
    bits, logp = found
    return State(bits), math.exp(logp)


# -- enumeration -----------------------------------------------------------------------


def thresh_enum_scored(c: Circuit, p: ProbabilityVector, t: float) -> list[tuple[float, State]]:
    """``(log-probability, state)`` for every model with probability at least ``t``, ranked.

    Depth-first over variables in index order; a branch survives only if its
    best completion still meets ``t``, so every explored branch ends in output.
    """
    _require(c, p, DECOMPOSABLE)
    k = len(c.vars)
    out = []
    stack = [{}]
    while stack:
        fixed = stack.pop()
        lp = _best_logp(c, p, fixed)
        if lp == -np.inf or not meets_threshold(lp, t):
            continue
        if len(fixed) == k:
            state = State(tuple(fixed[v] for v in range(k)))
            out.append((p.log_prob(state), state))
            continue
        v = len(fixed)
        for val in (1, 0):
            stack.append({**fixed, v: val})
    return ranked(out)


def thresh_enum(c: Circuit, p: ProbabilityVector, t: float) -> list[State]:
    return [s for _, s in thresh_enum_scored(c, p, t)]


def top_k_scored(c: Circuit, p: ProbabilityVector, k: int) -> list[tuple[float, State]]:
    _require(c, p, DECOMPOSABLE)
    return enumerate_ranked(lambda fixed: mpe_log(c, p, fixed), len(c.vars), k=k)


def top_k(c: Circuit, p: ProbabilityVector, k: int) -> list[State]:
    """The ``k`` most probable models via Lawler partitioning over constrained MPE."""
    return [s for _, s in top_k_scored(c, p, k)]
