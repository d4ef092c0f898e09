"""Bottom-up circuit passes.

Every pass exists as a numba loop over the node arena (children always precede
parents) and as a numpy version that sweeps the circuit level by level with
``ufunc.reduceat``. :func:`nesykc._backend.get_backend` picks one at call time.

Node kinds: 0 FALSE, 1 TRUE, 2 LIT (signed 1-based variable in ``lit``), 3 AND, 4 OR.
"""

import math

import numpy as np

from . import _backend
from ._backend import njit

FALSE, TRUE, LIT, AND, OR = 0, 1, 2, 3, 4


# -- numba kernels ------------------------------------------------------------


@njit
def _reachable_nb(offsets, children, root):
    mark = np.zeros(root + 1, dtype=np.bool_)
    mark[root] = True
    for i in range(root, -1, -1):
        if mark[i]:
            for j in range(offsets[i], offsets[i + 1]):
                mark[children[j]] = True
    return mark


@njit
def _heights_nb(kind, offsets, children):
    n = kind.shape[0]
    h = np.zeros(n, dtype=np.int64)
    for i in range(n):
        best = -1
        for j in range(offsets[i], offsets[i + 1]):
            if h[children[j]] > best:
                best = h[children[j]]
        h[i] = best + 1
    return h


@njit
def _pqe_nb(kind, lit, offsets, children, wpos, wneg):
    n = kind.shape[0]
    z = np.empty(n, dtype=np.float64)
    for i in range(n):
        k = kind[i]
        if k == 0:
            z[i] = 0.0
        elif k == 1:
            z[i] = 1.0
        elif k == 2:
            l = lit[i]
            z[i] = wpos[l - 1] if l > 0 else wneg[-l - 1]
        elif k == 3:
            acc = 1.0
            for j in range(offsets[i], offsets[i + 1]):
                acc *= z[children[j]]
            z[i] = acc
        else:
            # Neumaier-compensated sum
            s = 0.0
            comp = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                x = z[children[j]]
                t = s + x
                if abs(s) >= abs(x):
                    comp += (s - t) + x
                else:
                    comp += (x - t) + s
                s = t
            z[i] = s + comp
    return z


@njit
def _eqe_nb(kind, lit, offsets, children, lpos, lneg):
    n = kind.shape[0]
    lz = np.empty(n, dtype=np.float64)
    r = np.empty(n, dtype=np.float64)
    for i in range(n):
        k = kind[i]
        if k == 0:
            lz[i] = -np.inf
            r[i] = 0.0
        elif k == 1:
            lz[i] = 0.0
            r[i] = 0.0
        elif k == 2:
            l = lit[i]
            w = lpos[l - 1] if l > 0 else lneg[-l - 1]
            lz[i] = w
            r[i] = w
        elif k == 3:
            a = 0.0
            b = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                a += lz[children[j]]
                b += r[children[j]]
            lz[i] = a
            r[i] = b
        else:
            mx = -np.inf
            for j in range(offsets[i], offsets[i + 1]):
                if lz[children[j]] > mx:
                    mx = lz[children[j]]
            if mx == -np.inf:
                lz[i] = -np.inf
                r[i] = 0.0
                continue
            s = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                s += math.exp(lz[children[j]] - mx)
            total = mx + math.log(s)
            acc = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                c = children[j]
                if lz[c] > -np.inf:
                    acc += math.exp(lz[c] - total) * r[c]
            lz[i] = total
            r[i] = acc
    return lz, r


@njit
def _maxsum_nb(kind, lit, offsets, children, lpos, lneg):
    n = kind.shape[0]
    m = np.empty(n, dtype=np.float64)
    for i in range(n):
        k = kind[i]
        if k == 0:
            m[i] = -np.inf
        elif k == 1:
            m[i] = 0.0
        elif k == 2:
            l = lit[i]
            m[i] = lpos[l - 1] if l > 0 else lneg[-l - 1]
        elif k == 3:
            acc = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                acc += m[children[j]]
            m[i] = acc
        else:
            best = -np.inf
            for j in range(offsets[i], offsets[i + 1]):
                if m[children[j]] > best:
                    best = m[children[j]]
            m[i] = best
    return m


@njit
def _eval_nb(kind, lit, offsets, children, bits):
    n = kind.shape[0]
    rows = bits.shape[0]
    val = np.empty((n, rows), dtype=np.bool_)
    for i in range(n):
        k = kind[i]
        if k == 0:
            val[i, :] = False
        elif k == 1:
            val[i, :] = True
        elif k == 2:
            l = lit[i]
            if l > 0:
                for s in range(rows):
                    val[i, s] = bits[s, l - 1] != 0
            else:
                for s in range(rows):
                    val[i, s] = bits[s, -l - 1] == 0
        elif k == 3:
            for s in range(rows):
                ok = True
                for j in range(offsets[i], offsets[i + 1]):
                    if not val[children[j], s]:
                        ok = False
                        break
                val[i, s] = ok
        else:
            for s in range(rows):
                ok = False
                for j in range(offsets[i], offsets[i + 1]):
                    if val[children[j], s]:
                        ok = True
                        break
                val[i, s] = ok
    return val[n - 1].copy()


# -- numpy fallbacks ----------------------------------------------------------


def _reachable_np(offsets, children, root):
    mark = np.zeros(root + 1, dtype=bool)
    mark[root] = True
    off = offsets.tolist()
    ch = children.tolist()
    for i in range(root, -1, -1):
        if mark[i]:
            for j in range(off[i], off[i + 1]):
                mark[ch[j]] = True
    return mark


def _heights_np(kind, offsets, children):
    n = len(kind)
    h = [0] * n
    off = offsets.tolist()
    ch = children.tolist()
    for i in range(n):
        a, b = off[i], off[i + 1]
        if a < b:
            h[i] = 1 + max(h[c] for c in ch[a:b])
    return np.asarray(h, dtype=np.int64)


class LevelPlan:
    """Nodes grouped by height, with the gather/segment arrays ``reduceat`` needs."""

    def __init__(self, kind, lit, offsets, children):
        h = heights(kind, offsets, children)
        self.leaves = np.flatnonzero(h == 0)
        self.leaf_kind = kind[self.leaves]
        self.leaf_lit = lit[self.leaves]
        self.levels = []
        order = np.argsort(h, kind="stable")
        bounds = np.searchsorted(h[order], np.arange(1, h.max(initial=0) + 2))
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            nodes = order[lo:hi]
            groups = []
            for k in (AND, OR):
                sel = nodes[kind[nodes] == k]
                if len(sel) == 0:
                    groups.append(None)
                    continue
                counts = offsets[sel + 1] - offsets[sel]
                starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
                base = np.repeat(offsets[sel] - starts, counts)
                gather = children[base + np.arange(counts.sum())]
                groups.append((sel, gather, starts))
            self.levels.append(tuple(groups))

    def leaf_values(self, const_false, const_true, wpos, wneg):
        vals = np.empty(len(self.leaves))
        vals[self.leaf_kind == FALSE] = const_false
        vals[self.leaf_kind == TRUE] = const_true
        is_lit = self.leaf_kind == LIT
        lits = self.leaf_lit[is_lit]
        idx = np.abs(lits) - 1
        vals[is_lit] = np.where(lits > 0, wpos[idx], wneg[idx])
        return vals


def _pqe_np(plan, n, wpos, wneg):
    z = np.empty(n)
    z[plan.leaves] = plan.leaf_values(0.0, 1.0, wpos, wneg)
    for and_g, or_g in plan.levels:
        if and_g is not None:
            sel, gather, starts = and_g
            z[sel] = np.multiply.reduceat(z[gather], starts)
        if or_g is not None:
            sel, gather, starts = or_g
            z[sel] = np.add.reduceat(z[gather], starts)
    return z


def _maxsum_np(plan, n, lpos, lneg):
    m = np.empty(n)
    m[plan.leaves] = plan.leaf_values(-np.inf, 0.0, lpos, lneg)
    for and_g, or_g in plan.levels:
        if and_g is not None:
            sel, gather, starts = and_g
            m[sel] = np.add.reduceat(m[gather], starts)
        if or_g is not None:
            sel, gather, starts = or_g
            m[sel] = np.maximum.reduceat(m[gather], starts)
    return m


def _eqe_np(plan, n, lpos, lneg):
    lz = np.empty(n)
    r = np.zeros(n)
    lz[plan.leaves] = plan.leaf_values(-np.inf, 0.0, lpos, lneg)
    r[plan.leaves] = plan.leaf_values(0.0, 0.0, lpos, lneg)
    with np.errstate(invalid="ignore"):
        for and_g, or_g in plan.levels:
            if and_g is not None:
                sel, gather, starts = and_g
                lz[sel] = np.add.reduceat(lz[gather], starts)
                r[sel] = np.add.reduceat(r[gather], starts)
            if or_g is not None:
                sel, gather, starts = or_g
                counts = np.diff(np.append(starts, len(gather)))
                mx = np.maximum.reduceat(lz[gather], starts)
                safe = np.where(np.isfinite(mx), mx, 0.0)
                shifted = np.exp(lz[gather] - np.repeat(safe, counts))
                total = safe + np.log(np.add.reduceat(shifted, starts))
                weights = np.exp(lz[gather] - np.repeat(total, counts))
                weights[~np.isfinite(lz[gather])] = 0.0
                dead = ~np.isfinite(mx)
                lz[sel] = np.where(dead, -np.inf, total)
                r[sel] = np.where(dead, 0.0, np.add.reduceat(np.nan_to_num(weights * r[gather]), starts))
    return lz, r


def _eval_np(plan, n, bits):
    rows = bits.shape[0]
    b = bits.astype(bool)
    val = np.empty((n, rows), dtype=bool)
    leaves = plan.leaves
    val[leaves[plan.leaf_kind == FALSE]] = False
    val[leaves[plan.leaf_kind == TRUE]] = True
    is_lit = plan.leaf_kind == LIT
    lits = plan.leaf_lit[is_lit]
    cols = b[:, np.abs(lits) - 1].T
    val[leaves[is_lit]] = np.where((lits > 0)[:, None], cols, ~cols)
    for and_g, or_g in plan.levels:
        if and_g is not None:
            sel, gather, starts = and_g
            val[sel] = np.logical_and.reduceat(val[gather], starts, axis=0)
        if or_g is not None:
            sel, gather, starts = or_g
            val[sel] = np.logical_or.reduceat(val[gather], starts, axis=0)
    return val[n - 1].copy()


# -- dispatch ---------------------------------------------------------------


def _numba():
    return _backend.get_backend() == "numba"


def reachable(offsets, children, root):
    if _numba():
        return _reachable_nb(offsets, children, root)
    return _reachable_np(offsets, children, root)


def heights(kind, offsets, children):
    if _numba():
        return _heights_nb(kind, offsets, children)
    return _heights_np(kind, offsets, children)


def pqe_pass(c, wpos, wneg):
    """Node values of the sum-product pass (``z``); the root is the last entry."""
    if _numba():
        return _pqe_nb(c.kind, c.lit, c.offsets, c.children, wpos, wneg)
    return _pqe_np(c.level_plan, c.n_nodes, wpos, wneg)


def eqe_pass(c, lpos, lneg):
    """(log z, r) per node where r is the expected log-weight under the node's normalized distribution."""
    if _numba():
        return _eqe_nb(c.kind, c.lit, c.offsets, c.children, lpos, lneg)
    return _eqe_np(c.level_plan, c.n_nodes, lpos, lneg)


def maxsum_pass(c, lpos, lneg):
    if _numba():
        return _maxsum_nb(c.kind, c.lit, c.offsets, c.children, lpos, lneg)
    return _maxsum_np(c.level_plan, c.n_nodes, lpos, lneg)


def eval_pass(c, bits):
    """Root value of ``c`` for every row of the uint8 matrix ``bits``."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if _numba():
        return _eval_nb(c.kind, c.lit, c.offsets, c.children, bits)
    return _eval_np(c.level_plan, c.n_nodes, bits)
