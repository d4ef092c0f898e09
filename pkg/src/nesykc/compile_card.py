"""Cardinality constraints ``sum(Y) <op> l`` compiled to ordered decision diagrams.

Cell ``(i, r)`` accepts assignments of the last ``n - i`` variables that contain
``r`` more positives (exactly, at most or at least, depending on the operator).
It decides on variable ``i`` and defers to ``(i+1, r-1)`` or ``(i+1, r)``, so
the root decides ``Y1`` and the diagram follows the natural order. The three
operators share the grid and differ only in which boundary cells are constant.
"""

from __future__ import annotations

from .circuit import DECOMPOSABLE, DETERMINISTIC, Circuit, CircuitBuilder
from .core import CardOp, Language, Theory
from .errors import TheoryError


def _boundary(op: CardOp, remaining: int, r: int, trim: bool):
    """Constant value of a cell, or None when it must decide on a variable."""
    if op is CardOp.LE:
        if r < 0:
            return False
        if r >= remaining:
            return True
    elif op is CardOp.GE:
        if r <= 0:
            return True
        if r > remaining and (trim or remaining == 0):
            return False
    else:
        if r < 0 or (r > remaining and (trim or remaining == 0)):
            return False
        if remaining == 0:
            return True
    return None


def compile_card(t: Theory, trim: bool = True) -> Circuit:
    """Decision-diagram circuit whose models are exactly the models of ``t``.

    With ``trim=False`` cells that can no longer succeed still decide on their
    variable and bottom out in ``FALSE`` leaves.
    """
    if t.language is not Language.CARD:
        raise TheoryError(f"expected a card theory, got {t.language.value}")
    n, op, l = t.payload.n, t.payload.op, t.payload.l
    b = CircuitBuilder(t.vars, simplify=trim)
    const = {True: b.true(), False: b.false()}
    below: dict[int, int] = {}
    for i in range(n, -1, -1):
        layer = {}
        # only r in [l - i, l] is reachable from the root; r < -1 never decides
        for r in range(max(l - i, -1), l + 1):
            fixed = _boundary(op, n - i, r, trim)
            if fixed is not None:
                layer[r] = const[fixed]
            else:
                layer[r] = b.decide(i, below[r - 1], below[r])
        below = layer
    return b.build(below[l], flags=(DECOMPOSABLE, DETERMINISTIC))
