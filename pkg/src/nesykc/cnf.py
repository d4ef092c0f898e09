"""Minimal DIMACS CNF reading, writing and vectorized evaluation."""

from __future__ import annotations

import json

import numpy as np

from .core import VariableSet
from .errors import CircuitFormatError


def emit_dimacs(n_vars: int, clauses, names=None) -> str:
    lines = []
    if names is not None:
        lines.append("c vars " + json.dumps(list(names)))
    lines.append(f"p cnf {n_vars} {len(clauses)}")
    lines.extend(" ".join(map(str, cl)) + " 0" for cl in clauses)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str):
    """Return ``(vars, clauses)``; clauses are tuples of signed 1-based literals."""
    header = None
    names = None
    clauses = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            if line.startswith("c vars "):
                names = json.loads(line[len("c vars "):])
            continue
        if line.startswith("p"):
            tok = line.split()
            if len(tok) != 4 or tok[1] != "cnf":
                raise CircuitFormatError(f"line {lineno}: expected 'p cnf <vars> <clauses>'")
            header = (int(tok[2]), int(tok[3]))
            continue
        if header is None:
            raise CircuitFormatError(f"line {lineno}: clause before header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > header[0]:
                raise CircuitFormatError(f"line {lineno}: literal {lit} out of range")
            else:
                current.append(lit)
    if header is None:
        raise CircuitFormatError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != header[1]:
        raise CircuitFormatError(f"header announces {header[1]} clauses, found {len(clauses)}")
    vars = VariableSet(tuple(names)) if names is not None else VariableSet.default(header[0])
    return vars, clauses


def cnf_mask(clauses, bits: np.ndarray) -> np.ndarray:
    """Rows of the uint8 matrix ``bits`` that satisfy every clause."""
    y = np.asarray(bits).astype(bool)
    ok = np.ones(len(y), dtype=bool)
    for cl in clauses:
        sat = np.zeros(len(y), dtype=bool)
        for lit in cl:
            col = y[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    return ok
