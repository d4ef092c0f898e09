"""``nesykc`` command line: compile theories, query them, check circuits, run the brute-force oracle.

Exit codes: 0 success, 2 bad input, 3 intractable or unsupported route,
4 unsatisfiable theory, 5 oracle cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import oracle
from .circuit import check_structure, emit, load_circuit, smooth
from .compile_hier import emit_hex_2horn
from .core import Language, QueryKind, QueryResult, Theory, load_probs, load_theory
from .engine import REFUSALS, answer, answer_circuit, compile_theory
from .errors import (
    CircuitFormatError,
    IntractableError,
    OracleCapError,
    StructureError,
    TheoryError,
    UnsatisfiableError,
)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_INTRACTABLE = 3
EXIT_UNSAT = 4
EXIT_CAP = 5


def _num(x: float) -> float:
    return float(f"{x:.12g}")


def result_json(res: QueryResult, vars, log_base: str = "e") -> dict:
    value = res.value
    if res.kind is QueryKind.EQE and log_base == "2":
        value = value / math.log(2)
    if res.states is not None:
        value = [_num(x) for x in res.probabilities]
    elif value is not None:
        value = _num(value)
    return {
        "query": res.kind.value,
        "value": value,
        "state": res.state.true_names(vars) if res.state is not None else None,
        "states": [s.true_names(vars) for s in res.states] if res.states is not None else None,
    }


def _print(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def _param(args):
    kind = QueryKind(args.kind)
    if kind is QueryKind.TOP_K:
        if args.k is None or args.k < 0:
            raise TheoryError("top-k needs --k N with N >= 0")
        return args.k
    if kind is QueryKind.THRESH:
        if args.threshold is None or not args.threshold > 0:
            raise TheoryError("thresh needs --threshold T with T > 0")
        return args.threshold
    return None


def cmd_compile(args) -> int:
    t = load_theory(args.theory)
    out = Path(args.out)
    if t.language in (Language.HIER, Language.HEX):
        out = out.with_suffix(".cnf")
        out.write_text(emit_hex_2horn(t))
        _print({"out": str(out), "format": "cnf"})
        return EXIT_OK
    if t.language in (Language.SPATH, Language.MATCH):
        raise IntractableError(f"{t.language.value} cannot be compiled: {REFUSALS[t.language]}")
    c = compile_theory(t, trim=not args.no_trim)
    if args.smooth:
        c = smooth(c)
    out.write_text(emit(c))
    _print({"out": str(out), "format": "nnf", "report": check_structure(c).to_dict()})
    return EXIT_OK


def cmd_query(args) -> int:
    param = _param(args)
    if args.circuit:
        c = load_circuit(args.circuit)
        p = load_probs(args.probs, c.vars)
        res = answer_circuit(c, p, args.kind, param)
        vars = c.vars
    else:
        t = load_theory(args.theory)
        p = load_probs(args.probs, t.vars)
        res = answer(t, p, args.kind, param, trim=not args.no_trim)
        vars = t.vars
    _print(result_json(res, vars, args.log_base))
    return EXIT_OK


def cmd_check(args) -> int:
    c = load_circuit(args.circuit)
    _print(check_structure(c).to_dict())
    return EXIT_OK


def cmd_oracle(args) -> int:
    param = _param(args)
    t = load_theory(args.theory)
    p = load_probs(args.probs, t.vars)
    res = oracle.oracle_query(t, p, args.kind, param, cap=args.cap)
    _print(result_json(res, t.vars, args.log_base))
    return EXIT_OK


def _query_flags(sp):
    sp.add_argument("kind", choices=[k.value for k in QueryKind])
    sp.add_argument("--probs", required=True, help="JSON file {\"probs\": {name: p}}")
    sp.add_argument("--k", type=int, help="number of states for top-k")
    sp.add_argument("--threshold", type=float, help="minimum probability for thresh")
    sp.add_argument("--log-base", choices=["e", "2"], default="e", help="entropy unit (default nats)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nesykc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("compile", help="compile a theory to a circuit (or a 2-Horn CNF for hierarchies)")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-trim", action="store_true", help="keep cells that can only fail")
    sp.add_argument("--smooth", action="store_true", help="smooth the circuit before writing it")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("query", help="answer a probabilistic query")
    _query_flags(sp)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit")
    src.add_argument("--theory")
    sp.add_argument("--no-trim", action="store_true")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("check", help="print the structural report of a circuit")
    sp.add_argument("--circuit", required=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("oracle", help="answer a query by exhaustive enumeration")
    _query_flags(sp)
    sp.add_argument("--theory", required=True)
    sp.add_argument("--cap", type=int, default=None, help="variable cap (default $NESYKC_ORACLE_CAP or 25)")
    sp.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IntractableError, StructureError) as exc:
        code, msg = EXIT_INTRACTABLE, f"intractable: {exc}"
    except UnsatisfiableError as exc:
        code, msg = EXIT_UNSAT, f"unsatisfiable: {exc}"
    except OracleCapError as exc:
        code, msg = EXIT_CAP, f"oracle cap: {exc}"
    except (TheoryError, CircuitFormatError, OSError, json.JSONDecodeError) as exc:
        code, msg = EXIT_BAD_INPUT, f"bad input: {exc}"
    sys.stderr.write(f"nesykc: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
