import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nesykc import kernels, set_backend, use_backend
from nesykc.circuit import CircuitBuilder, smooth
from nesykc.core import ProbabilityVector, VariableSet
from nesykc.oracle import state_chunks
from randcirc import random_dnnf


def run_all(c, p, bits):
    return {
        "pqe": kernels.pqe_pass(c, p.p, 1 - p.p),
        "eqe": kernels.eqe_pass(c, p.log_pos, p.log_neg),
        "max": kernels.maxsum_pass(c, p.log_pos, p.log_neg),
        "eval": kernels.eval_pass(c, bits),
        "reach": kernels.reachable(c.offsets, c.children, c.root),
        "heights": kernels.heights(c.kind, c.offsets, c.children),
    }


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 9))
def test_backends_agree(seed, k):
    c = smooth(random_dnnf(seed, k, det=seed % 2 == 0))
    rs = np.random.default_rng(seed)
    p = ProbabilityVector(c.vars, rs.uniform(0.05, 0.95, k))
    bits = next(state_chunks(k))
    with use_backend("numba"):
        a = run_all(c, p, bits)
    with use_backend("numpy"):
        b = run_all(c, p, bits)
    np.testing.assert_allclose(a["pqe"], b["pqe"], rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(a["max"], b["max"], rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(a["eqe"][0], b["eqe"][0], rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(a["eqe"][1], b["eqe"][1], rtol=1e-9, atol=1e-12)
    assert np.array_equal(a["eval"], b["eval"])
    assert np.array_equal(a["reach"], b["reach"])
    assert np.array_equal(a["heights"], b["heights"])


def test_pqe_pass_of_tautology_is_one(backend):
    vs = VariableSet.default(6)
    p = ProbabilityVector(vs, np.full(6, 0.3))
    b = CircuitBuilder(vs)
    taut = b.build(b.conj([b.disj([b.literal(v), b.literal(v, False)]) for v in range(6)]))
    assert kernels.pqe_pass(taut, p.p, 1 - p.p)[-1] == pytest.approx(1.0, abs=1e-15)


def test_eval_pass_shape(backend):
    c = random_dnnf(3, 4)
    out = kernels.eval_pass(c, np.zeros((5, 4), dtype=np.uint8))
    assert out.shape == (5,) and out.dtype == np.bool_


@pytest.mark.parametrize(
    "env,expected",
    [({"NESYKC_BACKEND": "numpy"}, "numpy"), ({"NESYKC_DISABLE_NUMBA": "1"}, "numpy"), ({"NESYKC_BACKEND": "numba"}, "numba")],
)
def test_backend_env_flags(env, expected):
    code = "from nesykc import get_backend; print(get_backend())"
    clean = {k: v for k, v in os.environ.items() if not k.startswith("NESYKC_")}
    out = subprocess.run([sys.executable, "-c", code], env={**clean, **env}, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        set_backend("cuda")
