import os
import subprocess
import sys
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from diogame import _kernels_py, kernels
from diogame.exact import Power, sign_of

compiled = pytest.importorskip("diogame._kernels") if kernels.BACKEND == "cython" else None


def exact_scan(q, p, r, c):
    out = []
    for qp in range(1, q):
        ok = True
        for pi, ri in zip(p, r):
            t = qp * pi
            num = (2 * t + q) // (2 * q)
            if sign_of([F(abs(num * q - t)), -Power(qp, -ri, c * q)]) > 0:
                ok = False
                break
        if ok:
            out.append(qp)
    return out


cases = st.integers(2, 400).flatmap(
    lambda q: st.tuples(
        st.just(q),
        st.lists(st.integers(0, q - 1), min_size=2, max_size=3),
        st.sampled_from([F(1, 10), F(1, 5), F(1, 3), F(1, 100)]),
    )
)


@settings(max_examples=200, deadline=None)
@given(cases)
def test_scan_agrees_with_exact_filter(case):
    q, p, c = case
    r = [F(1, len(p))] * len(p)
    got = kernels.dominator_scan(q, p, r, c)
    assert got == _kernels_py.dominator_scan(q, p, [float(x) for x in r], float(c))
    # the float prefilter may only over-report borderline denominators
    assert set(exact_scan(q, p, r, c)) <= set(got)


@pytest.mark.skipif(compiled is None, reason="compiled kernel not built")
def test_compiled_matches_python_twin():
    import random

    rng = random.Random(0)
    for _ in range(200):
        q = rng.randint(2, 5000)
        p = [rng.randrange(q) for _ in range(2)]
        r = rng.choice([[0.5, 0.5], [2 / 3, 1 / 3], [1.0, 0.0]])
        c = rng.choice([0.1, 0.01, 1e-5])
        assert compiled.dominator_scan(q, p, r, c) == _kernels_py.dominator_scan(q, p, r, c)


def test_overflow_falls_back_to_python(monkeypatch):
    # numerators past int64 range must never reach the compiled path
    monkeypatch.setattr(kernels, "_impl", None)
    p = [2**61 + 3, 7]
    got = kernels.dominator_scan(5, p, [0.5, 0.5], 0.3)
    assert got == _kernels_py.dominator_scan(5, p, [0.5, 0.5], 0.3)


def test_pure_switch():
    env = dict(os.environ, DIOGAME_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from diogame import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
