import numpy as np
import pytest

from fxcluster import _kernels
from fxcluster._kernels import python_backend as py

from conftest import random_matrix

compiled = _kernels.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="Cython kernels not built")


def test_backend_name():
    assert _kernels.BACKEND in ("cython", "python")


def random_probs(rng, n, bins):
    p = rng.dirichlet(np.ones(bins), size=n) * (rng.random((n, bins)) > 0.4)
    p[:, 0] += 1e-3
    return np.ascontiguousarray(p / p.sum(axis=1, keepdims=True))


def test_python_matrix_equals_pairwise():
    rng = np.random.default_rng(0)
    p = random_probs(rng, 6, 30)
    m = py.js_matrix(p)
    for i in range(6):
        for j in range(6):
            assert m[i, j] == (0.0 if i == j else py.js_pair(p[i], p[j]))


@needs_compiled
def test_compiled_js_matches_python():
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = random_probs(rng, int(rng.integers(2, 12)), int(rng.integers(1, 200)))
        np.testing.assert_allclose(compiled.js_matrix(p), py.js_matrix(p), atol=1e-14, rtol=0)
        assert compiled.js_pair(p[0], p[1]) == compiled.js_matrix(p)[0, 1]


@needs_compiled
@pytest.mark.parametrize("method", [0, 1, 2])
def test_compiled_agglomerate_matches_python(method):
    rng = np.random.default_rng(2)
    for _ in range(30):
        d = random_matrix(rng, int(rng.integers(2, 40)))
        c_children, c_heights = compiled.agglomerate(d, method)
        p_children, p_heights = py.agglomerate(d, method)
        assert np.array_equal(c_children, p_children)
        assert np.array_equal(c_heights, p_heights)


@needs_compiled
def test_compiled_agglomerate_ties_match_python():
    d = np.round(random_matrix(np.random.default_rng(3), 15), 1)
    for method in (0, 1, 2):
        assert np.array_equal(compiled.agglomerate(d, method)[0], py.agglomerate(d, method)[0])


def test_forced_fallback_import():
    import os
    import subprocess
    import sys

    env = dict(os.environ, FXCLUSTER_PURE_PYTHON="1")
    code = "import fxcluster; print(fxcluster.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
