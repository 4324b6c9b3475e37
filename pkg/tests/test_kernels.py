import numpy as np
import pytest

from synpa import _pykernels, kernels
from synpa.model import reference_model

COMPILED = [m for m in kernels.backends() if m is not _pykernels]
needs_ext = pytest.mark.skipif(not COMPILED, reason="compiled extension not built")


def test_pure_python_always_available():
    assert kernels.backends()[0] is _pykernels
    assert kernels.BACKEND in {m.BACKEND for m in kernels.backends()}


@needs_ext
def test_matching_backends_agree():
    ext = COMPILED[0]
    rng = np.random.default_rng(0)
    for n in (2, 4, 6, 8, 16, 24):
        for _ in range(20):
            w = rng.integers(0, 1000, size=(n, n))
            w = np.triu(w, 1)
            w = (w + w.T).tolist()
            assert ext.max_weight_matching(w) == _pykernels.max_weight_matching(w)


@needs_ext
def test_inversion_backends_agree():
    ext = COMPILED[0]
    rng = np.random.default_rng(1)
    for _ in range(500):
        a, b, g, r = rng.uniform(-0.3, 1.5, 4)
        mi, mj = rng.uniform(0, 1, 2)
        got = ext.invert_category(a, b, g, r, mi, mj, 1e-9, 100)
        want = _pykernels.invert_category(a, b, g, r, mi, mj, 1e-9, 100)
        assert got[2] == want[2]
        if want[2]:
            assert got[0] == pytest.approx(want[0], abs=1e-12)
            assert got[1] == pytest.approx(want[1], abs=1e-12)


@needs_ext
@pytest.mark.parametrize("clamp", [True, False])
def test_slowdown_backends_agree(clamp):
    ext = COMPILED[0]
    model = reference_model("SYNPA4_N")
    rng = np.random.default_rng(2)
    stacks = rng.dirichlet(np.ones(4), size=10).tolist()
    coefs = [m.coefficients for m in model.categories]
    assert np.allclose(ext.stack_slowdown_matrix(coefs, stacks, 100.0, clamp),
                       _pykernels.stack_slowdown_matrix(coefs, stacks, 100.0, clamp), atol=1e-13)
    disp = [s[0] for s in stacks]
    d = model.categories[0]
    assert np.allclose(ext.slowdown_matrix(d.alpha, d.beta, d.gamma, d.rho, disp, 100.0, clamp),
                       _pykernels.slowdown_matrix(d.alpha, d.beta, d.gamma, d.rho, disp, 100.0,
                                                  clamp), atol=1e-13)


def test_slowdown_matrix_values(backend):
    disp = [0.5, 0.3]
    out = backend.slowdown_matrix(0.0072, 0.9060, 0.0044, 0.0314, disp, 100.0, True)
    assert out[0][0] == 0.0
    assert out[0][1] == pytest.approx(0.5 / 0.46623, abs=1e-4)
