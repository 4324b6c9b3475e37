import pytest

from synpa import kernels

_NAMES = ("max_weight_matching", "invert_category", "slowdown_matrix", "stack_slowdown_matrix")


@pytest.fixture(params=[m.BACKEND for m in kernels.backends()])
def backend(request, monkeypatch):
    """Route every kernel call through one backend for the test's duration."""
    mod = next(m for m in kernels.backends() if m.BACKEND == request.param)
    for name in _NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return mod
