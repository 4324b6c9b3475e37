"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``.  Prints the best of
``--repeat`` timings for each kernel on each available backend, then the
speedup of the compiled extension.
"""

from __future__ import annotations

import argparse
import contextlib
import timeit

import numpy as np

from synpa import kernels
from synpa.model import reference_model
from synpa.policies import Policy, PolicyConfig
from synpa.simulator import GroundTruthModel, contention_model, run_workload, synthesize_pool

_NAMES = ("max_weight_matching", "invert_category", "slowdown_matrix", "stack_slowdown_matrix")


@contextlib.contextmanager
def using(backend):
    saved = {n: getattr(kernels, n) for n in _NAMES}
    for n in _NAMES:
        setattr(kernels, n, getattr(backend, n))
    try:
        yield
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def _matching_case(n, seed=0):
    rng = np.random.default_rng(seed)
    w = np.triu(rng.integers(0, 2**40, size=(n, n)), 1)
    w = (w + w.T).tolist()
    return lambda: kernels.max_weight_matching(w)


def _inversion_case(count=2000, seed=1):
    model = reference_model("SYNPA4_N")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.05, 0.9, size=(count, 2)).tolist()
    rows = [m.coefficients for m in model.categories]

    def run():
        for (mi, mj), (a, b, g, r) in zip(pts, rows * (count // len(rows))):
            kernels.invert_category(a, b, g, r, mi, mj, 1e-9, 100)
    return run


def _slowdown_case(n=32, seed=2):
    model = reference_model("SYNPA4_N")
    stacks = np.random.default_rng(seed).dirichlet(np.ones(4), size=n).tolist()
    rows = [m.coefficients for m in model.categories]
    return lambda: kernels.stack_slowdown_matrix(rows, stacks, 100.0, True)


def _simulation_case():
    apps = list(synthesize_pool(8, seed=3, isolated_quanta=60).values())
    truth = GroundTruthModel(contention_model(), noise=0.02)
    cfg = PolicyConfig(Policy.SYNPA4_N, reference_model("SYNPA4_N"))
    return lambda: run_workload(apps, cfg, truth, seed=0)


CASES = {
    "matching n=8": lambda: _matching_case(8),
    "matching n=32": lambda: _matching_case(32),
    "matching n=64": lambda: _matching_case(64),
    "inversion x2000": _inversion_case,
    "slowdown matrix n=32": _slowdown_case,
    "SYNPA4_N workload run": _simulation_case,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=3)
    args = ap.parse_args(argv)

    mods = kernels.backends()
    print(f"{'case':<24}" + "".join(f"{m.BACKEND:>14}" for m in mods)
          + ("     speedup" if len(mods) > 1 else ""))
    for name, make in CASES.items():
        times = []
        for mod in mods:
            with using(mod):
                fn = make()
                best = min(timeit.repeat(fn, repeat=args.repeat, number=args.number))
            times.append(best / args.number)
        line = f"{name:<24}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) > 1:
            line += f"{times[0] / times[-1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
