"""Per-category bilinear interference model.

For every stack category C, the co-run value of application i next to j is

    C_smt(i, j) = alpha + beta * C_st(i) + gamma * C_st(j) + rho * C_st(i) * C_st(j)

where ``C_st`` are isolated-execution values.  The forward direction predicts
co-run stacks (and from them slowdowns); the inverse direction recovers
isolated stacks from a co-running pair's measurements.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from synpa import kernels
from synpa.errors import FitError, SchemaError
from synpa.stacks import (
    DEFAULT_DISPATCH_WIDTH,
    AppId,
    Category,
    CounterSample,
    IscStack,
    StackKind,
    StackPolicy,
    sample_to_stack,
)

SCHEMA_VERSION = 1
DEFAULT_SLOWDOWN_CAP = 100.0
TERMS = ("alpha", "beta", "gamma", "rho")


@dataclass(frozen=True)
class CategoryModel:
    category: Category
    alpha: float
    beta: float
    gamma: float
    rho: float
    mse: float = 0.0

    def __post_init__(self):
        for name in TERMS:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{self.category.value}: {name} is not finite")
        if not (self.mse >= 0.0):
            raise ValueError(f"{self.category.value}: mse must be >= 0")

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.rho)


def predict_smt_category(model: CategoryModel, c_st_i: float, c_st_j: float,
                         clamp: bool = True) -> float:
    v = (model.alpha + model.beta * c_st_i + model.gamma * c_st_j
         + model.rho * c_st_i * c_st_j)
    if clamp:
        v = min(max(v, 0.0), 1.0)
    return v


@dataclass(frozen=True)
class RegressionModel:
    kind: StackKind
    categories: tuple[CategoryModel, ...]
    training_meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        want = self.kind.categories
        have = tuple(c.category for c in self.categories)
        if sorted(have) != sorted(want) or len(have) != len(want):
            raise ValueError(
                f"{self.kind.value} model needs exactly one model per category "
                f"{[c.value for c in want]}, got {[c.value for c in have]}")
        # store in canonical category order
        order = {c: i for i, c in enumerate(want)}
        object.__setattr__(self, "categories",
                           tuple(sorted(self.categories, key=lambda m: order[m.category])))

    def __getitem__(self, category: Category) -> CategoryModel:
        for m in self.categories:
            if m.category is category:
                return m
        raise KeyError(category)

    def __eq__(self, other):
        if not isinstance(other, RegressionModel):
            return NotImplemented
        return (self.kind is other.kind and self.categories == other.categories
                and dict(self.training_meta) == dict(other.training_meta))

    __hash__ = None


def _make_model(kind: StackKind, rows: Mapping[Category, Sequence[float]],
                **meta) -> RegressionModel:
    return RegressionModel(
        kind,
        tuple(CategoryModel(c, *rows[c]) for c in kind.categories),
        dict(meta),
    )


# Reference coefficients for the three- and four-category
# variants, as (alpha, beta, gamma, rho).
REFERENCE_COEFFICIENTS: dict[str, dict[Category, tuple[float, float, float, float]]] = {
    "SYNPA3_N": {
        Category.DISPATCH: (0.0072, 0.9060, 0.0044, 0.0314),
        Category.FRONTEND: (0.2376, 1.4111, 0.0, 0.0),
        Category.BACKEND: (0.2069, 0.3431, 1.4391, 0.0),
    },
    "SYNPA4_N": {
        Category.DISPATCH: (0.0070, 0.9090, 0.0021, 0.0312),
        Category.FRONTEND: (0.2358, 1.4147, 0.0, 0.0),
        Category.BACKEND: (0.0, 0.2401, 1.0654, 0.0),
        Category.HORIZONTAL_WASTE: (0.2899, 0.3306, 1.6111, 0.0),
    },
}


def reference_model(name: str) -> RegressionModel:
    rows = REFERENCE_COEFFICIENTS[name]
    kind = StackKind.ISC3 if len(rows) == 3 else StackKind.ISC4
    return _make_model(kind, rows, source=f"reference:{name}")


def identity_model(kind: StackKind) -> RegressionModel:
    """Model whose co-run prediction equals the isolated value."""
    return _make_model(kind, {c: (0.0, 1.0, 0.0, 0.0) for c in kind.categories},
                       source="identity")


def _stack_values(stack, kind: StackKind) -> tuple[float, ...]:
    if isinstance(stack, IscStack):
        if stack.kind is not kind:
            raise ValueError(f"stack kind {stack.kind.value} does not match model {kind.value}")
        return stack.values()
    vals = tuple(float(v) for v in stack)
    if len(vals) != len(kind.categories):
        raise ValueError(f"expected {len(kind.categories)} category values, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class PairPrediction:
    """Predicted co-run category values and slowdowns for an application pair."""

    smt_i: tuple[float, ...]
    smt_j: tuple[float, ...]
    slowdown_i: float
    slowdown_j: float

    @property
    def weight(self) -> float:
        return self.slowdown_i + self.slowdown_j


def slowdown(dispatch_st: float, dispatch_smt: float,
             cap: float = DEFAULT_SLOWDOWN_CAP) -> float:
    """Isolated over co-run dispatch fraction; ``cap`` when the latter is 0."""
    if dispatch_smt <= 0.0:
        return cap
    return min(dispatch_st / dispatch_smt, cap)


SLOWDOWN_BASES = ("dispatch", "stack")


def predicted_slowdown(st_values: Sequence[float], smt_values: Sequence[float],
                       basis: str = "dispatch", cap: float = DEFAULT_SLOWDOWN_CAP) -> float:
    """Slowdown from an isolated stack and its predicted co-run stack.

    ``dispatch`` divides by the predicted dispatch value as is; ``stack``
    first rescales the predicted co-run stack to sum to one.
    """
    if basis == "dispatch":
        return slowdown(st_values[0], smt_values[0], cap)
    if basis != "stack":
        raise ValueError(f"unknown slowdown basis {basis!r}; choose from {SLOWDOWN_BASES}")
    total = sum(smt_values)
    if total <= 0.0:
        return cap
    return slowdown(st_values[0], smt_values[0] / total, cap)


def predict_pair(model: RegressionModel, st_i, st_j, *,
                 slowdown_cap: float = DEFAULT_SLOWDOWN_CAP,
                 clamp: bool = True, slowdown_basis: str = "dispatch") -> PairPrediction:
    xi = _stack_values(st_i, model.kind)
    xj = _stack_values(st_j, model.kind)
    smt_i = tuple(predict_smt_category(m, a, b, clamp) for m, a, b in zip(model.categories, xi, xj))
    smt_j = tuple(predict_smt_category(m, b, a, clamp) for m, a, b in zip(model.categories, xi, xj))
    return PairPrediction(smt_i, smt_j,
                          predicted_slowdown(xi, smt_i, slowdown_basis, slowdown_cap),
                          predicted_slowdown(xj, smt_j, slowdown_basis, slowdown_cap))


@dataclass(frozen=True)
class Inversion:
    """Isolated-stack estimates recovered from a co-running pair.

    ``raw_i``/``raw_j`` hold the per-category solutions before clamping and
    normalisation.  ``flagged`` is set when some category had no solution; in
    that case ``st_i``/``st_j`` are the measured co-run stacks.
    """

    st_i: IscStack
    st_j: IscStack
    raw_i: tuple[float, ...]
    raw_j: tuple[float, ...]
    flagged: bool = False
    failed_categories: tuple[Category, ...] = ()


def _normalized(kind, values):
    vals = [min(max(v, 0.0), 1.0) for v in values]
    total = sum(vals)
    if total <= 0.0:
        return None
    return IscStack.from_values(kind, [v / total for v in vals])


def _as_stack(kind, values):
    stack = _normalized(kind, values)
    if stack is None:
        raise ValueError("measured stack has no positive category")
    return stack


def invert_to_st(model: RegressionModel, smt_i, smt_j, *,
                 tol: float = 1e-9, max_iter: int = 100) -> Inversion:
    """Recover the isolated stacks of two applications sharing a core."""
    kind = model.kind
    mi = _stack_values(smt_i, kind)
    mj = _stack_values(smt_j, kind)
    raw_i, raw_j, failed = [], [], []
    for m, a, b in zip(model.categories, mi, mj):
        x, y, ok = kernels.invert_category(m.alpha, m.beta, m.gamma, m.rho, a, b, tol, max_iter)
        if not ok:
            failed.append(m.category)
        raw_i.append(x)
        raw_j.append(y)
    st_i = st_j = None
    if not failed:
        st_i = _normalized(kind, raw_i)
        st_j = _normalized(kind, raw_j)
    if st_i is None or st_j is None:
        return Inversion(_as_stack(kind, mi), _as_stack(kind, mj), tuple(raw_i),
                         tuple(raw_j), True, tuple(failed))
    return Inversion(st_i, st_j, tuple(raw_i), tuple(raw_j))


@dataclass(frozen=True)
class TrainingPair:
    """Isolated stacks of i and j matched with i's stack while co-running with j."""

    st_stack_i: IscStack
    st_stack_j: IscStack
    smt_stack_i: IscStack
    app_i: AppId = None
    app_j: AppId = None
    quantum_st_i: int = -1
    quantum_st_j: int = -1
    quantum_smt: int = -1

    def __post_init__(self):
        kinds = {self.st_stack_i.kind, self.st_stack_j.kind, self.smt_stack_i.kind}
        if len(kinds) != 1:
            raise ValueError("training pair stacks must share one kind")


def _design(x, y):
    return np.column_stack([np.ones_like(x), x, y, x * y])


def _lstsq(X, m, active):
    coef = np.zeros(4)
    if active:
        sol, *_ = np.linalg.lstsq(X[:, active], m, rcond=None)
        coef[active] = sol
    resid = m - X @ coef
    return coef, float(np.mean(resid * resid))


def fit_category(category: Category, x, y, m, *, prune: bool = False,
                 prune_threshold: float = 1e-4) -> CategoryModel:
    """Least-squares fit of one category on the design ``[1, x, y, x*y]``.

    With ``prune``, terms are zeroed one at a time (cheapest first) while
    the MSE stays within ``prune_threshold`` of the full fit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.asarray(m, dtype=float)
    X = _design(x, y)
    if len(m) < 4 or np.linalg.matrix_rank(X) < 4:
        raise FitError(
            f"design matrix for category {category.value} is rank deficient "
            f"({len(m)} samples)", category)
    coef, mse = _lstsq(X, m, [0, 1, 2, 3])
    if prune:
        full_mse = mse
        active = [0, 1, 2, 3]
        while len(active) > 1:
            trials = []
            for t in active:
                rest = [a for a in active if a != t]
                c, e = _lstsq(X, m, rest)
                trials.append((e, t, c))
            e, t, c = min(trials, key=lambda r: (r[0], r[1]))
            if e - full_mse >= prune_threshold:
                break
            active.remove(t)
            coef, mse = c, e
    return CategoryModel(category, *(float(v) for v in coef), mse=mse)


def fit(kind: StackKind, training_pairs: Sequence[TrainingPair], *,
        prune: bool = False, prune_threshold: float = 1e-4,
        training_meta: Mapping[str, Any] | None = None) -> RegressionModel:
    pairs = list(training_pairs)
    if not pairs:
        raise FitError("no training pairs")
    for p in pairs:
        if p.smt_stack_i.kind is not kind:
            raise ValueError(f"training pair of kind {p.smt_stack_i.kind.value}, expected {kind.value}")
    xi = np.array([p.st_stack_i.values() for p in pairs])
    xj = np.array([p.st_stack_j.values() for p in pairs])
    ms = np.array([p.smt_stack_i.values() for p in pairs])
    cats = tuple(
        fit_category(c, xi[:, k], xj[:, k], ms[:, k], prune=prune,
                     prune_threshold=prune_threshold)
        for k, c in enumerate(kind.categories))
    meta = {"pairs": len(pairs), "prune": prune}
    if prune:
        meta["prune_threshold"] = prune_threshold
    meta.update(training_meta or {})
    return RegressionModel(kind, cats, meta)


def map_quanta(st_cumulative: Sequence[float], smt_cumulative: Sequence[float]) -> list[int | None]:
    """For each co-run cumulative count, the isolated quantum whose interval holds it.

    Quantum k covers ``(cum[k-1], cum[k]]``; counts past the isolated
    profile's end map to ``None``.
    """
    out: list[int | None] = []
    last = len(st_cumulative)
    for c in smt_cumulative:
        k = bisect.bisect_left(st_cumulative, c)
        out.append(k if k < last else None)
    return out


def _cumulative(samples: Sequence[CounterSample]) -> list[int]:
    total = 0
    out = []
    for s in samples:
        total += s.inst_retired
        out.append(total)
    return out


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[TrainingPair, ...]
    dropped: int


def align_st_smt_profiles(st_profiles: Mapping[AppId, Sequence[CounterSample]],
                          smt_profiles: Mapping[AppId, Sequence[CounterSample]],
                          policy: StackPolicy,
                          dispatch_width: int = DEFAULT_DISPATCH_WIDTH) -> Alignment:
    """Build training pairs from one co-run profile and both isolated profiles.

    ``smt_profiles`` holds the per-quantum samples of exactly two
    applications run together on one core; each co-run quantum is mapped to
    the isolated quantum reached by the same committed-instruction count.
    One training pair is produced per application and co-run quantum.
    """
    apps = list(smt_profiles)
    if len(apps) != 2:
        raise ValueError("a co-run profile must contain exactly two applications")
    a, b = apps
    if len(smt_profiles[a]) != len(smt_profiles[b]):
        raise ValueError("co-run profiles of the pair differ in length")
    st_stacks = {app: [sample_to_stack(s, policy, dispatch_width) for s in st_profiles[app]]
                 for app in apps}
    idx = {app: map_quanta(_cumulative(st_profiles[app]), _cumulative(smt_profiles[app]))
           for app in apps}
    pairs = []
    dropped = 0
    for q in range(len(smt_profiles[a])):
        for i, j in ((a, b), (b, a)):
            ki, kj = idx[i][q], idx[j][q]
            if ki is None or kj is None:
                dropped += 1
                continue
            pairs.append(TrainingPair(
                st_stacks[i][ki], st_stacks[j][kj],
                sample_to_stack(smt_profiles[i][q], policy, dispatch_width),
                app_i=i, app_j=j, quantum_st_i=ki, quantum_st_j=kj, quantum_smt=q))
    return Alignment(tuple(pairs), dropped)


def sample_pairs(pairs: Sequence[TrainingPair], fraction: float,
                 rng: np.random.Generator) -> list[TrainingPair]:
    """Seeded random subset of training pairs, order preserved."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("subset fraction must be in (0, 1]")
    n = len(pairs)
    k = max(1, int(round(fraction * n))) if n else 0
    keep = np.sort(rng.choice(n, size=k, replace=False)) if k else []
    return [pairs[i] for i in keep]


# -- persistence -------------------------------------------------------------

def model_to_dict(model: RegressionModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": model.kind.value,
        "categories": {
            m.category.value: {"alpha": m.alpha, "beta": m.beta, "gamma": m.gamma,
                               "rho": m.rho, "mse": m.mse}
            for m in model.categories
        },
        "training_meta": dict(model.training_meta),
    }


def model_from_dict(data: Mapping[str, Any]) -> RegressionModel:
    if not isinstance(data, Mapping):
        raise SchemaError("model file must hold a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported model schema_version {version!r} "
                          f"(this build reads version {SCHEMA_VERSION})")
    try:
        kind = StackKind(data["kind"])
    except (KeyError, ValueError):
        raise SchemaError(f"missing or unknown model kind {data.get('kind')!r}") from None
    cats = data.get("categories")
    if not isinstance(cats, Mapping):
        raise SchemaError("model file has no categories object")
    models = []
    for c in kind.categories:
        if c.value not in cats:
            raise SchemaError(f"model file lacks category {c.value!r}")
        row = cats[c.value]
        try:
            models.append(CategoryModel(c, *(float(row[t]) for t in TERMS),
                                        mse=float(row.get("mse", 0.0))))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"category {c.value!r}: {exc}") from None
    extra = set(cats) - {c.value for c in kind.categories}
    if extra:
        raise SchemaError(f"unexpected categories for {kind.value}: {sorted(extra)}")
    return RegressionModel(kind, tuple(models), dict(data.get("training_meta", {})))


def save_model(model: RegressionModel, path) -> None:
    text = json.dumps(model_to_dict(model), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path) -> RegressionModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed model file ({exc})") from None
    return model_from_dict(data)


def iter_stack_values(stacks: Iterable[IscStack]) -> np.ndarray:
    return np.array([s.values() for s in stacks])
