"""Counter samples and instruction/stall cycle stacks.

A stack splits an application's execution cycles at the dispatch stage into
full-dispatch-equivalent cycles, frontend stalls, backend stalls and,
optionally, horizontal waste (cycles where only part of the dispatch width
was used).  The raw stack built from the five PMU events rarely sums to one;
`adjust_stack` expands or shrinks it according to a `StackPolicy`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Sequence

from synpa.errors import InvalidSampleError

DEFAULT_DISPATCH_WIDTH = 4

SUM_TOLERANCE = 1e-9
# raw sums this close to 1 are treated as exactly 1
_UNIT_TOLERANCE = 1e-12

AppId = Hashable


class Category(str, enum.Enum):
    DISPATCH = "dispatch"
    FRONTEND = "frontend"
    BACKEND = "backend"
    HORIZONTAL_WASTE = "horizontal_waste"


class StackKind(str, enum.Enum):
    ISC3 = "ISC3"
    ISC4 = "ISC4"

    @property
    def categories(self) -> tuple[Category, ...]:
        if self is StackKind.ISC3:
            return (Category.DISPATCH, Category.FRONTEND, Category.BACKEND)
        return (Category.DISPATCH, Category.FRONTEND, Category.BACKEND,
                Category.HORIZONTAL_WASTE)


class Lt100(str, enum.Enum):
    """How a stack summing to less than one is expanded."""

    A_BE = "A_BE"
    ISC4 = "ISC4"


class Gt100(str, enum.Enum):
    """How a stack summing to more than one is shrunk."""

    NORMALIZE = "NORMALIZE"
    REDUCE_FE = "REDUCE_FE"
    REDUCE_FEBE = "REDUCE_FEBE"


class AppClass(str, enum.Enum):
    FRONTEND_BOUND = "FrontendBound"
    BACKEND_BOUND = "BackendBound"
    OTHER = "Other"


@dataclass(frozen=True)
class CounterSample:
    """Raw PMU event counts of one application over one quantum."""

    cpu_cycles: int
    stall_frontend: int
    stall_backend: int
    inst_retired: int
    inst_spec: int
    app_id: AppId = 0
    quantum_index: int = 0
    core_id: int = -1

    def __post_init__(self):
        for name in ("cpu_cycles", "stall_frontend", "stall_backend",
                     "inst_retired", "inst_spec"):
            if getattr(self, name) < 0:
                raise InvalidSampleError(f"{name} is negative for app {self.app_id!r}")

    @property
    def ipc(self) -> float:
        return self.inst_retired / self.cpu_cycles if self.cpu_cycles else 0.0


@dataclass(frozen=True)
class RawStack:
    dispatch: float
    frontend: float
    backend: float

    @property
    def sum(self) -> float:
        return self.dispatch + self.frontend + self.backend


@dataclass(frozen=True)
class IscStack:
    """A stack whose categories are fractions summing to one."""

    kind: StackKind
    dispatch: float
    frontend: float
    backend: float
    horizontal_waste: float = 0.0

    def __post_init__(self):
        vals = (self.dispatch, self.frontend, self.backend, self.horizontal_waste)
        for v in vals:
            if not (-SUM_TOLERANCE <= v <= 1.0 + SUM_TOLERANCE):
                raise ValueError(f"stack category out of [0, 1]: {vals}")
        if self.kind is StackKind.ISC3 and self.horizontal_waste != 0.0:
            raise ValueError("ISC3 stacks carry no horizontal waste")
        if abs(sum(vals) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"stack sums to {sum(vals)!r}, not 1")

    def values(self) -> tuple[float, ...]:
        """Category values in the order of ``kind.categories``."""
        if self.kind is StackKind.ISC3:
            return (self.dispatch, self.frontend, self.backend)
        return (self.dispatch, self.frontend, self.backend, self.horizontal_waste)

    def get(self, category: Category) -> float:
        return getattr(self, category.value)

    @classmethod
    def from_values(cls, kind: StackKind, values: Sequence[float]) -> IscStack:
        if len(values) != len(kind.categories):
            raise ValueError(f"{kind.value} stacks have {len(kind.categories)} categories")
        return cls(kind, *values)


_SYNPA_ROWS = {
    (Lt100.A_BE, Gt100.NORMALIZE),
    (Lt100.ISC4, Gt100.NORMALIZE),
    (Lt100.ISC4, Gt100.REDUCE_FE),
    (Lt100.ISC4, Gt100.REDUCE_FEBE),
}


@dataclass(frozen=True)
class StackPolicy:
    lt100: Lt100
    gt100: Gt100
    # "weighted" splits a GT100 excess by frontend/backend magnitude,
    # "equal" removes half from each
    febe_split: str = "weighted"

    def __post_init__(self):
        if (self.lt100, self.gt100) not in _SYNPA_ROWS:
            raise ValueError(
                f"no policy variant combines {self.lt100.value} with {self.gt100.value}")
        if self.febe_split not in ("weighted", "equal"):
            raise ValueError(f"unknown febe_split {self.febe_split!r}")

    @property
    def kind(self) -> StackKind:
        return StackKind.ISC4 if self.lt100 is Lt100.ISC4 else StackKind.ISC3


def build_raw_stack(sample: CounterSample,
                    dispatch_width: int = DEFAULT_DISPATCH_WIDTH) -> RawStack:
    """Convert one sample's counts into cycle fractions, without adjustment."""
    if dispatch_width < 1:
        raise ValueError("dispatch_width must be >= 1")
    cycles = sample.cpu_cycles
    if cycles <= 0:
        raise InvalidSampleError(
            f"sample for app {sample.app_id!r}, quantum {sample.quantum_index} has no cycles")
    return RawStack(
        dispatch=sample.inst_spec / (dispatch_width * cycles),
        frontend=sample.stall_frontend / cycles,
        backend=sample.stall_backend / cycles,
    )


def _finish(kind, d, fe, be, hw):
    d, fe, be, hw = (max(0.0, v) for v in (d, fe, be, hw))
    total = d + fe + be + hw
    if abs(total - 1.0) > _UNIT_TOLERANCE:
        if total <= 0.0:
            raise InvalidSampleError("stack has no positive category")
        d, fe, be, hw = d / total, fe / total, be / total, hw / total
    return IscStack(kind, d, fe, be, hw)


def _remove(excess, first, second):
    """Take ``excess`` from ``first``, spilling what does not fit into ``second``."""
    take = min(excess, first)
    first -= take
    excess -= take
    take = min(excess, second)
    return first, second - take, excess - take


def adjust_stack(raw: RawStack, policy: StackPolicy) -> IscStack:
    """Expand or shrink a raw stack so its categories sum to one."""
    d, fe, be = raw.dispatch, raw.frontend, raw.backend
    if min(d, fe, be) < 0:
        raise InvalidSampleError("raw stack has a negative category")
    kind = policy.kind
    total = raw.sum
    if abs(total - 1.0) <= _UNIT_TOLERANCE:
        return _finish(kind, d, fe, be, 0.0)
    if total < 1.0:
        missing = 1.0 - total
        if policy.lt100 is Lt100.A_BE:
            return _finish(kind, d, fe, be + missing, 0.0)
        return _finish(kind, d, fe, be, missing)

    excess = total - 1.0
    if policy.gt100 is Gt100.NORMALIZE:
        return _finish(kind, d / total, fe / total, be / total, 0.0)
    if policy.gt100 is Gt100.REDUCE_FE:
        fe, be, _ = _remove(excess, fe, be)
        return _finish(kind, d, fe, be, 0.0)
    stalls = fe + be
    if policy.febe_split == "equal":
        fe, be, left = _remove(excess / 2.0, fe, be)
        be, fe, left = _remove(excess / 2.0 + left, be, fe)
        return _finish(kind, d, fe, be, 0.0)
    if stalls <= excess:
        # dispatch alone exceeds the cycle count; clamp and renormalise
        return _finish(kind, d, 0.0, 0.0, 0.0)
    return _finish(kind, d, fe - excess * fe / stalls, be - excess * be / stalls, 0.0)


FRONTEND_BOUND_THRESHOLD = 0.35
BACKEND_BOUND_THRESHOLD = 0.65


def classify_app(stack: IscStack) -> AppClass:
    if stack.frontend > FRONTEND_BOUND_THRESHOLD:
        return AppClass.FRONTEND_BOUND
    if stack.backend > BACKEND_BOUND_THRESHOLD:
        return AppClass.BACKEND_BOUND
    return AppClass.OTHER


def sample_to_stack(sample: CounterSample, policy: StackPolicy,
                    dispatch_width: int = DEFAULT_DISPATCH_WIDTH) -> IscStack:
    return adjust_stack(build_raw_stack(sample, dispatch_width), policy)
