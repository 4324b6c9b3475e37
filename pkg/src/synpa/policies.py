"""Thread-to-core allocation policies.

Each policy turns the counter samples of the quantum that just ended into the
pairing used for the next quantum.  ``Scheduler`` objects wrap the pure
``*_decide`` functions and carry the previous schedule between quanta.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from synpa import kernels
from synpa.errors import ConfigError
from synpa.matching import PairGraph, min_weight_perfect_matching
from synpa.model import (
    DEFAULT_SLOWDOWN_CAP,
    SLOWDOWN_BASES,
    RegressionModel,
    invert_to_st,
)
from synpa.stacks import (
    DEFAULT_DISPATCH_WIDTH,
    AppId,
    CounterSample,
    Gt100,
    IscStack,
    Lt100,
    StackPolicy,
    sample_to_stack,
)


class Policy(str, enum.Enum):
    SYNPA3_N = "SYNPA3_N"
    SYNPA4_N = "SYNPA4_N"
    SYNPA4_R_FE = "SYNPA4_R_FE"
    SYNPA4_R_FEBE = "SYNPA4_R_FEBE"
    HY_SCHED = "HY_SCHED"
    RANDOM_BASELINE = "RANDOM_BASELINE"
    # needs the simulator's hidden ground truth
    ORACLE = "ORACLE"

    @property
    def is_synpa(self) -> bool:
        return self in SYNPA_STACK_POLICIES


SYNPA_STACK_POLICIES: dict[Policy, StackPolicy] = {
    Policy.SYNPA3_N: StackPolicy(Lt100.A_BE, Gt100.NORMALIZE),
    Policy.SYNPA4_N: StackPolicy(Lt100.ISC4, Gt100.NORMALIZE),
    Policy.SYNPA4_R_FE: StackPolicy(Lt100.ISC4, Gt100.REDUCE_FE),
    Policy.SYNPA4_R_FEBE: StackPolicy(Lt100.ISC4, Gt100.REDUCE_FEBE),
}

PAIR_WEIGHTS: dict[str, Callable[[float, float], float]] = {
    "sum": lambda a, b: a + b,
    "max": max,
    "product": lambda a, b: a * b,
}


@dataclass(frozen=True)
class PolicyConfig:
    policy: Policy
    model: RegressionModel | None = None
    stack_policy: StackPolicy | None = None
    quantum_ms: float = 100.0
    dispatch_width: int = DEFAULT_DISPATCH_WIDTH
    slowdown_cap: float = DEFAULT_SLOWDOWN_CAP
    pair_weight: str = "sum"
    slowdown_basis: str = "stack"

    def __post_init__(self):
        policy = Policy(self.policy)
        object.__setattr__(self, "policy", policy)
        if self.pair_weight not in PAIR_WEIGHTS:
            raise ConfigError(f"unknown pair_weight {self.pair_weight!r}; "
                              f"choose from {sorted(PAIR_WEIGHTS)}")
        if self.slowdown_basis not in SLOWDOWN_BASES:
            raise ConfigError(f"unknown slowdown_basis {self.slowdown_basis!r}; "
                              f"choose from {list(SLOWDOWN_BASES)}")
        if self.quantum_ms <= 0 or self.dispatch_width < 1 or self.slowdown_cap <= 0:
            raise ConfigError("quantum_ms, dispatch_width and slowdown_cap must be positive")
        if not policy.is_synpa:
            return
        expected = SYNPA_STACK_POLICIES[policy]
        sp = self.stack_policy
        if sp is None:
            object.__setattr__(self, "stack_policy", expected)
        elif (sp.lt100, sp.gt100) != (expected.lt100, expected.gt100):
            raise ConfigError(f"{policy.value} requires stack method "
                              f"({expected.lt100.value}, {expected.gt100.value})")
        if self.model is None:
            raise ConfigError(f"{policy.value} needs a regression model")
        if self.model.kind is not expected.kind:
            raise ConfigError(f"{policy.value} needs a {expected.kind.value} model, "
                              f"got {self.model.kind.value}")


@dataclass(frozen=True)
class Schedule:
    assignments: tuple[tuple[int, AppId, AppId], ...]
    quantum_index: int = 0

    def __post_init__(self):
        seen = set()
        cores = set()
        for core, a, b in self.assignments:
            if core in cores:
                raise ValueError(f"core {core} assigned twice")
            cores.add(core)
            for app in (a, b):
                if app in seen:
                    raise ValueError(f"app {app!r} scheduled twice")
                seen.add(app)

    @property
    def pairs(self) -> tuple[tuple[AppId, AppId], ...]:
        return tuple((a, b) for _, a, b in self.assignments)

    def pair_set(self) -> frozenset[frozenset]:
        return frozenset(frozenset(p) for p in self.pairs)

    def apps(self) -> list[AppId]:
        return sorted(app for _, a, b in self.assignments for app in (a, b))

    def core_of(self, app: AppId) -> int:
        for core, a, b in self.assignments:
            if app in (a, b):
                return core
        raise KeyError(app)


def make_schedule(pairs, quantum_index: int = 0, cores: Sequence[int] | None = None,
                  fixed: Sequence[tuple[int, AppId, AppId]] = ()) -> Schedule:
    """Canonical schedule: pairs sorted, given to ``cores`` in ascending order."""
    canon = sorted(tuple(sorted(p)) for p in pairs)
    if cores is None:
        cores = range(len(canon))
    cores = sorted(cores)
    if len(cores) < len(canon):
        raise ValueError("more pairs than cores")
    assignments = [(c, a, b) for c, (a, b) in zip(cores, canon)] + list(fixed)
    return Schedule(tuple(sorted(assignments)), quantum_index)


def _require_even(apps):
    if len(apps) % 2:
        raise ValueError(f"an even number of applications is required, got {len(apps)}")


# -- SYNPA -------------------------------------------------------------------

@dataclass(frozen=True)
class SynpaEstimate:
    """Isolated-stack estimates inferred from one quantum of co-run samples."""

    st_stacks: Mapping[AppId, IscStack]
    flagged: frozenset
    frozen: tuple[tuple[int, AppId, AppId], ...]


def estimate_st_stacks(config: PolicyConfig, observations: Mapping[AppId, CounterSample],
                       current: Schedule) -> SynpaEstimate:
    """Step one of the pipeline: counters to stacks, then the inverse model.

    Pairs with a missing sample keep their core and are left out.
    """
    estimates = {}
    flagged = set()
    frozen = []
    for core, a, b in current.assignments:
        sa, sb = observations.get(a), observations.get(b)
        if sa is None or sb is None or sa.cpu_cycles <= 0 or sb.cpu_cycles <= 0:
            frozen.append((core, a, b))
            continue
        smt_a = sample_to_stack(sa, config.stack_policy, config.dispatch_width)
        smt_b = sample_to_stack(sb, config.stack_policy, config.dispatch_width)
        inv = invert_to_st(config.model, smt_a, smt_b)
        if inv.flagged:
            flagged.update((a, b))
        estimates[a] = inv.st_i
        estimates[b] = inv.st_j
    return SynpaEstimate(estimates, frozenset(flagged), tuple(frozen))


def pair_weight_graph(model: RegressionModel, st_stacks: Sequence[IscStack], *,
                      slowdown_cap: float = DEFAULT_SLOWDOWN_CAP,
                      pair_weight: str = "sum", slowdown_basis: str = "stack") -> PairGraph:
    """Predicted combined slowdown for every unordered pair of applications."""
    if slowdown_basis == "dispatch":
        dm = model.categories[0]
        slow = kernels.slowdown_matrix(dm.alpha, dm.beta, dm.gamma, dm.rho,
                                       [s.dispatch for s in st_stacks], slowdown_cap, True)
    else:
        slow = kernels.stack_slowdown_matrix([m.coefficients for m in model.categories],
                                             [s.values() for s in st_stacks], slowdown_cap, True)
    combine = PAIR_WEIGHTS[pair_weight]
    return PairGraph.from_function(len(st_stacks), lambda i, j: combine(slow[i][j], slow[j][i]))


def best_pairing(graph: PairGraph, apps: Sequence[AppId]) -> list[tuple[AppId, AppId]]:
    m = min_weight_perfect_matching(graph)
    return [(apps[i], apps[j]) for i, j in m.pairs]


def synpa_decide(config: PolicyConfig, observations: Mapping[AppId, CounterSample],
                 current: Schedule) -> Schedule:
    est = estimate_st_stacks(config, observations, current)
    apps = sorted(est.st_stacks)
    free_cores = [core for core, a, b in current.assignments if a in est.st_stacks]
    nxt = current.quantum_index + 1
    if len(apps) <= 2:
        return make_schedule([tuple(apps)] if apps else [], nxt, free_cores, est.frozen)
    graph = pair_weight_graph(config.model, [est.st_stacks[a] for a in apps],
                              slowdown_cap=config.slowdown_cap, pair_weight=config.pair_weight,
                              slowdown_basis=config.slowdown_basis)
    return make_schedule(best_pairing(graph, apps), nxt, free_cores, est.frozen)


# -- Hy-Sched ----------------------------------------------------------------

class HyCategory(enum.IntEnum):
    RETIRING = 0
    BAD_SPECULATION = 1
    FRONTEND = 2
    BACKEND = 3


@dataclass(frozen=True)
class HySchedCategories:
    retiring: float
    bad_speculation: float
    frontend: float
    backend: float

    @classmethod
    def from_sample(cls, sample: CounterSample,
                    dispatch_width: int = DEFAULT_DISPATCH_WIDTH) -> HySchedCategories:
        slots = dispatch_width * sample.cpu_cycles
        if slots <= 0:
            return cls(0.0, 0.0, 0.0, 0.0)
        return cls(
            sample.inst_retired / slots,
            max(0, sample.inst_spec - sample.inst_retired) / slots,
            sample.stall_frontend / sample.cpu_cycles,
            sample.stall_backend / sample.cpu_cycles,
        )

    def dominant(self) -> HyCategory:
        vals = (self.retiring, self.bad_speculation, self.frontend, self.backend)
        # max() keeps the first of equal values
        return HyCategory(max(range(4), key=lambda k: vals[k]))


def ipc_balanced_pairs(apps: Sequence[AppId], ipc: Mapping[AppId, float]) -> list[tuple]:
    order = sorted(apps, key=lambda a: (-ipc[a], a))
    half = len(order) // 2
    return [(order[k], order[-1 - k]) for k in range(half)]


def hysched_pairs(categories: Mapping[AppId, HyCategory],
                  ipc: Mapping[AppId, float]) -> list[tuple[AppId, AppId]]:
    """Pair applications of different dominant categories.

    Repeatedly take the lowest-id application of the rarest category and pair
    it with the lowest-id application of the most populous other category.
    This always finds a cross-category pairing when one exists.  Whatever is
    left (all in a single category) is paired by IPC balancing.
    """
    _require_even(categories)
    groups: dict[HyCategory, list] = {c: [] for c in HyCategory}
    for app in sorted(categories):
        groups[categories[app]].append(app)
    pairs = []
    while True:
        live = [c for c in HyCategory if groups[c]]
        if len(live) < 2:
            break
        rare = min(live, key=lambda c: (len(groups[c]), c))
        other = max((c for c in live if c is not rare), key=lambda c: (len(groups[c]), -c))
        pairs.append((groups[rare].pop(0), groups[other].pop(0)))
    rest = [a for c in HyCategory for a in groups[c]]
    return pairs + ipc_balanced_pairs(rest, ipc)


def hysched_decide(observations: Mapping[AppId, CounterSample], quantum_index: int = 0,
                   dispatch_width: int = DEFAULT_DISPATCH_WIDTH) -> Schedule:
    cats = {a: HySchedCategories.from_sample(s, dispatch_width).dominant()
            for a, s in observations.items()}
    ipc = {a: s.ipc for a, s in observations.items()}
    return make_schedule(hysched_pairs(cats, ipc), quantum_index)


# -- random baseline ---------------------------------------------------------

def random_baseline_decide(apps: Sequence[AppId], rng, quantum_index: int = 0) -> Schedule:
    """Uniform random perfect matching; ``rng`` is a seed or numpy Generator."""
    _require_even(apps)
    rng = np.random.default_rng(rng)
    order = sorted(apps)
    perm = rng.permutation(len(order))
    shuffled = [order[k] for k in perm]
    return make_schedule(zip(shuffled[0::2], shuffled[1::2]), quantum_index)


def initial_schedule(apps: Sequence[AppId], seed) -> Schedule:
    """Pairing for the first quantum, before any counters exist."""
    return random_baseline_decide(apps, np.random.default_rng(seed), 0)


# -- stateful wrappers -------------------------------------------------------

class Scheduler:
    """Chooses the next quantum's pairing from the last quantum's samples."""

    name: str = ""

    def decide(self, observations: Mapping[AppId, CounterSample],
               current: Schedule) -> Schedule:
        raise NotImplementedError


class SynpaScheduler(Scheduler):
    def __init__(self, config: PolicyConfig):
        self.config = config
        self.name = config.policy.value

    def decide(self, observations, current):
        return synpa_decide(self.config, observations, current)


class HySchedScheduler(Scheduler):
    name = Policy.HY_SCHED.value

    def __init__(self, dispatch_width: int = DEFAULT_DISPATCH_WIDTH):
        self.dispatch_width = dispatch_width

    def decide(self, observations, current):
        return hysched_decide(observations, current.quantum_index + 1, self.dispatch_width)


class RandomScheduler(Scheduler):
    name = Policy.RANDOM_BASELINE.value

    def __init__(self, rng):
        self.rng = np.random.default_rng(rng)

    def decide(self, observations, current):
        return random_baseline_decide(current.apps(), self.rng, current.quantum_index + 1)


@dataclass
class OracleScheduler(Scheduler):
    """Best pairing under a supplied true pair-weight function.

    ``pair_weight(a, b)`` is evaluated for the quantum about to start; the
    simulator supplies it from its hidden ground truth.
    """

    pair_weight: Callable[[AppId, AppId], float]
    name: str = field(default=Policy.ORACLE.value)

    def decide(self, observations, current):
        apps = current.apps()
        graph = PairGraph.from_function(len(apps), lambda i, j: self.pair_weight(apps[i], apps[j]))
        return make_schedule(best_pairing(graph, apps), current.quantum_index + 1)
