"""Quantum-driven simulation of a multi-core, two-way SMT processor.

A hidden ground-truth interference model turns the isolated stacks of two
co-running applications into their co-run stacks; those are converted back
into counter samples, which is all a scheduler gets to see.  Applications
advance by committed instructions, are relaunched when they reach their
target, and the run ends once every original instance has finished.
"""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from synpa.errors import ConfigError, MetricsError, SimulationError
from synpa.model import (
    DEFAULT_SLOWDOWN_CAP,
    CategoryModel,
    RegressionModel,
    TrainingPair,
    align_st_smt_profiles,
    fit,
    sample_pairs,
    slowdown,
)
from synpa.policies import (
    OracleScheduler,
    Policy,
    PolicyConfig,
    RandomScheduler,
    Schedule,
    Scheduler,
    SynpaScheduler,
    HySchedScheduler,
    initial_schedule,
)
from synpa.stacks import (
    DEFAULT_DISPATCH_WIDTH,
    AppClass,
    AppId,
    Category,
    CounterSample,
    IscStack,
    StackKind,
    StackPolicy,
    build_raw_stack,
    classify_app,
)

DEFAULT_QUANTUM_CYCLES = 200_000_000
DEFAULT_ISOLATED_QUANTA = 600


@dataclass(frozen=True)
class Phase:
    st_stack: IscStack
    st_ipc: float
    duration: float  # committed instructions

    def __post_init__(self):
        if not self.st_ipc > 0:
            raise ValueError("st_ipc must be positive")
        if not self.duration > 0:
            raise ValueError("phase duration must be positive")
        if not self.st_stack.dispatch > 0:
            raise ValueError("a phase needs a positive dispatch fraction")


@dataclass(frozen=True)
class AppGroundTruth:
    """Phase behaviour of one application; phases repeat cyclically."""

    name: str
    phases: tuple[Phase, ...]
    total_target_instructions: float

    def __post_init__(self):
        if not self.phases:
            raise ValueError(f"{self.name}: at least one phase is required")
        if not self.total_target_instructions > 0:
            raise ValueError(f"{self.name}: target must be positive")

    def phase_at(self, progress: float) -> Phase:
        if len(self.phases) == 1:
            return self.phases[0]
        period = sum(p.duration for p in self.phases)
        pos = math.fmod(progress, period)
        for p in self.phases:
            if pos < p.duration:
                return p
            pos -= p.duration
        return self.phases[-1]

    def mean_stack_values(self) -> tuple[float, ...]:
        """Instruction-weighted mean of the phase stacks."""
        total = sum(p.duration for p in self.phases)
        vals = np.zeros(len(self.phases[0].st_stack.values()))
        for p in self.phases:
            vals += np.asarray(p.st_stack.values()) * (p.duration / total)
        return tuple(float(v) for v in vals)

    def mean_stack(self) -> IscStack:
        vals = self.mean_stack_values()
        s = sum(vals)
        return IscStack.from_values(self.phases[0].st_stack.kind, [v / s for v in vals])


def isolated_instructions(phases: Sequence[Phase], quanta: int,
                          quantum_cycles: float = DEFAULT_QUANTUM_CYCLES) -> float:
    """Instructions committed by ``quanta`` quanta of isolated execution."""
    probe = AppGroundTruth("probe", tuple(phases), 1.0)
    done = 0.0
    for _ in range(quanta):
        done += probe.phase_at(done).st_ipc * quantum_cycles
    return done


@dataclass(frozen=True)
class GroundTruthModel:
    """Hidden interference model plus measurement noise.

    ``noise`` is the standard deviation of Gaussian noise added to every
    predicted co-run category (a float or a per-category mapping);
    ``counter_noise`` is the relative standard deviation of multiplicative
    jitter on the speculative-instruction and stall counts.
    """

    model: RegressionModel
    noise: float | Mapping[Category, float] = 0.0
    counter_noise: float = 0.0

    def __post_init__(self):
        if min(self.sigmas()) < 0 or self.counter_noise < 0:
            raise ConfigError("noise levels must be >= 0")

    @property
    def kind(self) -> StackKind:
        return self.model.kind

    def sigmas(self) -> tuple[float, ...]:
        if isinstance(self.noise, Mapping):
            return tuple(float(self.noise.get(c, 0.0)) for c in self.model.kind.categories)
        return (float(self.noise),) * len(self.model.kind.categories)

    def st_values(self, stack: IscStack) -> tuple[float, ...]:
        if self.kind is StackKind.ISC3 and stack.kind is StackKind.ISC4:
            return (stack.dispatch, stack.frontend, stack.backend + stack.horizontal_waste)
        if self.kind is StackKind.ISC4 and stack.kind is StackKind.ISC3:
            return stack.values() + (0.0,)
        return stack.values()

    def predict_raw(self, st_i, st_j) -> list[float]:
        out = []
        for m, x, y in zip(self.model.categories, st_i, st_j):
            v = m.alpha + m.beta * x + m.gamma * y + m.rho * x * y
            out.append(min(max(v, 0.0), 1.0))
        return out

    def smt_values(self, st_i, st_j, rng: np.random.Generator | None = None) -> list[float]:
        """True co-run stack of i next to j: prediction, noise, clamp, normalise."""
        vals = self.predict_raw(st_i, st_j)
        sig = self.sigmas()
        if rng is not None and any(sig):
            draws = rng.standard_normal(len(vals))
            vals = [max(0.0, v + s * d) for v, s, d in zip(vals, sig, draws)]
        total = sum(vals)
        if total <= 0.0:
            return [1.0 / len(vals)] * len(vals)
        return [v / total for v in vals]

    def pair_slowdowns(self, st_i, st_j, cap: float = DEFAULT_SLOWDOWN_CAP) -> tuple[float, float]:
        """Noiseless true slowdowns of i and j co-running."""
        si = self.smt_values(st_i, st_j)
        sj = self.smt_values(st_j, st_i)
        return slowdown(st_i[0], si[0], cap), slowdown(st_j[0], sj[0], cap)

    @classmethod
    def consistent(cls, kind: StackKind, beta: float = 0.7, gamma: float = 0.2,
                   alpha_shares: Sequence[float] | None = None, **kw) -> GroundTruthModel:
        """A model whose predictions always sum to one and invert exactly.

        Every category shares ``beta`` and ``gamma`` with no product term, and
        the intercepts split ``1 - beta - gamma`` by ``alpha_shares``.
        """
        cats = kind.categories
        if alpha_shares is None:
            alpha_shares = [1.0 / len(cats)] * len(cats)
        if len(alpha_shares) != len(cats) or min(alpha_shares) < 0:
            raise ConfigError("alpha_shares needs one non-negative share per category")
        if beta < 0 or gamma < 0 or beta + gamma > 1 or beta == gamma:
            raise ConfigError("need beta, gamma >= 0, beta + gamma <= 1 and beta != gamma")
        total = sum(alpha_shares)
        rest = 1.0 - beta - gamma
        model = RegressionModel(kind, tuple(
            CategoryModel(c, rest * s / total, beta, gamma, 0.0)
            for c, s in zip(cats, alpha_shares)), {"source": "consistent"})
        return cls(model, **kw)


@dataclass(frozen=True)
class SimulationConfig:
    quantum_cycles: int = DEFAULT_QUANTUM_CYCLES
    dispatch_width: int = DEFAULT_DISPATCH_WIDTH
    slowdown_cap: float = DEFAULT_SLOWDOWN_CAP
    # hard stop, as a multiple of the isolated run length
    max_quanta_factor: float = 20.0
    audit: bool = False

    def __post_init__(self):
        if self.quantum_cycles < 1 or self.dispatch_width < 1:
            raise ConfigError("quantum_cycles and dispatch_width must be >= 1")
        if self.max_quanta_factor <= 1:
            raise ConfigError("max_quanta_factor must exceed 1")


def counters_from_stack(values: Sequence[float], committed: float, cycles: int,
                        dispatch_width: int, rng: np.random.Generator | None = None,
                        counter_noise: float = 0.0, app_id: AppId = 0,
                        quantum_index: int = 0, core_id: int = -1) -> CounterSample:
    """Synthesize the counter sample whose raw stack is ``values``."""
    d, fe, be = values[0], values[1], values[2]
    spec = d * dispatch_width * cycles
    if rng is not None and counter_noise > 0:
        j = 1.0 + counter_noise * rng.standard_normal(3)
        spec, fe, be = spec * max(j[0], 0.0), fe * max(j[1], 0.0), be * max(j[2], 0.0)
    return CounterSample(
        cpu_cycles=int(cycles),
        stall_frontend=int(round(fe * cycles)),
        stall_backend=int(round(be * cycles)),
        inst_retired=int(round(committed)),
        inst_spec=int(round(spec)),
        app_id=app_id,
        quantum_index=quantum_index,
        core_id=core_id,
    )


@dataclass(frozen=True)
class QuantumOutcome:
    samples: dict
    smt_values: dict


def simulate_quantum(schedule: Schedule, phases: Mapping[AppId, Phase],
                     ground_truth: GroundTruthModel, rng: np.random.Generator | None,
                     config: SimulationConfig = SimulationConfig()) -> QuantumOutcome:
    """Counter samples of every scheduled application for one quantum.

    ``phases`` gives each application's current isolated behaviour.  The
    committed count is ``st_ipc * cycles`` divided by the dispatch slowdown.
    """
    cycles = config.quantum_cycles
    samples = {}
    smt = {}
    for core, a, b in schedule.assignments:
        pa, pb = phases[a], phases[b]
        xa, xb = ground_truth.st_values(pa.st_stack), ground_truth.st_values(pb.st_stack)
        va = ground_truth.smt_values(xa, xb, rng)
        vb = ground_truth.smt_values(xb, xa, rng)
        for app, p, x, v in ((a, pa, xa, va), (b, pb, xb, vb)):
            committed = p.st_ipc * cycles * (v[0] / x[0])
            smt[app] = v
            samples[app] = counters_from_stack(
                v, committed, cycles, config.dispatch_width, rng,
                ground_truth.counter_noise, app, schedule.quantum_index, core)
    return QuantumOutcome(samples, smt)


@dataclass
class RunResult:
    policy: str
    seed: int
    completion_times: dict
    samples: list
    schedules: list
    turnaround_time: float
    ipc_geomean: float
    horizontal_waste_series: list
    relaunches: dict = field(default_factory=dict)
    audit: list = field(default_factory=list)

    @property
    def quanta(self) -> int:
        return len(self.samples)


def horizontal_waste_fraction(samples: Mapping[AppId, CounterSample],
                              dispatch_width: int = DEFAULT_DISPATCH_WIDTH) -> float:
    """Workload-level share of cycles not covered by dispatch or stalls."""
    vals = [max(0.0, 1.0 - build_raw_stack(s, dispatch_width).sum) for s in samples.values()]
    return sum(vals) / len(vals) if vals else 0.0


def make_scheduler(policy_config: PolicyConfig, seed_seq: np.random.SeedSequence,
                   oracle_weight=None) -> Scheduler:
    p = policy_config.policy
    if p.is_synpa:
        return SynpaScheduler(policy_config)
    if p is Policy.HY_SCHED:
        return HySchedScheduler(policy_config.dispatch_width)
    if p is Policy.RANDOM_BASELINE:
        return RandomScheduler(np.random.default_rng(seed_seq))
    if p is Policy.ORACLE:
        if oracle_weight is None:
            raise ConfigError("the ORACLE policy is only available inside the simulator")
        return OracleScheduler(oracle_weight)
    raise ConfigError(f"unsupported policy {p!r}")


def run_workload(workload: Sequence[AppGroundTruth], policy_config: PolicyConfig,
                 ground_truth: GroundTruthModel, seed: int,
                 config: SimulationConfig = SimulationConfig()) -> RunResult:
    """Run a workload until every original application instance finishes.

    Applications are numbered by position.  A finished application is
    relaunched from its first phase at the next quantum.
    """
    n = len(workload)
    if n < 2 or n % 2:
        raise ConfigError(f"a workload needs an even number of applications, got {n}")
    apps = list(range(n))
    ss_noise, ss_policy = np.random.SeedSequence(seed).spawn(2)
    noise_rng = np.random.default_rng(ss_noise)

    progress = [0.0] * n
    instances = [0] * n
    relaunches = [0] * n
    completion: dict[int, float] = {}
    retired = [0] * n
    isolated = max(app.total_target_instructions
                   / (min(p.st_ipc for p in app.phases) * config.quantum_cycles)
                   for app in workload)
    max_quanta = int(math.ceil(config.max_quanta_factor * max(isolated, 1.0)))

    def current_phases():
        return {a: workload[a].phase_at(progress[a]) for a in apps}

    phases = current_phases()

    def oracle_weight(a, b):
        sa, sb = ground_truth.pair_slowdowns(ground_truth.st_values(phases[a].st_stack),
                                             ground_truth.st_values(phases[b].st_stack),
                                             config.slowdown_cap)
        return sa + sb

    scheduler = make_scheduler(policy_config, ss_policy, oracle_weight)
    schedule = initial_schedule(apps, seed)
    all_samples, schedules, hw_series, audit = [], [], [], []

    for q in range(max_quanta):
        outcome = simulate_quantum(schedule, phases, ground_truth, noise_rng, config)
        samples = outcome.samples
        all_samples.append(samples)
        schedules.append(schedule)
        hw_series.append(horizontal_waste_fraction(samples, config.dispatch_width))
        if config.audit:
            audit.append({a: phases[a].st_stack for a in apps})
        finished = []
        for a in apps:
            done = samples[a].inst_retired
            retired[a] += done
            target = workload[a].total_target_instructions
            if progress[a] + done >= target:
                if instances[a] == 0:
                    completion[a] = q + (target - progress[a]) / done
                instances[a] += 1
                finished.append(a)
                progress[a] = 0.0
            else:
                progress[a] += done
        if len(completion) == n:
            break
        for a in finished:
            relaunches[a] += 1
        phases = current_phases()
        schedule = scheduler.decide(samples, schedule)
    else:
        raise SimulationError(
            f"{policy_config.policy.value}: workload did not finish within {max_quanta} quanta")

    cycles = config.quantum_cycles * len(all_samples)
    ipcs = [retired[a] / cycles for a in apps]
    if min(ipcs) <= 0:
        raise SimulationError("an application committed no instructions")
    geomean = math.exp(math.fsum(math.log(v) for v in ipcs) / n)
    return RunResult(
        policy=policy_config.policy.value,
        seed=seed,
        completion_times=completion,
        samples=all_samples,
        schedules=schedules,
        turnaround_time=max(completion.values()),
        ipc_geomean=geomean,
        horizontal_waste_series=hw_series,
        relaunches=dict(enumerate(relaunches)),
        audit=audit,
    )


# -- metrics -----------------------------------------------------------------

DISCARD_RULES = ("literal", "none")


@dataclass(frozen=True)
class MetricsSummary:
    turnaround_times: tuple[float, ...]
    kept: tuple[bool, ...]
    mean: float
    stdev: float
    cv: float
    mean_turnaround: float
    mean_ipc_geomean: float | None

    @property
    def discarded(self) -> tuple[int, ...]:
        return tuple(k for k, keep in enumerate(self.kept) if not keep)


def discard_mask(values: Sequence[float], rule: str = "literal") -> list[bool]:
    """Which repetitions survive the variation filter.

    ``literal`` keeps t when ``|t - mean| <= 0.05 * stdev / mean`` (population
    standard deviation); ``none`` keeps everything.
    """
    if rule not in DISCARD_RULES:
        raise ConfigError(f"unknown discard rule {rule!r}; choose from {DISCARD_RULES}")
    if rule == "none" or len(set(values)) <= 1:
        return [True] * len(values)
    mu = statistics.fmean(values)
    band = 0.05 * statistics.pstdev(values) / mu
    return [abs(t - mu) <= band for t in values]


def compute_metrics(results: Sequence, rule: str = "literal") -> MetricsSummary:
    """Filter repetitions and average the survivors.

    ``results`` holds ``RunResult`` objects or plain turnaround times.
    """
    if not results:
        raise MetricsError("no repetitions to summarise")
    tts = [float(getattr(r, "turnaround_time", r)) for r in results]
    ipcs = [getattr(r, "ipc_geomean", None) for r in results]
    keep = discard_mask(tts, rule)
    if not any(keep):
        raise MetricsError(
            f"all {len(tts)} repetitions were discarded by the '{rule}' filter; "
            "run more repetitions or choose another discard rule")
    mu = statistics.fmean(tts)
    sd = statistics.pstdev(tts) if len(set(tts)) > 1 else 0.0
    kept_tt = [t for t, k in zip(tts, keep) if k]
    kept_ipc = [v for v, k in zip(ipcs, keep) if k and v is not None]
    return MetricsSummary(
        turnaround_times=tuple(tts),
        kept=tuple(keep),
        mean=mu,
        stdev=sd,
        cv=sd / mu if mu else 0.0,
        mean_turnaround=statistics.fmean(kept_tt),
        mean_ipc_geomean=statistics.fmean(kept_ipc) if kept_ipc else None,
    )


def speedup(baseline: float, value: float) -> float:
    """Turnaround speedup of ``value`` over ``baseline`` (higher is better)."""
    return baseline / value


def ccdf(series: Sequence[float], thresholds: Sequence[float] | None = None):
    """``[(t, P(series > t))]``; thresholds default to 0, 0.01, ..., 1."""
    if thresholds is None:
        thresholds = [k / 100 for k in range(101)]
    data = np.sort(np.asarray(series, dtype=float))
    n = len(data)
    out = []
    for t in thresholds:
        above = n - int(np.searchsorted(data, t, side="right")) if n else 0
        out.append((float(t), above / n if n else 0.0))
    return out


# -- profiling and training --------------------------------------------------

def profile_isolated(app: AppGroundTruth, ground_truth: GroundTruthModel, quanta: int,
                     rng: np.random.Generator | None = None,
                     config: SimulationConfig = SimulationConfig(),
                     app_id: AppId = 0) -> list[CounterSample]:
    """Counter samples of ``app`` running alone for ``quanta`` quanta."""
    out = []
    done = 0.0
    for q in range(quanta):
        p = app.phase_at(done)
        vals = ground_truth.st_values(p.st_stack)
        committed = p.st_ipc * config.quantum_cycles
        out.append(counters_from_stack(vals, committed, config.quantum_cycles,
                                       config.dispatch_width, rng,
                                       ground_truth.counter_noise, app_id, q))
        done += out[-1].inst_retired
    return out


def profile_pair(app_a: AppGroundTruth, app_b: AppGroundTruth,
                 ground_truth: GroundTruthModel, quanta: int,
                 rng: np.random.Generator | None = None,
                 config: SimulationConfig = SimulationConfig(),
                 ids: tuple[AppId, AppId] = (0, 1)) -> dict:
    """Counter samples of two applications sharing one core for ``quanta`` quanta."""
    a, b = ids
    done = {a: 0.0, b: 0.0}
    apps = {a: app_a, b: app_b}
    out = {a: [], b: []}
    for q in range(quanta):
        phases = {k: apps[k].phase_at(done[k]) for k in apps}
        outcome = simulate_quantum(Schedule(((0, a, b),), q), phases, ground_truth, rng, config)
        for k in apps:
            s = outcome.samples[k]
            out[k].append(s)
            done[k] += s.inst_retired
    return out


def training_pairs(apps: Mapping[AppId, AppGroundTruth], ground_truth: GroundTruthModel,
                   stack_policy: StackPolicy, *, st_quanta: int, smt_quanta: int,
                   seed: int, config: SimulationConfig = SimulationConfig()):
    """Aligned training pairs from isolated runs and all co-run pairs of ``apps``."""
    ss = np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    ids = sorted(apps)
    st = {k: profile_isolated(apps[k], ground_truth, st_quanta, rng, config, k) for k in ids}
    pairs: list[TrainingPair] = []
    dropped = 0
    for a, b in itertools.combinations(ids, 2):
        smt = profile_pair(apps[a], apps[b], ground_truth, smt_quanta, rng, config, (a, b))
        al = align_st_smt_profiles({a: st[a], b: st[b]}, smt, stack_policy,
                                   config.dispatch_width)
        pairs.extend(al.pairs)
        dropped += al.dropped
    return pairs, dropped


def train_model(apps: Mapping[AppId, AppGroundTruth], ground_truth: GroundTruthModel,
                stack_policy: StackPolicy, *, st_quanta: int = 200, smt_quanta: int = 100,
                subset_fraction: float = 0.25, prune: bool = False, seed: int = 0,
                config: SimulationConfig = SimulationConfig()) -> RegressionModel:
    """Fit a scheduler model from simulated isolated and co-run profiles."""
    pairs, dropped = training_pairs(apps, ground_truth, stack_policy, st_quanta=st_quanta,
                                    smt_quanta=smt_quanta, seed=seed, config=config)
    subset = sample_pairs(pairs, subset_fraction,
                          np.random.default_rng(np.random.SeedSequence([seed, 1])))
    meta = {"apps": [str(a) for a in sorted(apps)], "seed": seed,
            "subset_fraction": subset_fraction, "dropped": dropped,
            "lt100": stack_policy.lt100.value, "gt100": stack_policy.gt100.value}
    return fit(stack_policy.kind, subset, prune=prune, training_meta=meta)


# -- synthetic applications --------------------------------------------------

# Dirichlet concentrations over (dispatch, frontend, backend, horizontal waste)
APP_PROFILES = {
    "frontend": (3.0, 6.0, 2.0, 1.0),
    "backend": (2.0, 1.0, 9.0, 2.0),
    "other": (5.0, 2.0, 3.0, 2.0),
    "high_waste": (3.0, 1.5, 3.0, 5.0),
}

MIN_DISPATCH = 0.05


def synthesize_app(name: str, rng: np.random.Generator, profile: str = "other", *,
                   phases: int = 3, isolated_quanta: int = DEFAULT_ISOLATED_QUANTA,
                   config: SimulationConfig = SimulationConfig(),
                   kind: StackKind = StackKind.ISC4, spread: float = 200.0) -> AppGroundTruth:
    """Random multi-phase application whose target is ``isolated_quanta`` of work.

    Phase stacks scatter around a per-application mean drawn from the
    profile's Dirichlet; ``spread`` is the concentration of that scatter.
    """
    if profile not in APP_PROFILES:
        raise ConfigError(f"unknown application profile {profile!r}")
    base = rng.dirichlet(APP_PROFILES[profile])
    out = []
    for _ in range(phases):
        v = rng.dirichlet(base * spread + 1e-3)
        v[0] = max(v[0], MIN_DISPATCH)
        if kind is StackKind.ISC3:
            v = np.array([v[0], v[1], v[2] + v[3], 0.0])
        v = v / v.sum()
        stack = IscStack.from_values(kind, [float(x) for x in v[:len(kind.categories)]])
        ipc = float(v[0] * config.dispatch_width * rng.uniform(0.85, 1.0))
        length = int(rng.integers(20, 101))
        out.append(Phase(stack, ipc, ipc * config.quantum_cycles * length))
    target = isolated_instructions(out, isolated_quanta, config.quantum_cycles)
    return AppGroundTruth(name, tuple(out), target)


# class each profile must land in; other profiles are accepted as drawn
PROFILE_CLASSES = {
    "frontend": AppClass.FRONTEND_BOUND,
    "backend": AppClass.BACKEND_BOUND,
    "other": AppClass.OTHER,
}
_MAX_DRAWS = 1000


def synthesize_pool(size: int, seed: int, *, prefix: str = "app",
                    profiles: Sequence[str] = ("frontend", "backend", "other", "high_waste"),
                    phases: int = 3, isolated_quanta: int = DEFAULT_ISOLATED_QUANTA,
                    config: SimulationConfig = SimulationConfig()) -> dict[str, AppGroundTruth]:
    """``size`` synthetic applications cycling through ``profiles``.

    An application drawn for a profile listed in ``PROFILE_CLASSES`` is
    redrawn until it classifies accordingly, so the pool's class mix is
    fixed by its size.
    """
    rng = np.random.default_rng(seed)
    width = max(2, len(str(size - 1)))
    out = {}
    for k in range(size):
        name = f"{prefix}{k:0{width}d}"
        profile = profiles[k % len(profiles)]
        want = PROFILE_CLASSES.get(profile)
        for _ in range(_MAX_DRAWS):
            app = synthesize_app(name, rng, profile, phases=phases,
                                 isolated_quanta=isolated_quanta, config=config)
            if want is None or classify_pool({name: app})[name] is want:
                break
        else:
            raise ConfigError(f"profile {profile!r} never produced a {want.value} application")
        out[name] = app
    return out


def classify_pool(apps: Mapping[str, AppGroundTruth]) -> dict:
    """Class of each application from its mean isolated stack.

    Horizontal waste is folded into backend, i.e. the three-category view,
    before applying the thresholds.
    """
    out = {}
    for name, app in apps.items():
        v = app.mean_stack_values()
        be = v[2] + (v[3] if len(v) > 3 else 0.0)
        out[name] = classify_app(IscStack(StackKind.ISC3, v[0], v[1], be))
    return out


# Synthetic truth with contention: co-runners compete for dispatch slots and
# two frontend-heavy or two backend-heavy applications amplify each other's
# stalls.  (alpha, beta, gamma, rho) per category.
CONTENTION_COEFFICIENTS = {
    Category.DISPATCH: (0.0, 1.0, 0.0, -0.6),
    Category.FRONTEND: (0.02, 1.0, 0.0, 0.8),
    Category.BACKEND: (0.02, 1.0, 0.0, 1.2),
    Category.HORIZONTAL_WASTE: (0.02, 1.0, 0.1, 0.0),
}


def contention_model() -> RegressionModel:
    return RegressionModel(StackKind.ISC4, tuple(
        CategoryModel(c, *v) for c, v in CONTENTION_COEFFICIENTS.items()), {"source": "contention"})
