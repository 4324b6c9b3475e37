"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import json
import statistics
import time

import numpy as np
import pytest

from synpa.cli import main as cli_main
from synpa.matching import PairGraph, brute_force_matching, min_weight_perfect_matching
from synpa.model import (
    REFERENCE_COEFFICIENTS,
    fit_category,
    invert_to_st,
    predict_pair,
    reference_model,
)
from synpa.policies import SYNPA_STACK_POLICIES, Policy, PolicyConfig
from synpa.simulator import (
    GroundTruthModel,
    SimulationConfig,
    classify_pool,
    compute_metrics,
    contention_model,
    discard_mask,
    run_workload,
    synthesize_app,
    train_model,
)
from synpa.stacks import (
    AppClass,
    Gt100,
    Lt100,
    RawStack,
    StackKind,
    StackPolicy,
    adjust_stack,
)
from synpa.workloads import WorkloadKind, composition_ok, generate_workloads

ALL_POLICIES = [StackPolicy(Lt100.A_BE, Gt100.NORMALIZE), StackPolicy(Lt100.ISC4, Gt100.NORMALIZE),
                StackPolicy(Lt100.ISC4, Gt100.REDUCE_FE), StackPolicy(Lt100.ISC4, Gt100.REDUCE_FEBE),
                StackPolicy(Lt100.ISC4, Gt100.REDUCE_FEBE, "equal")]
PROFILES = ("frontend", "backend", "other", "high_waste")


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, limit=None):
        timing = f"{elapsed:.2f}s" + (f" of {limit:g}s" if limit else "")
        within = limit is None or elapsed < limit
        verdict = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {number}: {verdict}  {detail} [{timing}]")
        assert ok, detail
        assert within, f"took {elapsed:.2f}s, limit {limit}s"
    return emit


def test_criterion_1_stack_algebra(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    raws = rng.uniform(0.0, 0.9, size=(10_000, 3))
    broken = 0
    for d, fe, be in raws.tolist():
        raw = RawStack(d, fe, be)
        total = d + fe + be
        out = [adjust_stack(raw, p) for p in ALL_POLICIES]
        a_be, isc4 = out[0], out[1]
        if any(abs(sum(s.values()) - 1.0) > 1e-9 for s in out):
            broken += 1
        # a stack that already sums to one passes through unchanged
        again = adjust_stack(RawStack(a_be.dispatch, a_be.frontend, a_be.backend), ALL_POLICIES[0])
        if again != a_be:
            broken += 1
        if total > 1.0:
            n = isc4
            if abs(n.dispatch * fe - n.frontend * d) > 1e-12 or abs(n.dispatch * be - n.backend * d) > 1e-12:
                broken += 1
            if fe >= total - 1.0 and (out[2].dispatch, out[2].backend) != (d, be):
                broken += 1
        elif total < 1.0:
            if not (a_be.dispatch == isc4.dispatch and a_be.frontend == isc4.frontend
                    and abs(a_be.backend - isc4.backend - isc4.horizontal_waste) <= 1e-12):
                broken += 1
    elapsed = time.perf_counter() - t0
    report(1, broken == 0, f"10000 raw stacks x 5 variants, {broken} violations", elapsed, 1.0)


def _synthetic(coef, seed, n=1000, sigma=0.01):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    a, b, g, r = coef
    return x, y, a + b * x + g * y + r * x * y + rng.normal(0, sigma, n)


def test_criterion_2_coefficient_recovery(report):
    t0 = time.perf_counter()
    worst = 0.0
    pattern_ok = True
    for name, table in sorted(REFERENCE_COEFFICIENTS.items()):
        for k, (cat, coef) in enumerate(table.items()):
            x, y, m = _synthetic(coef, 2024 + k)
            full = fit_category(cat, x, y, m)
            worst = max(worst, max(abs(a - b) for a, b in zip(full.coefficients, coef)))
            pruned = fit_category(cat, x, y, m, prune=True)
            zeros = [i for i, v in enumerate(coef) if v == 0.0 and i >= 2]
            pattern_ok &= all(pruned.coefficients[i] == 0.0 for i in zeros)
            pattern_ok &= all(pruned.coefficients[i] != 0.0
                              for i, v in enumerate(coef) if abs(v) > 0.2)
    elapsed = time.perf_counter() - t0
    report(2, worst <= 0.05 and pattern_ok,
           f"max coefficient error {worst:.4f}, pruned zero pattern "
           f"{'reproduced' if pattern_ok else 'NOT reproduced'}", elapsed, 5.0)


def test_criterion_3_round_trip(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    flagged = wrong = total = 0
    for name in sorted(REFERENCE_COEFFICIENTS):
        model = reference_model(name)
        k = len(model.categories)
        for _ in range(5_000):
            x, y = rng.uniform(0.05, 0.95, k), rng.uniform(0.05, 0.95, k)
            p = predict_pair(model, x, y, clamp=False)
            inv = invert_to_st(model, p.smt_i, p.smt_j)
            total += 1
            if inv.flagged:
                flagged += 1
            elif not (np.allclose(inv.raw_i, x, rtol=0, atol=1e-6)
                      and np.allclose(inv.raw_j, y, rtol=0, atol=1e-6)):
                wrong += 1
    elapsed = time.perf_counter() - t0
    rate = flagged / total
    report(3, wrong == 0 and rate < 0.01,
           f"{total} grids, {wrong} wrong recoveries, fallback rate {rate:.2%}", elapsed, 5.0)


def test_criterion_4_matching_optimality(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    mismatched = 0
    for n in range(2, 11, 2):
        for _ in range(200):
            w = np.triu(rng.uniform(0, 10, size=(n, n)), 1)
            g = PairGraph(w + w.T)
            if min_weight_perfect_matching(g).total_weight != brute_force_matching(g).total_weight:
                mismatched += 1
    elapsed = time.perf_counter() - t0
    report(4, mismatched == 0, f"1000 graphs, n = 2..10, {mismatched} weight mismatches",
           elapsed, 10.0)


def test_criterion_5_perfect_information(report):
    t0 = time.perf_counter()
    sim = SimulationConfig(audit=True)
    truth = GroundTruthModel.consistent(StackKind.ISC4)
    policy = PolicyConfig(Policy.SYNPA4_N, model=truth.model)
    quanta = mismatches = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        apps = [synthesize_app(f"w{seed}a{k}", rng, PROFILES[k % 4], isolated_quanta=100,
                               config=sim) for k in range(8)]
        run = run_workload(apps, policy, truth, seed, sim)
        for q in range(run.quanta - 1):
            stacks = [truth.st_values(run.audit[q][a]) for a in range(8)]
            oracle = brute_force_matching(PairGraph.from_function(
                8, lambda i, j: sum(truth.pair_slowdowns(stacks[i], stacks[j]))))
            quanta += 1
            if frozenset(map(frozenset, oracle.pairs)) != run.schedules[q + 1].pair_set():
                mismatches += 1
    elapsed = time.perf_counter() - t0
    report(5, mismatches == 0 and quanta > 0,
           f"{quanta} quanta over 20 seeds, {mismatches} differ from the exhaustive oracle",
           elapsed, 30.0)


# policy-ordering protocol ------------------------------------------------------

ISOLATED_QUANTA = 200


def _trained_models(truth):
    rng = np.random.default_rng(12345)
    train = {f"t{k:02d}": synthesize_app(f"t{k:02d}", rng, prof, isolated_quanta=ISOLATED_QUANTA)
             for k, prof in enumerate(PROFILES * 3)}
    return {p: train_model(train, truth, sp, seed=1) for p, sp in SYNPA_STACK_POLICIES.items()}


def _mean_tts(workloads, policies, models, truth, seed0):
    out = {p: [] for p in policies}
    for i, apps in enumerate(workloads):
        for p in policies:
            cfg = PolicyConfig(p, model=models.get(p))
            out[p].append(run_workload(apps, cfg, truth, seed0 + i).turnaround_time)
    return {p: statistics.fmean(v) for p, v in out.items()}


@pytest.mark.slow
def test_criterion_6_policy_ordering(report):
    t0 = time.perf_counter()
    truth = GroundTruthModel(contention_model(), noise=0.02)
    models = _trained_models(truth)

    rng = np.random.default_rng(777)
    pool = {f"a{k:02d}": synthesize_app(f"a{k:02d}", rng, PROFILES[k % 4],
                                        isolated_quanta=ISOLATED_QUANTA) for k in range(24)}
    specs = generate_workloads(sorted(classify_pool(pool).items()), {WorkloadKind.MIXED: 20},
                               seed=7)
    mixed = [[pool[a] for a in w.app_ids] for w in specs]
    order = [Policy.ORACLE, Policy.SYNPA4_N, Policy.SYNPA4_R_FE, Policy.SYNPA4_R_FEBE,
             Policy.SYNPA3_N, Policy.RANDOM_BASELINE]
    tt = _mean_tts(mixed, order, models, truth, 100)
    synpa4 = [tt[p] for p in (Policy.SYNPA4_N, Policy.SYNPA4_R_FE, Policy.SYNPA4_R_FEBE)]
    ordering = tt[Policy.ORACLE] <= min(synpa4) and max(synpa4) <= tt[Policy.RANDOM_BASELINE]

    # high horizontal-waste ensemble: applications whose isolated mean waste is >= 0.25
    hrng = np.random.default_rng(4242)
    high = {}
    k = 0
    while len(high) < 16:
        app = synthesize_app(f"h{k:02d}", hrng, "high_waste", isolated_quanta=ISOLATED_QUANTA)
        k += 1
        if app.mean_stack_values()[3] >= 0.25:
            high[app.name] = app
    ids = sorted(high)
    pick = np.random.default_rng(99)
    waste_ens = [[high[ids[j]] for j in sorted(pick.choice(len(ids), 8, replace=False))]
                 for _ in range(20)]
    ens_waste = statistics.fmean(a.mean_stack_values()[3] for w in waste_ens for a in w)
    hw_tt = _mean_tts(waste_ens, [Policy.SYNPA4_N, Policy.SYNPA3_N], models, truth, 200)
    waste_ok = ens_waste >= 0.25 and hw_tt[Policy.SYNPA4_N] <= hw_tt[Policy.SYNPA3_N]

    elapsed = time.perf_counter() - t0
    means = ", ".join(f"{p.value} {tt[p]:.1f}" for p in order)
    detail = (f"Mixed mean TT: {means} -> ordering {'holds' if ordering else 'VIOLATED'}; "
              f"high-waste ensemble (mean waste {ens_waste:.2f}): "
              f"SYNPA4_N {hw_tt[Policy.SYNPA4_N]:.1f} vs SYNPA3_N {hw_tt[Policy.SYNPA3_N]:.1f} -> "
              f"{'holds' if waste_ok else 'VIOLATED'}")
    report(6, ordering and waste_ok, detail, elapsed, 300.0)


def test_criterion_7_methodology(report):
    t0 = time.perf_counter()
    # hand-built repetitions: mean 2, population stdev sqrt(2/3), band 0.0204
    mask_ok = discard_mask([1.0, 2.0, 3.0]) == [False, True, False]
    m = compute_metrics([1.0, 2.0, 3.0])
    mask_ok &= m.mean_turnaround == 2.0 and m.discarded == (0, 2)
    rng = np.random.default_rng(7)
    violations = 0
    for trial in range(1000):
        counts = rng.integers(6, 12, size=2).tolist() + [int(rng.integers(2, 8))]
        pool = ([(f"b{i}", AppClass.BACKEND_BOUND) for i in range(counts[0])]
                + [(f"f{i}", AppClass.FRONTEND_BOUND) for i in range(counts[1])]
                + [(f"o{i}", AppClass.OTHER) for i in range(counts[2])])
        classes = dict(pool)
        for w in generate_workloads(pool, {k: 1 for k in WorkloadKind}, seed=trial):
            if len(w.app_ids) != 8 or not composition_ok(w.kind, [classes[a] for a in w.app_ids]):
                violations += 1
    elapsed = time.perf_counter() - t0
    report(7, mask_ok and violations == 0,
           f"discard rule {'exact' if mask_ok else 'WRONG'}, 1000 pools, "
           f"{violations} composition violations", elapsed, 1.0)


def test_criterion_8_determinism(report, tmp_path):
    t0 = time.perf_counter()
    cfg = {"app_pool": {"size": 24, "isolated_quanta": 30},
           "workloads": {"counts": {"Mixed": 1, "BackendIntensive": 1, "FrontendIntensive": 0}},
           "policies": ["SYNPA4_N", "SYNPA3_N", "HY_SCHED", "RANDOM_BASELINE"],
           "repetitions": 2, "training": {"st_quanta": 40, "smt_quanta": 20},
           "ground_truth": {"model": "contention", "noise": 0.02, "counter_noise": 0.01}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for run in ("first", "second"):
        d = tmp_path / run
        assert cli_main(["simulate", "--config", str(path), "--out-dir", str(d)]) == 0
        outs.append({p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*.csv"))})
    same = outs[0] == outs[1] and len(outs[0]) > 1
    elapsed = time.perf_counter() - t0
    report(8, same, f"{len(outs[0])} CSV files, byte-identical: {same}", elapsed)
