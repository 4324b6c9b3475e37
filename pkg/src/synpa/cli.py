"""Command-line entry point: ``synpa train|simulate|compare|report``.

Every command reads an optional JSON config; command-line flags override
the corresponding config keys.  The whole config is validated before any
simulation starts and output files are written only after all runs finish.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from synpa.errors import ConfigError, DataError, SchemaError, SynpaError
from synpa.model import (
    REFERENCE_COEFFICIENTS,
    RegressionModel,
    align_st_smt_profiles,
    fit,
    load_model,
    model_from_dict,
    reference_model,
    sample_pairs,
    save_model,
)
from synpa.policies import SYNPA_STACK_POLICIES, Policy, PolicyConfig
from synpa.simulator import (
    DISCARD_RULES,
    GroundTruthModel,
    SimulationConfig,
    ccdf,
    classify_pool,
    contention_model,
    discard_mask,
    compute_metrics,
    run_workload,
    synthesize_pool,
    train_model,
)
from synpa.stacks import StackKind
from synpa.traceio import ResultRow, load_trace, read_results, write_ccdf, write_results
from synpa.workloads import (
    WorkloadKind,
    generate_workloads,
    load_workloads,
    save_workloads,
    validate_workload,
)

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "quantum_cycles": 200_000_000,
    "dispatch_width": 4,
    "policies": ["SYNPA4_N", "SYNPA3_N", "HY_SCHED", "RANDOM_BASELINE"],
    "baseline": None,
    "repetitions": 10,
    "out_dir": "results",
    # the literal band is far narrower than run-to-run spread; see README
    "discard_rule": "none",
    "slowdown_basis": "stack",
    "pair_weight": "sum",
    "slowdown_cap": 100.0,
    "ground_truth": {"model": "contention", "noise": 0.02, "counter_noise": 0.0},
    "app_pool": {"size": 24, "isolated_quanta": 600, "phases": 3},
    "workloads": {"path": None,
                  "counts": {"BackendIntensive": 15, "FrontendIntensive": 5, "Mixed": 15}},
    "models": {},
    "training": {"holdout": [], "st_quanta": 200, "smt_quanta": 50,
                 "subset_fraction": 0.25, "prune": False, "traces": None},
}

_NESTED = ("ground_truth", "app_pool", "workloads", "training")


def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key '{where}{key}'")
        if key in _NESTED and not where:
            if not isinstance(val, dict):
                raise ConfigError(f"config key {key!r} must be an object")
            out[key] = _merge(base[key], val, f"{key}.")
        else:
            out[key] = val
    return out


def load_config(path: str | None, overrides: dict) -> dict:
    raw: dict = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = _merge(DEFAULTS, raw)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def _int(cfg, key, lo=None):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{key} must be >= {lo}, got {v}")
    return int(v)


def _num(cfg, key, lo=None):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{key} must be >= {lo}, got {v}")
    return float(v)


@dataclass
class Plan:
    """Everything a command needs, resolved and validated."""

    cfg: dict
    seed: int
    sim: SimulationConfig
    policies: list[Policy]
    baseline: Policy
    repetitions: int
    out_dir: Path
    ground_truth: GroundTruthModel
    pool: dict
    workloads: list
    models: dict


def _ground_truth(spec: dict) -> GroundTruthModel:
    noise = spec["noise"]
    counter_noise = spec["counter_noise"]
    for name, v in (("noise", noise), ("counter_noise", counter_noise)):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise ConfigError(f"ground_truth.{name} must be a number >= 0")
    m = spec["model"]
    if m == "contention":
        model = contention_model()
    elif m == "consistent":
        return GroundTruthModel.consistent(StackKind.ISC4, noise=noise, counter_noise=counter_noise)
    elif isinstance(m, str) and m in REFERENCE_COEFFICIENTS:
        model = reference_model(m)
    elif isinstance(m, dict):
        try:
            model = model_from_dict(m)
        except SchemaError as exc:
            raise ConfigError(f"ground_truth.model: {exc}") from None
    elif isinstance(m, str):
        try:
            model = load_model(m)
        except OSError as exc:
            raise ConfigError(f"cannot read ground-truth model {m}: {exc}") from None
    else:
        raise ConfigError(f"unsupported ground_truth.model {m!r}")
    return GroundTruthModel(model, noise=noise, counter_noise=counter_noise)


def _policies(cfg) -> list[Policy]:
    names = cfg["policies"]
    if isinstance(names, str):
        names = [n for n in names.split(",") if n]
    if not isinstance(names, list) or not names:
        raise ConfigError("policies must be a non-empty list")
    out = []
    for n in names:
        try:
            p = Policy(str(n).strip())
        except ValueError:
            raise ConfigError(f"unknown policy {n!r}; choose from "
                              f"{[p.value for p in Policy]}") from None
        if p not in out:
            out.append(p)
    return out


def _derived_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


def _training_apps(plan_pool, training) -> dict:
    holdout = training["holdout"]
    if not isinstance(holdout, list):
        raise ConfigError("training.holdout must be a list of application ids")
    unknown = [h for h in holdout if h not in plan_pool]
    if unknown:
        raise ConfigError(f"training.holdout names unknown applications {unknown}")
    apps = {k: v for k, v in plan_pool.items() if k not in set(holdout)}
    if len(apps) < 3:
        raise ConfigError("training needs at least 3 non-holdout applications")
    return apps


def _check_training(training):
    for key in ("st_quanta", "smt_quanta"):
        _int(training, key, 1)
    frac = _num(training, "subset_fraction")
    if not 0 < frac <= 1:
        raise ConfigError("training.subset_fraction must be in (0, 1]")
    if not isinstance(training["prune"], bool):
        raise ConfigError("training.prune must be true or false")


def build_plan(cfg: dict, *, need_workloads: bool = True) -> Plan:
    seed = _int(cfg, "seed", 0)
    sim = SimulationConfig(quantum_cycles=_int(cfg, "quantum_cycles", 1),
                           dispatch_width=_int(cfg, "dispatch_width", 1),
                           slowdown_cap=_num(cfg, "slowdown_cap", 1e-9))
    policies = _policies(cfg)
    baseline = cfg["baseline"]
    if baseline is None:
        baseline = Policy.RANDOM_BASELINE if Policy.RANDOM_BASELINE in policies else policies[0]
    else:
        try:
            baseline = Policy(baseline)
        except ValueError:
            raise ConfigError(f"unknown baseline policy {baseline!r}") from None
        if baseline not in policies:
            raise ConfigError(f"baseline {baseline.value} is not among the simulated policies")
    reps = _int(cfg, "repetitions", 1)
    if cfg["discard_rule"] not in DISCARD_RULES:
        raise ConfigError(f"discard_rule must be one of {list(DISCARD_RULES)}")
    if not isinstance(cfg["out_dir"], str) or not cfg["out_dir"]:
        raise ConfigError("out_dir must be a non-empty path")
    gt = _ground_truth(cfg["ground_truth"])

    pool_cfg = cfg["app_pool"]
    size = _int(pool_cfg, "size", 2)
    pool = synthesize_pool(size, _derived_seed(seed, 1), phases=_int(pool_cfg, "phases", 1),
                           isolated_quanta=_int(pool_cfg, "isolated_quanta", 1), config=sim)
    classes = classify_pool(pool)

    workloads = []
    if need_workloads:
        wl_cfg = cfg["workloads"]
        if wl_cfg["path"]:
            try:
                workloads = load_workloads(wl_cfg["path"])
            except OSError as exc:
                raise ConfigError(f"cannot read workload file: {exc}") from None
            for w in workloads:
                validate_workload(w, classes)
        else:
            counts = wl_cfg["counts"]
            if not isinstance(counts, dict):
                raise ConfigError("workloads.counts must map kinds to counts")
            try:
                counts = {WorkloadKind(k): int(v) for k, v in counts.items()}
            except ValueError as exc:
                raise ConfigError(f"workloads.counts: {exc}") from None
            workloads = generate_workloads(sorted(classes.items()), counts,
                                           _derived_seed(seed, 2))
        if not workloads:
            raise ConfigError("no workloads to simulate")

    training = cfg["training"]
    _check_training(training)
    if not isinstance(cfg["models"], dict):
        raise ConfigError("models must map policy names to model files")
    models = {}
    for name, path in sorted(cfg["models"].items()):
        try:
            p = Policy(name)
        except ValueError:
            raise ConfigError(f"models: unknown policy {name!r}") from None
        try:
            models[p] = load_model(path)
        except OSError as exc:
            raise ConfigError(f"cannot read model for {name}: {exc}") from None
    for p in policies:
        if p.is_synpa and p in models and models[p].kind is not SYNPA_STACK_POLICIES[p].kind:
            raise ConfigError(f"model for {p.value} has kind {models[p].kind.value}")
    # dry-construct policy configs so option errors surface before any work
    for p in policies:
        if p.is_synpa:
            PolicyConfig(p, model=models.get(p) or reference_model(
                "SYNPA3_N" if SYNPA_STACK_POLICIES[p].kind is StackKind.ISC3 else "SYNPA4_N"),
                slowdown_basis=cfg["slowdown_basis"], pair_weight=cfg["pair_weight"],
                slowdown_cap=sim.slowdown_cap, dispatch_width=sim.dispatch_width)
    return Plan(cfg, seed, sim, policies, baseline, reps, Path(cfg["out_dir"]), gt, pool,
                workloads, models)


def _train_from_traces(policy: Policy, traces: dict, training: dict, seed: int,
                       width: int) -> RegressionModel:
    sp = SYNPA_STACK_POLICIES[policy]
    try:
        st = load_trace(traces["st"])
        pairs, dropped = [], 0
        for path in traces["smt"]:
            smt = load_trace(path)
            missing = [a for a in smt if a not in st]
            if missing:
                raise DataError(f"{path}: no isolated profile for {missing}")
            al = align_st_smt_profiles({a: st[a] for a in smt}, smt, sp, width)
            pairs.extend(al.pairs)
            dropped += al.dropped
    except (KeyError, TypeError):
        raise ConfigError("training.traces needs 'st' (path) and 'smt' (list of paths)") from None
    except OSError as exc:
        raise DataError(f"cannot read trace: {exc}") from None
    holdout = set(training["holdout"])
    pairs = [p for p in pairs if p.app_i not in holdout and p.app_j not in holdout]
    subset = sample_pairs(pairs, training["subset_fraction"],
                          np.random.default_rng(np.random.SeedSequence([seed, 1])))
    return fit(sp.kind, subset, prune=training["prune"],
               training_meta={"source": "traces", "dropped": dropped, "seed": seed,
                              "lt100": sp.lt100.value, "gt100": sp.gt100.value})


def train_models(plan: Plan, policies=None) -> dict[Policy, RegressionModel]:
    training = plan.cfg["training"]
    out = {}
    for p in policies if policies is not None else plan.policies:
        if not p.is_synpa:
            continue
        tseed = _derived_seed(plan.seed, 3)
        if training["traces"]:
            out[p] = _train_from_traces(p, training["traces"], training, tseed,
                                        plan.sim.dispatch_width)
        else:
            out[p] = train_model(_training_apps(plan.pool, training), plan.ground_truth,
                                 SYNPA_STACK_POLICIES[p], st_quanta=training["st_quanta"],
                                 smt_quanta=training["smt_quanta"],
                                 subset_fraction=training["subset_fraction"],
                                 prune=training["prune"], seed=tseed, config=plan.sim)
    return out


def cmd_train(plan: Plan, out=None) -> dict:
    out = out or sys.stdout
    policies = [p for p in plan.policies if p.is_synpa]
    if not policies:
        raise ConfigError("train needs at least one SYNPA policy")
    models = train_models(plan, policies)
    model_dir = plan.out_dir / "models"
    model_dir.mkdir(parents=True, exist_ok=True)
    for p, m in models.items():
        save_model(m, model_dir / f"{p.value}.json")
        print(f"{p.value} ({m.kind.value}), {m.training_meta.get('pairs', 0)} training pairs",
              file=out)
        for c in m.categories:
            print(f"  {c.category.value:<17} MSE = {c.mse:.6g}", file=out)
    return models


def _policy_config(plan: Plan, p: Policy, models) -> PolicyConfig:
    return PolicyConfig(p, model=models.get(p), slowdown_basis=plan.cfg["slowdown_basis"],
                        pair_weight=plan.cfg["pair_weight"], slowdown_cap=plan.sim.slowdown_cap,
                        dispatch_width=plan.sim.dispatch_width)


def cmd_simulate(plan: Plan, out=None) -> list[ResultRow]:
    out = out or sys.stdout
    models = dict(plan.models)
    missing = [p for p in plan.policies if p.is_synpa and p not in models]
    models.update(train_models(plan, missing))
    configs = {p: _policy_config(plan, p, models) for p in plan.policies}

    runs = {}
    for wi, w in enumerate(plan.workloads):
        apps = [plan.pool[a] for a in w.app_ids]
        for rep in range(plan.repetitions):
            rseed = _derived_seed(plan.seed, 4, wi, rep)
            for p in plan.policies:
                runs[(wi, p, rep)] = run_workload(apps, configs[p], plan.ground_truth, rseed,
                                                  plan.sim)

    rule = plan.cfg["discard_rule"]
    rows = []
    hw_rows = []
    ccdfs = {}
    for wi, w in enumerate(plan.workloads):
        for p in plan.policies:
            reps = [runs[(wi, p, r)] for r in range(plan.repetitions)]
            keep = discard_mask([r.turnaround_time for r in reps], rule)
            series = []
            for rep, r in enumerate(reps):
                base = runs[(wi, plan.baseline, rep)].turnaround_time
                rows.append(ResultRow(w.name, p.value, rep, r.turnaround_time,
                                      base / r.turnaround_time, r.ipc_geomean, not keep[rep]))
                series.extend(r.horizontal_waste_series)
                hw_rows.extend((w.name, p.value, rep, q, v)
                               for q, v in enumerate(r.horizontal_waste_series))
            ccdfs[(w.name, p.value)] = ccdf(series)

    d = plan.out_dir
    (d / "ccdf").mkdir(parents=True, exist_ok=True)
    write_results(rows, d / "results.csv")
    for (wname, pname), pts in ccdfs.items():
        write_ccdf(pts, d / "ccdf" / f"{wname}__{pname}.csv")
    with open(d / "hw_series.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(("workload", "policy", "repetition", "quantum", "horizontal_waste"))
        for r in hw_rows:
            wr.writerow(r[:4] + (repr(r[4]),))
    save_workloads(plan.workloads, d / "workloads.json")
    meta = {"baseline": plan.baseline.value, "discard_rule": rule, "seed": plan.seed,
            "policies": [p.value for p in plan.policies], "repetitions": plan.repetitions}
    (d / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                encoding="utf-8")
    print(f"wrote {len(rows)} result rows to {d / 'results.csv'}", file=out)
    return rows


@dataclass(frozen=True)
class Comparison:
    scope: str  # "workload" or "kind"
    name: str
    policy: str
    tt_speedup: float
    ipc_speedup: float


def _read_run(results_dir: Path):
    if not results_dir.is_dir():
        raise DataError(f"results directory {results_dir} does not exist")
    path = results_dir / "results.csv"
    if not path.exists():
        raise DataError(f"{results_dir} holds no results.csv")
    rows = read_results(path)
    if not rows:
        raise DataError(f"{path} has no result rows")
    meta = {}
    if (results_dir / "run.json").exists():
        meta = json.loads((results_dir / "run.json").read_text(encoding="utf-8"))
    kinds = {}
    if (results_dir / "workloads.json").exists():
        kinds = {w.name: w.kind.value for w in load_workloads(results_dir / "workloads.json")}
    return rows, meta, kinds


def compare(rows: list[ResultRow], baseline: str, rule: str = "literal",
            kinds: dict | None = None) -> list[Comparison]:
    """Per-workload and per-kind speedups of every policy over ``baseline``."""
    groups: dict[tuple[str, str], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.workload, r.policy), []).append(r)
    workloads = sorted({w for w, _ in groups})
    policies = sorted({p for _, p in groups})
    out = []
    per_kind: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for w in workloads:
        if (w, baseline) not in groups:
            raise DataError(f"workload {w!r} has no rows for baseline {baseline}")
        bm = compute_metrics(_as_runs(groups[(w, baseline)]), rule)
        for p in policies:
            if (w, p) not in groups:
                continue
            pm = compute_metrics(_as_runs(groups[(w, p)]), rule)
            tt = bm.mean_turnaround / pm.mean_turnaround
            ipc = pm.mean_ipc_geomean / bm.mean_ipc_geomean
            out.append(Comparison("workload", w, p, tt, ipc))
            kind = (kinds or {}).get(w, "all")
            per_kind.setdefault((kind, p), []).append((tt, ipc))
    for (kind, p), vals in sorted(per_kind.items()):
        out.append(Comparison("kind", kind, p, statistics.fmean(v[0] for v in vals),
                              statistics.fmean(v[1] for v in vals)))
    return out


@dataclass(frozen=True)
class _Run:
    turnaround_time: float
    ipc_geomean: float


def _as_runs(rows):
    return [_Run(r.turnaround_quanta, r.ipc_geomean) for r in sorted(rows, key=lambda r: r.repetition)]


def _write_comparison(comps, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("scope", "name", "policy", "tt_speedup", "ipc_speedup"))
        for c in comps:
            w.writerow((c.scope, c.name, c.policy, repr(c.tt_speedup), repr(c.ipc_speedup)))


def cmd_compare(results_dir: Path, baseline: str | None = None, out=None):
    out = out or sys.stdout
    rows, meta, kinds = _read_run(results_dir)
    baseline = baseline or meta.get("baseline")
    if not baseline:
        raise DataError("no baseline policy recorded; pass one in the config")
    comps = compare(rows, baseline, meta.get("discard_rule", "literal"), kinds)
    _write_comparison(comps, results_dir / "compare.csv")
    print(f"speedups over {baseline}", file=out)
    print(f"{'scope':<9}{'name':<24}{'policy':<17}{'TT':>9}{'IPC':>9}", file=out)
    for c in comps:
        print(f"{c.scope:<9}{c.name:<24}{c.policy:<17}{c.tt_speedup:>9.4f}{c.ipc_speedup:>9.4f}",
              file=out)
    return comps


def cmd_report(results_dir: Path, baseline: str | None = None, out=None):
    """Plot-ready data: per-policy waste CCDF and per-kind speedup bars."""
    out = out or sys.stdout
    rows, meta, kinds = _read_run(results_dir)
    baseline = baseline or meta.get("baseline")
    comps = compare(rows, baseline, meta.get("discard_rule", "literal"), kinds)
    rdir = results_dir / "report"
    rdir.mkdir(exist_ok=True)
    _write_comparison([c for c in comps if c.scope == "kind"], rdir / "speedups_by_kind.csv")
    series: dict[str, list[float]] = {}
    hw_path = results_dir / "hw_series.csv"
    if hw_path.exists():
        with open(hw_path, newline="", encoding="utf-8") as fh:
            for r in csv.DictReader(fh):
                series.setdefault(r["policy"], []).append(float(r["horizontal_waste"]))
    for p, vals in sorted(series.items()):
        write_ccdf(ccdf(vals), rdir / f"ccdf_{p}.csv")
    print(f"wrote report data to {rdir}", file=out)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="synpa", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("train", "fit scheduler models"),
                        ("simulate", "run every workload under every policy"),
                        ("compare", "speedup table from a results directory"),
                        ("report", "plot-ready CSVs from a results directory")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON run config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--policies", help="comma-separated policy names")
        sp.add_argument("--reps", type=int, dest="repetitions")
        if name in ("compare", "report"):
            sp.add_argument("results_dir", nargs="?", help="defaults to the out dir")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        overrides = {"seed": args.seed, "out_dir": args.out_dir,
                     "policies": args.policies, "repetitions": args.repetitions}
        cfg = load_config(args.config, overrides)
        if args.command in ("compare", "report"):
            rdir = Path(args.results_dir or cfg["out_dir"])
            fn = cmd_compare if args.command == "compare" else cmd_report
            fn(rdir, cfg["baseline"])
            return 0
        plan = build_plan(cfg, need_workloads=args.command == "simulate")
        if args.command == "train":
            cmd_train(plan)
        else:
            cmd_simulate(plan)
        return 0
    except SynpaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
