"""Workload composition rules and workload files."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from synpa.errors import SchemaError, WorkloadError
from synpa.stacks import AppClass

WORKLOAD_SIZE = 8
SCHEMA_VERSION = 1


class WorkloadKind(str, enum.Enum):
    BACKEND_INTENSIVE = "BackendIntensive"
    FRONTEND_INTENSIVE = "FrontendIntensive"
    MIXED = "Mixed"


DEFAULT_COUNTS = {
    WorkloadKind.BACKEND_INTENSIVE: 15,
    WorkloadKind.FRONTEND_INTENSIVE: 5,
    WorkloadKind.MIXED: 15,
}

# allowed (class -> count) mixes per kind, for 8-application workloads
_COMPOSITIONS = {
    WorkloadKind.BACKEND_INTENSIVE: (
        {AppClass.BACKEND_BOUND: 5, AppClass.OTHER: 3},
        {AppClass.BACKEND_BOUND: 6, AppClass.OTHER: 2},
    ),
    WorkloadKind.FRONTEND_INTENSIVE: (
        {AppClass.FRONTEND_BOUND: 5, AppClass.OTHER: 3},
        {AppClass.FRONTEND_BOUND: 6, AppClass.OTHER: 2},
    ),
    WorkloadKind.MIXED: (
        {AppClass.BACKEND_BOUND: 4, AppClass.FRONTEND_BOUND: 4},
    ),
}


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    kind: WorkloadKind
    app_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", WorkloadKind(self.kind))
        object.__setattr__(self, "app_ids", tuple(self.app_ids))
        if len(set(self.app_ids)) != len(self.app_ids):
            raise WorkloadError(f"workload {self.name!r} repeats an application")


def composition_ok(kind: WorkloadKind, classes: Sequence[AppClass]) -> bool:
    counts = {c: 0 for c in AppClass}
    for c in classes:
        counts[c] += 1
    for rule in _COMPOSITIONS[WorkloadKind(kind)]:
        if all(counts[c] == rule.get(c, 0) for c in AppClass):
            return True
    return False


def validate_workload(spec: WorkloadSpec, classification: Mapping[str, AppClass]) -> None:
    missing = [a for a in spec.app_ids if a not in classification]
    if missing:
        raise WorkloadError(f"workload {spec.name!r} uses unknown applications {missing}")
    if not composition_ok(spec.kind, [classification[a] for a in spec.app_ids]):
        raise WorkloadError(f"workload {spec.name!r} breaks the {spec.kind.value} composition rule")


def _deficit(rule, by_class):
    for c, need in rule.items():
        if len(by_class[c]) < need:
            return c, need
    return None


def generate_workloads(app_pool: Sequence[tuple[str, AppClass]],
                       counts: Mapping[WorkloadKind, int] | None = None,
                       seed: int = 0) -> list[WorkloadSpec]:
    """Randomly compose workloads that follow the per-kind class mix.

    Applications are drawn without replacement inside a workload; different
    workloads may share applications.
    """
    counts = DEFAULT_COUNTS if counts is None else {WorkloadKind(k): v for k, v in counts.items()}
    by_class: dict[AppClass, list[str]] = {c: [] for c in AppClass}
    seen = set()
    for app_id, cls in app_pool:
        if app_id in seen:
            raise WorkloadError(f"application {app_id!r} appears twice in the pool")
        seen.add(app_id)
        by_class[AppClass(cls)].append(app_id)
    for ids in by_class.values():
        ids.sort()

    rng = np.random.default_rng(seed)
    out = []
    for kind in WorkloadKind:
        n = counts.get(kind, 0)
        if n <= 0:
            continue
        rules = [r for r in _COMPOSITIONS[kind] if _deficit(r, by_class) is None]
        if not rules:
            cls, need = _deficit(_COMPOSITIONS[kind][0], by_class)
            raise WorkloadError(
                f"{kind.value} workloads need at least {need} {cls.value} applications, "
                f"the pool has {len(by_class[cls])}")
        for k in range(n):
            rule = rules[int(rng.integers(len(rules)))]
            members = []
            for cls in AppClass:
                need = rule.get(cls, 0)
                if need:
                    pick = rng.choice(len(by_class[cls]), size=need, replace=False)
                    members.extend(by_class[cls][i] for i in sorted(pick))
            out.append(WorkloadSpec(f"{kind.value}-{k + 1:02d}", kind, tuple(members)))
    return out


def workloads_to_dict(workloads: Sequence[WorkloadSpec]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "workloads": [{"name": w.name, "kind": w.kind.value, "app_ids": list(w.app_ids)}
                      for w in workloads],
    }


def workloads_from_dict(data) -> list[WorkloadSpec]:
    if not isinstance(data, Mapping) or data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"workload file needs schema_version {SCHEMA_VERSION}")
    try:
        return [WorkloadSpec(w["name"], WorkloadKind(w["kind"]), tuple(str(a) for a in w["app_ids"]))
                for w in data["workloads"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed workload entry: {exc}") from None


def save_workloads(workloads: Sequence[WorkloadSpec], path) -> None:
    Path(path).write_text(json.dumps(workloads_to_dict(workloads), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_workloads(path) -> list[WorkloadSpec]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed workload file ({exc})") from None
    return workloads_from_dict(data)
