import json

import pytest
from hypothesis import given, settings, strategies as st

from synpa.errors import SchemaError, WorkloadError
from synpa.stacks import AppClass
from synpa.workloads import (
    WorkloadKind,
    WorkloadSpec,
    composition_ok,
    generate_workloads,
    load_workloads,
    save_workloads,
    validate_workload,
)

BB, FB, OT = AppClass.BACKEND_BOUND, AppClass.FRONTEND_BOUND, AppClass.OTHER


def _pool(bb=0, fb=0, other=0):
    out = [(f"b{k}", BB) for k in range(bb)]
    out += [(f"f{k}", FB) for k in range(fb)]
    out += [(f"o{k}", OT) for k in range(other)]
    return out


def _check(spec, pool):
    cls = dict(pool)
    validate_workload(spec, cls)
    counts = {c: sum(cls[a] is c for a in spec.app_ids) for c in AppClass}
    if spec.kind is WorkloadKind.BACKEND_INTENSIVE:
        assert counts[BB] in (5, 6) and counts[FB] == 0
    elif spec.kind is WorkloadKind.FRONTEND_INTENSIVE:
        assert counts[FB] in (5, 6) and counts[BB] == 0
    else:
        assert counts[BB] == 4 and counts[FB] == 4
    assert len(spec.app_ids) == 8 == len(set(spec.app_ids))


def test_backend_intensive_example():
    pool = _pool(bb=6, other=4)
    (spec,) = generate_workloads(pool, {WorkloadKind.BACKEND_INTENSIVE: 1}, seed=0)
    _check(spec, pool)


def test_mixed_needs_four_frontend():
    with pytest.raises(WorkloadError, match="FrontendBound"):
        generate_workloads(_pool(bb=10, fb=3), {WorkloadKind.MIXED: 1}, seed=0)


def test_frontend_intensive_needs_other():
    with pytest.raises(WorkloadError, match="Other"):
        generate_workloads(_pool(fb=8, other=1), {WorkloadKind.FRONTEND_INTENSIVE: 1}, seed=0)


def test_seeded_generation_is_stable():
    pool = _pool(bb=10, fb=10, other=10)
    a = generate_workloads(pool, seed=42)
    assert a == generate_workloads(pool, seed=42)
    assert [w.kind for w in a].count(WorkloadKind.BACKEND_INTENSIVE) == 15
    assert [w.kind for w in a].count(WorkloadKind.FRONTEND_INTENSIVE) == 5
    assert [w.kind for w in a].count(WorkloadKind.MIXED) == 15


@settings(max_examples=100, deadline=None)
@given(st.integers(6, 14), st.integers(6, 14), st.integers(2, 10), st.integers(0, 2**31))
def test_generated_workloads_obey_rules(bb, fb, other, seed):
    pool = _pool(bb, fb, other)
    for spec in generate_workloads(pool, {k: 3 for k in WorkloadKind}, seed=seed):
        _check(spec, pool)


def test_composition_rules():
    assert composition_ok(WorkloadKind.MIXED, [BB] * 4 + [FB] * 4)
    assert not composition_ok(WorkloadKind.MIXED, [BB] * 5 + [FB] * 3)
    assert composition_ok(WorkloadKind.BACKEND_INTENSIVE, [BB] * 6 + [OT] * 2)
    assert not composition_ok(WorkloadKind.BACKEND_INTENSIVE, [BB] * 7 + [OT])
    assert not composition_ok(WorkloadKind.BACKEND_INTENSIVE, [BB] * 5 + [OT] * 2 + [FB])


def test_duplicate_pool_entry():
    with pytest.raises(WorkloadError):
        generate_workloads([("a", BB), ("a", FB)], {WorkloadKind.MIXED: 0})


def test_validate_unknown_app():
    spec = WorkloadSpec("w", WorkloadKind.MIXED, ("x",))
    with pytest.raises(WorkloadError, match="unknown"):
        validate_workload(spec, {})


def test_save_load_round_trip(tmp_path):
    pool = _pool(bb=8, fb=8, other=4)
    ws = generate_workloads(pool, {WorkloadKind.MIXED: 2, WorkloadKind.BACKEND_INTENSIVE: 1}, 3)
    path = tmp_path / "w.json"
    save_workloads(ws, path)
    assert load_workloads(path) == ws
    data = json.loads(path.read_text())
    data["schema_version"] = 9
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaError):
        load_workloads(path)
