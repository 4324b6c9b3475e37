"""CSV counter traces and result files."""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from synpa.errors import DataError, SchemaError, TraceError
from synpa.stacks import CounterSample

TRACE_COLUMNS = ("quantum_index", "app_id", "core_id", "cpu_cycles", "stall_frontend",
                 "stall_backend", "inst_retired", "inst_spec")
_COUNT_COLUMNS = ("cpu_cycles", "stall_frontend", "stall_backend", "inst_retired", "inst_spec")


def _int_field(row, name, line):
    raw = row[name]
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise TraceError(f"column {name!r} is not an integer: {raw!r}", line) from None


def load_trace(path) -> dict[str, list[CounterSample]]:
    """Read a trace into per-application sample lists ordered by quantum.

    Each row holds one application's per-quantum counter deltas.  Quantum
    indices of an application must form a gap-free range.
    """
    by_app: dict[str, dict[int, tuple[CounterSample, int]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in TRACE_COLUMNS if c not in header]
        if missing:
            raise TraceError(f"missing columns {missing}", 1)
        for row in reader:
            line = reader.line_num
            if None in row.values() or None in row:
                raise TraceError("wrong number of fields", line)
            app = row["app_id"].strip()
            if not app:
                raise TraceError("empty app_id", line)
            q = _int_field(row, "quantum_index", line)
            if q < 0:
                raise TraceError(f"negative quantum_index {q}", line)
            counts = {c: _int_field(row, c, line) for c in _COUNT_COLUMNS}
            for c, v in counts.items():
                if v < 0:
                    raise TraceError(f"negative count in {c!r}: {v}", line)
            if counts["cpu_cycles"] == 0:
                raise TraceError("cpu_cycles is zero", line)
            seen = by_app.setdefault(app, {})
            if q in seen:
                raise TraceError(
                    f"duplicate row for app {app!r}, quantum {q} (first on line {seen[q][1]})", line)
            sample = CounterSample(app_id=app, quantum_index=q,
                                   core_id=_int_field(row, "core_id", line), **counts)
            seen[q] = (sample, line)
    out = {}
    for app, rows in by_app.items():
        qs = sorted(rows)
        for prev, cur in zip(qs, qs[1:]):
            if cur != prev + 1:
                raise TraceError(
                    f"app {app!r} jumps from quantum {prev} to {cur}", rows[cur][1])
        out[app] = [rows[q][0] for q in qs]
    return out


def write_trace(samples: Mapping[str, Sequence[CounterSample]] | Iterable[CounterSample],
                path) -> None:
    """Write samples as a trace; rows are ordered by quantum, then app id."""
    if isinstance(samples, Mapping):
        flat = [s for seq in samples.values() for s in seq]
    else:
        flat = list(samples)
    flat.sort(key=lambda s: (s.quantum_index, str(s.app_id)))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for s in flat:
            w.writerow([s.quantum_index, s.app_id, s.core_id, s.cpu_cycles, s.stall_frontend,
                        s.stall_backend, s.inst_retired, s.inst_spec])


@dataclass(frozen=True)
class ResultRow:
    workload: str
    policy: str
    repetition: int
    turnaround_quanta: float
    tt_speedup_vs_baseline: float
    ipc_geomean: float
    discarded_flag: bool


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(rows: Iterable[ResultRow], path) -> None:
    try:
        fh = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write results to {path}: {exc}") from None
    with fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])


def read_results(path) -> list[ResultRow]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise SchemaError(f"{path}: expected columns {list(RESULT_COLUMNS)}")
        for row in reader:
            try:
                out.append(ResultRow(
                    workload=row["workload"],
                    policy=row["policy"],
                    repetition=int(row["repetition"]),
                    turnaround_quanta=float(row["turnaround_quanta"]),
                    tt_speedup_vs_baseline=float(row["tt_speedup_vs_baseline"]),
                    ipc_geomean=float(row["ipc_geomean"]),
                    discarded_flag=row["discarded_flag"] == "1",
                ))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}, line {reader.line_num}: {exc}") from None
    return out


def write_ccdf(points: Iterable[tuple[float, float]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("threshold", "probability"))
        for t, p in points:
            w.writerow((repr(float(t)), repr(float(p))))


def read_ccdf(path) -> list[tuple[float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [(float(r["threshold"]), float(r["probability"])) for r in reader]
