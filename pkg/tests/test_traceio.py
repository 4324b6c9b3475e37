import csv

import numpy as np
import pytest

from synpa.errors import DataError, SchemaError, TraceError
from synpa.simulator import ccdf
from synpa.stacks import CounterSample
from synpa.traceio import (
    RESULT_COLUMNS,
    TRACE_COLUMNS,
    ResultRow,
    load_trace,
    read_ccdf,
    read_results,
    write_ccdf,
    write_results,
    write_trace,
)

HEADER = ",".join(TRACE_COLUMNS)


def _write(tmp_path, lines):
    p = tmp_path / "t.csv"
    p.write_text("\n".join(lines) + "\n")
    return p


def test_well_formed_trace(tmp_path):
    rows = [HEADER]
    for q in range(3):
        for app in ("a", "b"):
            rows.append(f"{q},{app},0,1000,100,200,800,1500")
    got = load_trace(_write(tmp_path, rows))
    assert sorted(got) == ["a", "b"]
    assert sum(len(v) for v in got.values()) == 6
    assert [s.quantum_index for s in got["a"]] == [0, 1, 2]
    assert got["b"][1].inst_spec == 1500


def test_duplicate_row_cites_line(tmp_path):
    p = _write(tmp_path, [HEADER, "0,a,0,1000,1,1,1,1", "0,a,0,1000,1,1,1,1"])
    with pytest.raises(TraceError) as exc:
        load_trace(p)
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


def test_negative_count_cites_line(tmp_path):
    p = _write(tmp_path, [HEADER, "0,a,0,1000,1,1,1,1", "1,a,0,1000,-5,1,1,1"])
    with pytest.raises(TraceError) as exc:
        load_trace(p)
    assert exc.value.line == 3 and "stall_frontend" in str(exc.value)


@pytest.mark.parametrize("rows,fragment", [
    (["quantum_index,app_id", "0,a"], "missing columns"),
    ([HEADER, "0,a,0,1000,1,1,x,1"], "inst_retired"),
    ([HEADER, "0,a,0,0,1,1,1,1"], "zero"),
    ([HEADER, "0,a,0,1000,1,1,1,1", "2,a,0,1000,1,1,1,1"], "jumps"),
    ([HEADER, "0,a,0,1000,1,1,1"], "fields"),
])
def test_malformed_traces(tmp_path, rows, fragment):
    with pytest.raises(TraceError, match=fragment):
        load_trace(_write(tmp_path, rows))


def test_trace_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    samples = {}
    for app in ("x", "y", "z"):
        samples[app] = [CounterSample(int(rng.integers(1, 10**9)), *map(int, rng.integers(0, 10**8, 4)),
                                      app_id=app, quantum_index=q, core_id=q % 2)
                        for q in range(5)]
    p = tmp_path / "t.csv"
    write_trace(samples, p)
    assert load_trace(p) == samples


def test_results_round_trip(tmp_path):
    rows = [ResultRow("Mixed-01", "SYNPA4_N", 0, 123.456789012345, 1.0 / 3.0, 2.5e-3, False),
            ResultRow("Mixed-01", "RANDOM_BASELINE", 1, 150.0, 1.0, 1.25, True)]
    p = tmp_path / "r.csv"
    write_results(rows, p)
    assert read_results(p) == rows
    with open(p) as fh:
        assert tuple(next(csv.reader(fh))) == RESULT_COLUMNS


def test_empty_results_header_only(tmp_path):
    p = tmp_path / "r.csv"
    write_results([], p)
    assert p.read_text() == ",".join(RESULT_COLUMNS) + "\n"
    assert read_results(p) == []


def test_unwritable_results(tmp_path):
    with pytest.raises(DataError):
        write_results([], tmp_path / "missing" / "r.csv")


def test_wrong_result_header(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError):
        read_results(p)


def test_ccdf_file_monotone(tmp_path):
    rng = np.random.default_rng(1)
    pts = ccdf(rng.uniform(0, 0.6, 200))
    p = tmp_path / "c.csv"
    write_ccdf(pts, p)
    back = read_ccdf(p)
    assert back == pts
    probs = [v for _, v in back]
    assert probs[0] <= 1.0 and all(b <= a for a, b in zip(probs, probs[1:]))
