import csv
import io

import pytest

from core.adjoint import adjoint_extended
from core.crt import adjoint_via_crt
from core.domain import INTEGERS
from core.errors import InvalidSpecError, ResultMismatchError
from core.multiply import MultiplyConfig
from engine.bench import CSV_HEADER, BenchRecord, efficiency_factor, scaling_series, write_csv
from engine.graph import TaskGraph
from utils.generators import RandomSpec, generate_matrix


def test_efficiency_factor():
    assert efficiency_factor(12.5, 8, 100, 1) == pytest.approx(100)
    assert efficiency_factor(25, 8, 100, 1) == pytest.approx(50)
    assert efficiency_factor(60, 2, 60, 2) == pytest.approx(100)
    with pytest.raises(InvalidSpecError):
        efficiency_factor(0, 2, 60, 1)


def summing_run(engine):
    graph = TaskGraph("bench")
    parts = [graph.add("part", lambda k=k: k * k) for k in range(4)]
    total = graph.add("total", lambda *values: sum(values), *parts)
    return engine.run(graph)[total]


def test_single_count_is_the_baseline():
    (record,) = scaling_series("sum", summing_run, [1], order=4, density=1.0, domain="int")
    assert record.workers == 1
    assert record.efficiency_pct == 100
    assert record.seconds >= 0


def test_series_over_counts():
    records = scaling_series("sum", summing_run, [1, 2, 4], order=4, density=0.5, domain="int", repetitions=3)
    assert [r.workers for r in records] == [1, 2, 4]
    assert records[0].efficiency_pct == 100
    assert all(r.op == "sum" and r.order == 4 and r.density == 0.5 for r in records)


def test_divergent_output_raises():
    corrupt = lambda worker, node_id, value: value + 1 if worker == 1 else value
    with pytest.raises(ResultMismatchError):
        scaling_series("sum", summing_run, [1, 2], order=4, density=1.0, domain="int",
                       fault_injector=corrupt)


def test_series_validation():
    with pytest.raises(InvalidSpecError):
        scaling_series("sum", summing_run, [2, 1], order=4, density=1.0, domain="int")
    with pytest.raises(InvalidSpecError):
        scaling_series("sum", summing_run, [1], order=4, density=1.0, domain="int", repetitions=2)


def test_write_csv():
    records = [BenchRecord("adjoint:standard", 8, 1.0, "int", 1, 0.5, 100.0),
               BenchRecord("adjoint:standard", 8, 1.0, "int", 2, 0.3, 83.333)]
    stream = io.StringIO()
    write_csv(records, stream)
    rows = list(csv.reader(io.StringIO(stream.getvalue())))
    assert stream.getvalue().splitlines()[0] == "op,order,density,domain,workers,seconds,efficiency_pct"
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1] == ["adjoint:standard", "8", "1", "int", "1", "0.500000", "100.00"]
    assert rows[2][-1] == "83.33"


@pytest.mark.slow
def test_dense_and_sparse_adjoint_series(tmp_path):
    cfg = MultiplyConfig(strassen_min_order=16)
    runs = {
        "adjoint:crt": lambda m: lambda engine: adjoint_via_crt(m, cfg=cfg, engine=engine),
        "adjoint:standard": lambda m: lambda engine: adjoint_extended(m, cfg=cfg, engine=engine),
    }
    records = []
    for density in (1.0, 0.05):
        m = generate_matrix(RandomSpec(order=32, density=density, bit_width=8), 11, INTEGERS, 8)
        for label, run in runs.items():
            records += scaling_series(label, run(m), [1, 2, 4], order=32, density=float(m.density()),
                                      domain="int", granularity=16)
    path = tmp_path / "adjoint_scaling.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_csv(records, f)
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 12
    assert {row["op"] for row in rows} == set(runs)
    assert {row["density"] for row in rows} == {"1", "0.0498047"}
    baselines = [row for row in rows if row["workers"] == "1"]
    assert len(baselines) == 4
    assert all(row["efficiency_pct"] == "100.00" for row in baselines)
    assert all(float(row["seconds"]) > 0 for row in rows)
