import json

import pytest
from click.testing import CliRunner

from dqclayout.assembler import MetricsReport
from dqclayout.bench import BENCHMARK_SUITE
from dqclayout.cli import main
from dqclayout.partition import PartitionPlan
from dqclayout.pipeline import (NOT_SIMULATED, RunConfig, StageError, run_pipeline, run_suite,
                                suite_config)
from dqclayout.serialize import emit_report

GHZ6_PART = ("partitions: [q0-q1, q2-q3, q4-q5]\nassignment: [Q0, Q1, Q2]\n"
             "backends: {Q0: FakeVigoV2, Q1: FakeAthensV2, Q2: FakeLagosV2}\n")


@pytest.fixture
def part_file(tmp_path):
    p = tmp_path / "ghz6.yaml"
    p.write_text(GHZ6_PART)
    return p


def test_ghz6_pipeline():
    r = run_pipeline(suite_config(BENCHMARK_SUITE[0]))
    m = r.report
    assert (m.n_data, m.n_comm) == (6, 4)
    assert m.simulation == "ok"
    assert m.error_rate <= 1e-3
    assert m.top_state in ("000000", "111111")


def test_qaoa10_not_simulated():
    r = run_pipeline(suite_config(BENCHMARK_SUITE[11]))
    assert r.report.n_total == 142
    assert r.report.simulation == NOT_SIMULATED
    assert r.report.hellinger_fidelity is None


def test_require_simulation_refuses():
    with pytest.raises(StageError) as e:
        run_pipeline(suite_config(BENCHMARK_SUITE[9], require_simulation=True))
    assert e.value.exit_code == 4 and e.value.stage == "simulate"


def test_overlapping_partition_is_stage_one_error():
    plan = PartitionPlan.from_ranges(["q0-q3", "q3-q5"], ["Q0", "Q1"],
                                     {"Q0": "FakeVigoV2", "Q1": "FakeAthensV2"})
    with pytest.raises(StageError) as e:
        run_pipeline(RunConfig(bench="ghz:6", plan=plan))
    assert e.value.stage == "partition" and e.value.exit_code != 0


def test_exactly_one_source():
    with pytest.raises(StageError) as e:
        run_pipeline(RunConfig(bench="ghz:6", circuit_file="x.qasm", partition_file="p.yaml"))
    assert e.value.exit_code == 2


def test_capacity_is_compile_error():
    plan = PartitionPlan.from_ranges(["q0-q5"], ["Q0"], {"Q0": "FakeVigoV2"})
    with pytest.raises(StageError) as e:
        run_pipeline(RunConfig(bench="ghz:6", plan=plan))
    assert e.value.exit_code == 3 and e.value.stage == "schedule"


def test_deterministic_outputs(tmp_path, part_file):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_pipeline(RunConfig(bench="ghz:6", partition_file=str(part_file), shots=2000,
                               seed=5, out_dir=str(out)))
    for name in ("layout.json", "layout.qasm", "report.json", "report.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_emit_report_shapes():
    assert len(emit_report([]).splitlines()) == 1
    r = MetricsReport(name="x")
    assert len(emit_report([r]).splitlines()) == 2
    rows = emit_report([res.report for res in run_suite(simulate=False)]).splitlines()
    assert len(rows) == 13
    assert len({len(line.split()) for line in rows[1:4]}) == 1


def test_cli_compile_and_report(tmp_path, part_file):
    runner = CliRunner()
    out = tmp_path / "run"
    res = runner.invoke(main, ["compile", "--bench", "ghz:6", "--partition", str(part_file),
                               "--shots", "5000", "--seed", "1", "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "GHZ" in res.output.upper()
    doc = json.loads((out / "layout.json").read_text())
    assert len(doc["qpus"]) == 3
    res = runner.invoke(main, ["report", "--in", str(out), "--in", str(out)])
    assert res.exit_code == 0
    assert len(res.output.splitlines()) == 3


def test_cli_exit_codes(tmp_path, part_file):
    runner = CliRunner()
    bad = tmp_path / "bad.yaml"
    bad.write_text("partitions: [q0-q3, q3-q5]\nassignment: [Q0, Q1]\n")
    res = runner.invoke(main, ["compile", "--bench", "ghz:6", "--partition", str(bad), "--no-sim"])
    assert res.exit_code == 2 and "partition" in res.output
    res = runner.invoke(main, ["compile", "--bench", "qaoa:6", "--partition", str(part_file),
                               "--require-sim"])
    assert res.exit_code == 4
    res = runner.invoke(main, ["compile", "--bench", "qaoa:6", "--partition", str(part_file),
                               "--mode", "strict", "--no-sim"])
    assert res.exit_code == 3
    missing = runner.invoke(main, ["compile", "--circuit", str(tmp_path / "none.qasm"),
                                   "--partition", str(part_file)])
    assert missing.exit_code == 2


def test_cli_qasm_input(tmp_path):
    (tmp_path / "bell.qasm").write_text(
        'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\ncreg c[2];\n'
        "h q[0];\ncx q[0],q[1];\nmeasure q -> c;\n")
    (tmp_path / "p.yaml").write_text("partitions: [q0, q1]\nassignment: [Q0, Q1]\n"
                                     "backends: {Q0: FakeVigoV2, Q1: FakeVigoV2}\n")
    res = CliRunner().invoke(main, ["compile", "--circuit", str(tmp_path / "bell.qasm"),
                                    "--partition", str(tmp_path / "p.yaml"), "--shots", "1000"])
    assert res.exit_code == 0, res.output
    assert '"00"' in res.output and '"11"' in res.output
