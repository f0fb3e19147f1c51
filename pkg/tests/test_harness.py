import io
import math

import numpy as np
import pytest

from cubichelper.harness import cli
from cubichelper.harness.cli import cli_main
from cubichelper.harness.config import ConfigError, build_method, build_problem, load_config, parse_config_text
from cubichelper.harness.csvio import HEADER, read_trace_csv, write_trace_csv
from cubichelper.harness.presets import auxiliary_problem, crossover_table, preset_auxiliary, preset_lazy_vs_vr
from cubichelper.estimators import EstimatorConfig
from cubichelper.optimizer import DivergenceError, RunConfig, Trace, run
from cubichelper.problems import logreg_oracle, synthetic_classification

GOLDEN_HEADER = ("iter,f,grad_norm,mu_M,r,snapshot,grad_units,hess_units,factorizations,gradcost_total,"
                 "audit_grad_units,audit_hess_units,wall_ns")


def small_trace(S=3):
    oracle = logreg_oracle(synthetic_classification(100, 5, 0), l2=1e-3)
    return run(oracle, RunConfig(m=1, S=S, M=oracle.L, track_mu=True))[1]


def test_golden_header(tmp_path):
    assert ",".join(HEADER) == GOLDEN_HEADER
    write_trace_csv(Trace(), None, tmp_path / "empty.csv")
    assert (tmp_path / "empty.csv").read_text() == GOLDEN_HEADER + "\n"


def test_three_rows_four_lines_and_round_trip(tmp_path):
    trace = small_trace()
    path = tmp_path / "t.csv"
    write_trace_csv(trace, trace.ledger, path)
    assert len(path.read_text().splitlines()) == 4
    rows = read_trace_csv(path)
    for row, parsed in zip(trace, rows):
        assert parsed["f"] == row.f and parsed["grad_norm"] == row.grad_norm
        assert parsed["mu_M"] == row.mu_M and parsed["r"] == row.r
        assert parsed["gradcost_total"] == row.gradcost_total
        assert parsed["grad_units"] == row.grad_units and parsed["wall_ns"] == row.wall_ns
        assert parsed["snapshot"] == row.snapshot_refreshed


def test_nan_round_trip_and_untimed(tmp_path):
    trace = run(logreg_oracle(synthetic_classification(50, 3, 0), l2=1e-2), RunConfig(S=2, M=1.0))[1]
    stream = io.StringIO()
    write_trace_csv(trace, trace.ledger, stream, timing=False)
    path = tmp_path / "x.csv"
    path.write_text(stream.getvalue())
    rows = read_trace_csv(path)
    assert all(math.isnan(r["mu_M"]) and r["wall_ns"] == 0 for r in rows)


def test_ledger_mismatch_rejected(tmp_path):
    trace = small_trace()
    other = small_trace(S=1).ledger
    with pytest.raises(ValueError):
        write_trace_csv(trace, other, tmp_path / "bad.csv")


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "foreign.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_trace_csv(path)


def test_config_parsing():
    values = parse_config_text("""
        # comment
        problem = logreg
        n = 300   # trailing comment
        d = 6
        m = 4
        M = auto
        delta1 = 0.5
        x0 = 1, 2, 3
        audit = yes
    """)
    assert values["n"] == 300 and values["M"] == "auto" and values["audit"] is True
    assert np.array_equal(values["x0"], [1.0, 2.0, 3.0])
    for bad in ("nokey", "unknown = 1", "n = many", "audit = maybe"):
        with pytest.raises(ConfigError):
            parse_config_text(bad)


def test_config_build_and_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("n = 200\nd = 5\nvariant = lazy_vr\nm = 3\nS = 2\nx0 = 0.5\n")
    values = load_config(path, ["S=4", "seed=9"])
    oracle = build_problem(values)
    config = build_method(values, oracle)
    assert (oracle.n, oracle.d) == (200, 5)
    assert config.S == 4 and config.seed == 9 and config.M == oracle.L
    assert config.estimator.variant == "lazy_vr"
    assert np.array_equal(config.x0, np.full(5, 0.5))
    with pytest.raises(ConfigError):
        build_method(dict(values, M="auto"), oracle)
    with pytest.raises(ConfigError):
        build_method(dict(values, method="newton"), oracle)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
    with pytest.raises(ConfigError):
        build_problem(dict(values, problem="svm"))


def test_cli_cost_model(capsys):
    assert cli_main(["cost-model", "--n", "1000", "--d", "100"]) == 0
    out = capsys.readouterr().out
    assert "m_star" in out and "cost_star" in out
    assert "vr" in out and "lazy" in out


def test_cli_run_zero_iterations(capsys):
    assert cli_main(["run", "--set", "n=50", "--set", "d=3", "--set", "S=0"]) == 0
    assert capsys.readouterr().out == GOLDEN_HEADER + "\n"


def test_cli_run_writes_trace(tmp_path):
    out = tmp_path / "run.csv"
    argv = ["run", "--set", "n=100", "--set", "d=4", "--set", "S=3", "--output", str(out)]
    assert cli_main(argv) == 0
    first = out.read_bytes()
    assert len(read_trace_csv(out)) == 3
    assert cli_main(argv) == 0
    assert out.read_bytes() == first


@pytest.mark.parametrize("argv", [
    ["run", "--bogus"],
    ["frobnicate"],
    ["run", "--config", "/nonexistent/config.cfg"],
    ["run", "--set", "n=abc"],
    ["run", "--set", "M=auto"],
    ["cost-model", "--n", "0", "--d", "3"],
    ["sweep-m", "--m-values", "1,x"],
])
def test_cli_config_errors(argv, capsys):
    assert cli_main(argv) == 2
    assert capsys.readouterr().err


def test_cli_malformed_config(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("problem logreg\n")
    assert cli_main(["run", "--config", str(path)]) == 2


def test_cli_numerical_and_output_failures(monkeypatch, tmp_path):
    assert cli_main(["run", "--set", "n=50", "--set", "d=3", "--set", "S=1",
                     "--output", str(tmp_path / "missing" / "x.csv")]) == 3

    def explode(oracle, config):
        raise DivergenceError("objective rose")

    monkeypatch.setattr(cli, "run_method", explode)
    assert cli_main(["run", "--set", "n=50", "--set", "d=3"]) == 3


def test_cli_sweep_m(tmp_path, capsys):
    argv = ["sweep-m", "--set", "n=100", "--set", "d=4", "--set", "variant=lazy_exact", "--m-values", "1,3",
            "--iters", "6", "--outdir", str(tmp_path)]
    assert cli_main(argv) == 0
    assert len(read_trace_csv(tmp_path / "m3.csv")) == 6
    assert (tmp_path / "summary.csv").exists()


def test_cli_verify(capsys):
    assert cli_main(["verify", "--steps", "10"]) == 0
    assert "10/10" in capsys.readouterr().out


def test_cli_preset_determinism(tmp_path, capsys):
    args = ["preset", "lazy-vs-vr", "--seed", "7", "--m", "3", "--S", "2"]
    assert cli_main(args + ["--outdir", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--outdir", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "summary.csv" in files and "lazy_vr.csv" in files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_lazy_vs_vr_bookkeeping():
    traces, _ = preset_lazy_vs_vr(data=synthetic_classification(400, 10, 0), m=5, S=3)
    assert set(traces) == {"full_vr", "lazy_vr", "scn", "cn", "gd", "sgd"}
    assert traces["sgd"].ledger.hess_units == 0
    n = 400
    assert traces["lazy_vr"].ledger.hess_units <= traces["full_vr"].ledger.hess_units / 5 + n
    assert abs(traces["cn"][-1].f - traces["full_vr"][-1].f) <= 1e-3
    assert all(len(t) == 15 for t in traces.values())


def test_auxiliary_m1_is_cubic_newton():
    data = synthetic_classification(400, 8, 1)
    traces, _ = preset_auxiliary(data=data, m_values=(1,), seed=1, S=4)
    main, helper = auxiliary_problem(data, 1)
    M = max(main.L, helper.L)
    _, exact = run(main, RunConfig(m=1, S=4, M=M, estimator=EstimatorConfig("exact")))
    assert [r.f for r in traces["aux_m1"]] == pytest.approx([r.f for r in exact], rel=1e-12)
    assert traces["aux_m1"].ledger.helper_grad_units == 0


def test_auxiliary_fewer_labeled_accesses():
    data = synthetic_classification(400, 8, 2)
    traces, _ = preset_auxiliary(data=data, m_values=(1, 4), seed=2, S=1)
    # same labeled budget per round; larger m takes more steps with it
    assert traces["aux_m1"].ledger.grad_units == traces["aux_m4"].ledger.grad_units
    assert len(traces["aux_m4"]) == 4 * len(traces["aux_m1"])


def test_crossover_rows():
    rows = crossover_table(ns=(100,), ds=(1, 10, 100))
    assert [r["d"] for r in rows] == [1, 10, 100]
    assert rows[-1]["lazy_wins"]
