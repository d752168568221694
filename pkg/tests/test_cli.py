"""CLI parsing, CSV output contract, exit codes."""

import csv
import io

import pytest

from drwasim.cli import (CSV_HEADER, ExperimentConfig, compare_strategies,
                         config_from_row, main, parse_config, run_experiment,
                         _run_config)
from drwasim.errors import ConfigError

FAST = ["--requests", "300", "--replications", "2", "--generations", "2",
        "--offspring", "5"]


def _parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(CSV_HEADER)
    return rows[1:]


def test_defaults():
    cfg = parse_config([])
    assert cfg == ExperimentConfig()
    assert cfg.wavelengths == 8
    assert cfg.load_erlang == 60.0
    assert cfg.mean_holding == 10.0
    assert cfg.holding_kind == "exponential"
    assert cfg.strategy == "first-fit"
    assert cfg.requests == 100_000
    assert cfg.generations == 8 and cfg.offspring == 15
    assert cfg.hop_bound == 4
    assert cfg.init_budget == 200 and cfg.mutation_budget == 200
    assert cfg.replications == 10
    assert cfg.warmup_fraction == 0.05


def test_strategy_and_lambda_derivation():
    cfg = parse_config(["--strategy", "round-robin", "--load", "60"])
    assert cfg.strategy == "round-robin"
    rc = _run_config(cfg)
    assert rc.traffic.arrival_rate == pytest.approx(6.0)  # 60 Erlang / 10


def test_pareto_holding_lambda():
    cfg = parse_config(["--holding", "pareto:1.2,1", "--load", "60"])
    rc = _run_config(cfg)
    assert rc.traffic.holding.mean() == pytest.approx(6.0)
    assert rc.traffic.arrival_rate == pytest.approx(10.0)
    assert rc.traffic.offered_load() == pytest.approx(60.0)


def test_pareto_matched_holding():
    cfg = parse_config(["--holding", "pareto-matched:1.5", "--mean-holding", "10"])
    model = cfg.holding_model()
    assert model.mean() == pytest.approx(10.0)
    assert model.location == 1.5


def test_invalid_wavelengths_names_field(capsys):
    assert main(["--wavelengths", "0"]) == 1
    assert "W" in capsys.readouterr().err


def test_unknown_flag_exits_one(capsys):
    assert main(["--no-such-flag"]) == 1


def test_bad_strategy_exits_one(capsys):
    assert main(["--strategy", "best-fit"]) == 1


def test_missing_topology_file_exits_two(capsys):
    assert main(["--topology", "/nonexistent/x.topo", *FAST]) == 2


def test_config_file_and_flag_override(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("load = 40\nstrategy = round-robin\nwavelengths = 12\n# comment\n")
    cfg = parse_config(["--config", str(f), "--load", "70"])
    assert cfg.load_erlang == 70.0  # flag wins
    assert cfg.strategy == "round-robin"
    assert cfg.wavelengths == 12


def test_config_file_unknown_key(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("wavelngths = 8\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(["--config", str(f)])


def test_single_run_rows():
    rows = run_experiment(parse_config(FAST))
    assert len(rows) == 3
    metrics = [r[10] for r in rows]
    assert metrics == ["blocking_probability", "mean_execution_time_ms",
                       "total_fitness_evaluations"]
    assert all(r[0] == "single" for r in rows)


def test_sweep_generations_row_count():
    rows = run_experiment(parse_config([*FAST, "--sweep", "generations", "1:3"]))
    assert len(rows) == 3 * 3
    assert {r[7] for r in rows} == {"1", "2", "3"}


def test_sweep_wavelengths_blocking_nonincreasing():
    rows = run_experiment(parse_config(
        ["--requests", "2000", "--replications", "2", "--sweep", "wavelengths", "4,8"]))
    blocking = {int(r[2]): float(r[11]) for r in rows if r[10] == "blocking_probability"}
    assert blocking[8] <= blocking[4]


def test_compare_strategies_rows():
    rows = compare_strategies(parse_config([*FAST, "--compare-strategies"]))
    assert len(rows) == 9
    assert [r[5] for r in rows[::3]] == ["first-fit", "random", "round-robin"]


def test_csv_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*FAST, "--output", str(out1)]) == 0
    assert main([*FAST, "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_stdout_output(capsys):
    assert main(FAST) == 0
    rows = _parse_csv(capsys.readouterr().out)
    assert len(rows) == 3


def test_row_config_round_trip():
    for argv in (FAST,
                 [*FAST, "--holding", "pareto:1.2,1", "--strategy", "round-robin"],
                 [*FAST, "--load", "80", "--wavelengths", "12", "--seed", "777"]):
        cfg = parse_config(argv)
        rows = run_experiment(cfg)
        for row in rows:
            again = config_from_row(row)
            assert again.topology == cfg.topology
            assert again.wavelengths == cfg.wavelengths
            assert again.load_erlang == cfg.load_erlang
            assert again.holding_label() == cfg.holding_label()
            assert again.strategy == cfg.strategy
            assert again.requests == cfg.requests
            assert again.generations == cfg.generations
            assert again.offspring == cfg.offspring
            assert again.base_seed == cfg.base_seed


def test_topology_file_input(tmp_path):
    topo = tmp_path / "line.topo"
    topo.write_text("nodes 3\nlink 0 1 1.0\nlink 1 2 1.0\n")
    rows = run_experiment(parse_config(["--topology", str(topo), *FAST]))
    assert len(rows) == 3
    assert rows[0][1] == str(topo)
