"""Command-line front end: single runs, parameter sweeps, strategy comparison.

Emits CSV rows (one per config point and metric) with the header::

    experiment,topology,W,load,holding,strategy,requests,G,C,seed,metric,mean,std

Exit codes: 0 success, 1 usage error, 2 runtime failure.  Flags override
values read from an optional ``key=value`` config file.  Examples::

    drwasim --load 60 --strategy round-robin --output out.csv
    drwasim --sweep generations 1:8 --requests 100000
    drwasim --sweep wavelengths 4,8,12,16
    drwasim --compare-strategies --holding pareto:1.2,1
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, replace, fields
from pathlib import Path

from .ep_router import EpConfig
from .errors import ConfigError, DrwaError
from .sim_engine import ReplicateResult, RunConfig, replicate
from .topology import load_topology, nsf14
from .traffic import (Exponential, Pareto, TrafficConfig, pareto_mean,
                      solve_pareto_shape_for_mean)
from .wavelength import STRATEGY_NAMES

__all__ = ["ExperimentConfig", "parse_config", "run_experiment",
           "compare_strategies", "main", "CSV_HEADER"]

CSV_HEADER = ("experiment", "topology", "W", "load", "holding", "strategy",
              "requests", "G", "C", "seed", "metric", "mean", "std")

_CSV_METRICS = (("blocking_probability", "blocking_probability"),
                ("mean_execution_time_ms", "mean_execution_time_ms"),
                ("total_fitness_evaluations", "total_fitness_evaluations"))


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """Flat experiment description as assembled from flags and config file."""

    topology: str = "nsf14"
    wavelengths: int = 8
    load_erlang: float = 60.0
    mean_holding: float = 10.0
    holding_kind: str = "exponential"  # exponential | pareto:a,xm | pareto-matched:xm
    strategy: str = "first-fit"
    requests: int = 100_000
    generations: int = 8
    offspring: int = 15
    hop_bound: int = 4
    init_budget: int = 200
    mutation_budget: int = 200
    replications: int = 10
    base_seed: int = 12345
    warmup_fraction: float = 0.05
    workers: int = 1
    backend: str | None = None
    sweep: tuple[str, tuple[float, ...]] | None = None
    compare_strategies: bool = False
    output: str | None = None

    def holding_model(self):
        kind = self.holding_kind
        if kind == "exponential":
            return Exponential(self.mean_holding)
        if kind.startswith("pareto-matched:"):
            location = float(kind.split(":", 1)[1])
            shape = solve_pareto_shape_for_mean(self.mean_holding, location)
            return Pareto(shape, location)
        if kind.startswith("pareto:"):
            shape_s, loc_s = kind.split(":", 1)[1].split(",")
            return Pareto(float(shape_s), float(loc_s))
        raise ConfigError(f"holding kind {kind!r} not understood")

    def holding_label(self) -> str:
        model = self.holding_model()
        if isinstance(model, Exponential):
            return f"exponential({model.mean_holding:.10g})"
        return f"pareto({model.shape:.10g},{model.location:.10g})"


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors per the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="drwasim",
                description="WDM dynamic routing and wavelength assignment simulator")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--topology", help="'nsf14' or a topology file path")
    p.add_argument("--wavelengths", type=int, help="wavelengths per fiber (W)")
    p.add_argument("--load", type=float, dest="load_erlang", help="offered load in Erlang")
    p.add_argument("--mean-holding", type=float, dest="mean_holding",
                   help="mean holding time (time units)")
    p.add_argument("--holding", dest="holding_kind",
                   help="exponential | pareto:SHAPE,LOC | pareto-matched:LOC")
    p.add_argument("--strategy", choices=STRATEGY_NAMES)
    p.add_argument("--requests", type=int, help="requests per run")
    p.add_argument("--generations", type=int, help="EP generations (G)")
    p.add_argument("--offspring", type=int, help="offspring per generation (C)")
    p.add_argument("--hop-bound", type=int, dest="hop_bound")
    p.add_argument("--init-budget", type=int, dest="init_budget",
                   help="walk attempts per bound level during initialization")
    p.add_argument("--mutation-budget", type=int, dest="mutation_budget",
                   help="walk attempts per bound level during mutation")
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int, dest="base_seed")
    p.add_argument("--warmup", type=float, dest="warmup_fraction",
                   help="fraction of requests excluded from blocking stats")
    p.add_argument("--backend", choices=("auto", "python", "cython"),
                   help="routing kernel backend")
    p.add_argument("--workers", type=int,
                   help="processes for fanning out replications (default 1)")
    p.add_argument("--sweep", nargs=2, metavar=("DIM", "VALUES"),
                   help="sweep generations|wavelengths|load over START:STOP[:STEP] or v1,v2,...")
    p.add_argument("--compare-strategies", action="store_true", default=None,
                   help="run all three assignment strategies with paired seeds")
    p.add_argument("--output", help="CSV output path (default: stdout)")
    return p


_INT_KEYS = {"wavelengths", "requests", "generations", "offspring", "hop_bound",
             "init_budget", "mutation_budget", "replications", "base_seed",
             "workers"}
_FLOAT_KEYS = {"load_erlang", "mean_holding", "warmup_fraction"}
_FILE_ALIASES = {"load": "load_erlang", "mean-holding": "mean_holding",
                 "holding": "holding_kind", "seed": "base_seed",
                 "warmup": "warmup_fraction", "hop-bound": "hop_bound",
                 "init-budget": "init_budget", "mutation-budget": "mutation_budget"}


def _read_config_file(path: str) -> dict:
    values: dict = {}
    valid = {f.name for f in fields(ExperimentConfig)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _FILE_ALIASES.get(key, key.replace("-", "_"))
        if key not in valid:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        elif key == "compare_strategies":
            values[key] = value.lower() in ("1", "true", "yes")
        else:
            values[key] = value
    return values


def _parse_sweep(dim: str, value_list: str) -> tuple[str, tuple[float, ...]]:
    if dim not in ("generations", "wavelengths", "load"):
        raise ConfigError(f"sweep dimension {dim!r} not supported "
                          "(generations, wavelengths, load)")
    if "," in value_list:
        values = tuple(float(v) for v in value_list.split(","))
    elif ":" in value_list:
        parts = [float(v) for v in value_list.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1.0
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ConfigError(f"sweep range {value_list!r} must be START:STOP[:STEP]")
        if step <= 0 or stop < start:
            raise ConfigError(f"sweep range {value_list!r} is empty or descending")
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(v)
            v += step
        values = tuple(values)
    else:
        values = (float(value_list),)
    if not values:
        raise ConfigError(f"sweep {dim} produced no values")
    return dim, values


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.wavelengths < 1:
        raise ConfigError(f"wavelengths (W) must be >= 1, got {cfg.wavelengths}")
    if cfg.load_erlang <= 0:
        raise ConfigError(f"load (Erlang) must be > 0, got {cfg.load_erlang}")
    if cfg.mean_holding <= 0:
        raise ConfigError(f"mean holding time must be > 0, got {cfg.mean_holding}")
    if cfg.requests < 0:
        raise ConfigError(f"requests must be >= 0, got {cfg.requests}")
    if cfg.replications < 1:
        raise ConfigError(f"replications must be >= 1, got {cfg.replications}")
    if cfg.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {cfg.workers}")
    if not 0 <= cfg.warmup_fraction < 1:
        raise ConfigError(f"warmup fraction must be in [0, 1), got {cfg.warmup_fraction}")
    if cfg.strategy not in STRATEGY_NAMES:
        raise ConfigError(f"strategy must be one of {STRATEGY_NAMES}, got {cfg.strategy!r}")
    cfg.holding_model()  # validates holding parameters
    EpConfig(generations=cfg.generations, offspring_count=cfg.offspring,
             hop_bound=cfg.hop_bound, init_budget=cfg.init_budget,
             mutation_budget=cfg.mutation_budget)
    return cfg


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from argv (defaults applied)."""
    ns = _build_parser().parse_args(argv)
    values: dict = {}
    if ns.config:
        values.update(_read_config_file(ns.config))
    for f in fields(ExperimentConfig):
        flag_value = getattr(ns, f.name, None)
        if flag_value is not None:
            values[f.name] = flag_value
    if isinstance(values.get("sweep"), (list, tuple)) and len(values["sweep"]) == 2 \
            and isinstance(values["sweep"][1], str):
        values["sweep"] = _parse_sweep(values["sweep"][0], values["sweep"][1])
    if values.get("compare_strategies") is None:
        values.pop("compare_strategies", None)
    return _validate(ExperimentConfig(**values))


def _run_config(cfg: ExperimentConfig) -> RunConfig:
    if cfg.topology == "nsf14":
        topo = nsf14()
    else:
        topo = load_topology(Path(cfg.topology).read_text())
    holding = cfg.holding_model()
    arrival_rate = cfg.load_erlang / holding.mean()
    traffic = TrafficConfig(arrival_rate=arrival_rate, holding=holding,
                            request_count=cfg.requests, seed=cfg.base_seed)
    ep = EpConfig(generations=cfg.generations, offspring_count=cfg.offspring,
                  hop_bound=cfg.hop_bound, init_budget=cfg.init_budget,
                  mutation_budget=cfg.mutation_budget, seed=cfg.base_seed)
    return RunConfig(topology=topo, wavelengths=cfg.wavelengths, traffic=traffic,
                     ep=ep, strategy=cfg.strategy,
                     warmup_fraction=cfg.warmup_fraction, backend=cfg.backend)


def _rows(experiment: str, cfg: ExperimentConfig, result: ReplicateResult) -> list[list[str]]:
    rows = []
    for metric_name, key in _CSV_METRICS:
        mean, std = result.aggregates[key]
        rows.append([experiment, cfg.topology, str(cfg.wavelengths),
                     f"{cfg.load_erlang:.10g}", cfg.holding_label(), cfg.strategy,
                     str(cfg.requests), str(cfg.generations), str(cfg.offspring),
                     str(cfg.base_seed), metric_name, f"{mean:.10g}", f"{std:.10g}"])
    return rows


def run_experiment(cfg: ExperimentConfig) -> list[list[str]]:
    """Execute the experiment described by `cfg` and return its CSV rows."""
    if cfg.compare_strategies:
        return compare_strategies(cfg)
    if cfg.sweep is None:
        result = replicate(_run_config(cfg), cfg.replications, cfg.base_seed,
                           workers=cfg.workers)
        return _rows("single", cfg, result)

    dim, values = cfg.sweep
    rows = []
    for v in values:
        if dim == "generations":
            point = replace(cfg, generations=int(v), sweep=None)
        elif dim == "wavelengths":
            point = replace(cfg, wavelengths=int(v), sweep=None)
        else:
            point = replace(cfg, load_erlang=float(v), sweep=None)
        result = replicate(_run_config(point), point.replications, point.base_seed,
                           workers=point.workers)
        rows.extend(_rows(f"sweep-{dim}", point, result))
    return rows


def compare_strategies(cfg: ExperimentConfig) -> list[list[str]]:
    """Run all three assignment strategies against paired seeds."""
    rows = []
    for name in STRATEGY_NAMES:
        point = replace(cfg, strategy=name, compare_strategies=False, sweep=None)
        result = replicate(_run_config(point), point.replications, point.base_seed,
                           workers=point.workers)
        rows.extend(_rows("compare-strategies", point, result))
    return rows


def config_from_row(row: list[str]) -> ExperimentConfig:
    """Rebuild the config point encoded in a CSV row (round-trip helper)."""
    topology, w, load, holding, strategy = row[1], row[2], row[3], row[4], row[5]
    requests, g, c, seed = row[6], row[7], row[8], row[9]
    if holding.startswith("exponential("):
        mean_holding = float(holding[len("exponential("):-1])
        holding_kind = "exponential"
    else:
        inner = holding[len("pareto("):-1]
        shape, location = inner.split(",")
        holding_kind = f"pareto:{shape},{location}"
        mean_holding = pareto_mean(float(shape), float(location))
    argv = ["--topology", topology, "--wavelengths", w, "--load", load,
            "--holding", holding_kind, "--mean-holding", f"{mean_holding:.10g}",
            "--strategy", strategy, "--requests", requests,
            "--generations", g, "--offspring", c, "--seed", seed]
    return parse_config(argv)


def _write_csv(rows: list[list[str]], output: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    text = buf.getvalue()
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"drwasim: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        rows = run_experiment(cfg)
        _write_csv(rows, cfg.output)
    except (DrwaError, OSError) as exc:
        print(f"drwasim: runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0
