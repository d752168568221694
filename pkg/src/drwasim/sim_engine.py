"""Discrete-event loop: arrivals and teardowns against the live database.

One run is strictly single-threaded: events are processed in time order with
teardowns breaking ties ahead of arrivals (a freed wavelength is visible to a
request arriving at the same instant).  Blocked requests are dropped (loss
system).  Constraint validation runs at a fixed event cadence and any
violation aborts the run.

A warm-up window (first fraction of requests, 5% by default) is excluded
from the headline blocking probability to avoid empty-network bias; raw
whole-run figures are reported alongside.
"""

from __future__ import annotations

import heapq
import statistics
from dataclasses import dataclass, replace
from typing import Callable, Iterable

from .ep_router import EpConfig, EpRouter
from .errors import ConfigError, SimulationInvariantError
from .topology import Topology
from .traffic import LightpathRequest, TrafficConfig, generate_requests
from ._rng import derive_seed
from .wavelength import (AssignmentStrategy, WavelengthDatabase, make_strategy,
                         validate_constraints)

__all__ = ["RunMetrics", "RunConfig", "run", "run_stream", "replicate",
           "ReplicateResult", "sweep_generations", "CHECKPOINT_INTERVAL"]

CHECKPOINT_INTERVAL = 1000  # events between constraint validations

_TEARDOWN = 0  # tie-break: teardown before arrival at equal times
_ARRIVAL = 1


@dataclass(frozen=True, slots=True)
class RunMetrics:
    """Aggregate statistics of one simulation run.

    `blocking_probability` excludes the warm-up window; `_raw` variants cover
    every request.  In deterministic mode `mean_execution_time_ms` is logical
    (effort units times the per-expansion constant), so it is reproducible
    bit-for-bit; in wall-clock mode it is measured.
    """

    offered: int
    blocked: int
    accepted: int
    blocking_probability: float
    offered_total: int
    blocked_total: int
    blocking_probability_raw: float
    mean_execution_time_ms: float
    mean_expansions_per_request: float
    total_fitness_evaluations: int
    relaxations_total: int
    warmup_excluded: int
    per_generation_blocking: tuple[float, ...] | None = None


def run_stream(topology: Topology, requests: Iterable[LightpathRequest],
               ep: EpConfig, wavelengths: int, strategy: AssignmentStrategy,
               clock: Callable[[], float] | None = None, *,
               request_count: int | None = None,
               warmup_fraction: float = 0.05,
               backend: str | None = None,
               collect_per_generation: bool = True,
               db: WavelengthDatabase | None = None) -> RunMetrics:
    """Drive an explicit request stream through the router and database.

    `request_count` (when known) fixes the warm-up window up front; streams
    of unknown length get their warm-up recomputed at the end, which is
    equivalent because requests arrive in id order.
    """
    if not 0 <= warmup_fraction < 1:
        raise ConfigError(f"warmup fraction must be in [0, 1), got {warmup_fraction}")
    if db is None:
        db = WavelengthDatabase(topology.link_count, wavelengths)
    router = EpRouter(topology, ep, db, strategy, clock=clock, backend=backend)

    events: list[tuple[float, int, int]] = []
    pending: dict[int, LightpathRequest] = {}
    it = iter(requests)

    def _pull() -> None:
        req = next(it, None)
        if req is not None:
            pending[req.id] = req
            heapq.heappush(events, (req.arrival_time, _ARRIVAL, req.id))

    _pull()
    warmup_n = (int(warmup_fraction * request_count)
                if request_count is not None else None)

    n_events = 0
    offered_total = 0
    blocked_total = 0
    blocked_by_id: list[bool] = []
    sum_elapsed = 0.0
    sum_expansions = 0
    total_evals = 0
    relaxations = 0
    gen_hist = ([0] * (ep.generations + 2)) if collect_per_generation else None

    while events:
        t, kind, rid = heapq.heappop(events)
        n_events += 1
        if kind == _TEARDOWN:
            db.release(rid)
        else:
            req = pending.pop(rid)
            decision = router.route(req)
            offered_total += 1
            blocked_by_id.append(not decision.accepted)
            if not decision.accepted:
                blocked_total += 1
            sum_elapsed += decision.elapsed
            sum_expansions += decision.expansions
            total_evals += decision.fitness_evaluations
            relaxations += decision.relaxations
            if gen_hist is not None:
                ff = decision.first_feasible_generation
                gen_hist[ff if ff >= 0 else ep.generations + 1] += 1
            if decision.accepted:
                heapq.heappush(events, (decision.lightpath.teardown_time, _TEARDOWN, rid))
            _pull()
        if n_events % CHECKPOINT_INTERVAL == 0:
            violations = validate_constraints(db, topology)
            if violations:
                raise SimulationInvariantError(
                    f"constraint violations at event {n_events}: {violations[:3]}")

    violations = validate_constraints(db, topology)
    if violations:
        raise SimulationInvariantError(f"constraint violations after drain: {violations[:3]}")
    if db.active_count != 0 or not db.all_free():
        raise SimulationInvariantError(
            f"database did not drain: {db.active_count} active lightpaths remain")

    if warmup_n is None:
        warmup_n = int(warmup_fraction * offered_total)
    counted = blocked_by_id[warmup_n:]
    offered = len(counted)
    blocked = sum(counted)

    per_gen = None
    if gen_hist is not None and offered_total > 0:
        # Fraction of requests whose survivor was still infeasible after
        # generation g (g=0 is the founder); a within-run convergence curve.
        per_gen = tuple(sum(gen_hist[g + 1:]) / offered_total
                        for g in range(ep.generations + 1))

    return RunMetrics(
        offered=offered,
        blocked=blocked,
        accepted=offered - blocked,
        blocking_probability=(blocked / offered) if offered else 0.0,
        offered_total=offered_total,
        blocked_total=blocked_total,
        blocking_probability_raw=(blocked_total / offered_total) if offered_total else 0.0,
        mean_execution_time_ms=(sum_elapsed / offered_total * 1000.0) if offered_total else 0.0,
        mean_expansions_per_request=(sum_expansions / offered_total) if offered_total else 0.0,
        total_fitness_evaluations=total_evals,
        relaxations_total=relaxations,
        warmup_excluded=warmup_n if offered_total else 0,
        per_generation_blocking=per_gen,
    )


def run(topology: Topology, traffic: TrafficConfig, ep: EpConfig,
        wavelengths: int, strategy: AssignmentStrategy | str,
        clock: Callable[[], float] | None = None, *,
        warmup_fraction: float = 0.05, backend: str | None = None,
        collect_per_generation: bool = True) -> RunMetrics:
    """Simulate one full request stream defined by `traffic`."""
    if isinstance(strategy, str):
        strategy = make_strategy(strategy, derive_seed(ep.seed, 2))
    stream = generate_requests(traffic, topology) if traffic.request_count else iter(())
    return run_stream(topology, stream, ep, wavelengths, strategy, clock,
                      request_count=traffic.request_count,
                      warmup_fraction=warmup_fraction, backend=backend,
                      collect_per_generation=collect_per_generation)


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Everything needed to reproduce one run, minus the seed."""

    topology: Topology
    wavelengths: int
    traffic: TrafficConfig
    ep: EpConfig
    strategy: str = "first-fit"
    warmup_fraction: float = 0.05
    backend: str | None = None

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self,
                       traffic=replace(self.traffic, seed=seed),
                       ep=replace(self.ep, seed=seed))


@dataclass(frozen=True, slots=True)
class ReplicateResult:
    """Per-metric mean and sample standard deviation over replications."""

    runs: tuple[RunMetrics, ...]
    aggregates: dict[str, tuple[float, float]]

    def mean(self, metric: str) -> float:
        return self.aggregates[metric][0]

    def std(self, metric: str) -> float:
        return self.aggregates[metric][1]


_AGGREGATED_METRICS = ("blocking_probability", "blocking_probability_raw",
                       "mean_execution_time_ms", "mean_expansions_per_request",
                       "total_fitness_evaluations", "relaxations_total")


def _seeded_run(args: tuple[RunConfig, int]) -> RunMetrics:
    cfg, seed = args
    c = cfg.with_seed(seed)
    return run(c.topology, c.traffic, c.ep, c.wavelengths, c.strategy,
               warmup_fraction=c.warmup_fraction, backend=c.backend)


def replicate(cfg: RunConfig, replications: int, base_seed: int,
              workers: int = 1) -> ReplicateResult:
    """Run `replications` independent streams seeded base_seed, base_seed+1, ...

    Each run owns all its mutable state, so `workers > 1` fans the runs out
    over a process pool; results are joined in seed order, leaving every
    aggregate identical to the sequential ones.
    """
    if replications < 1:
        raise ConfigError(f"replications must be >= 1, got {replications}")
    jobs = [(cfg, base_seed + i) for i in range(replications)]
    if workers > 1 and replications > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=min(workers, replications)) as pool:
            runs = list(pool.map(_seeded_run, jobs))
    else:
        runs = [_seeded_run(job) for job in jobs]
    aggregates = {}
    for name in _AGGREGATED_METRICS:
        values = [float(getattr(r, name)) for r in runs]
        mean = statistics.fmean(values)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        aggregates[name] = (mean, std)
    return ReplicateResult(runs=tuple(runs), aggregates=aggregates)


def sweep_generations(cfg: RunConfig, g_values: list[int], replications: int,
                      base_seed: int, workers: int = 1) -> list[tuple[int, ReplicateResult]]:
    """One replicated experiment per generation count, paired seeds throughout."""
    if not g_values:
        raise ConfigError("g_values must be nonempty")
    out = []
    for g in g_values:
        c = replace(cfg, ep=replace(cfg.ep, generations=g))
        out.append((g, replicate(c, replications, base_seed, workers=workers)))
    return out
