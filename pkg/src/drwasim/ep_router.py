"""Evolutionary-programming router: per-request path search plus wavelength grant.

A single-individual population is evolved by suffix-regenerating mutation
(15 offspring per generation by default) under elitist selection; the
survivor of the final generation is accepted iff some wavelength is free on
its whole path, in which case the configured assignment strategy grants one
and the lightpath is reserved.

Two interchangeable kernels execute the search: a compiled extension
(`drwasim._kernel`, built with Cython) and a pure-Python fallback
(`drwasim._kernel_py`).  They consume the same random stream and produce
bit-identical decisions; the compiled one is simply much faster.  Selection
happens at import, and can be forced via the ``DRWASIM_KERNEL`` environment
variable or the ``backend=`` argument of :class:`EpRouter`.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Callable

from . import _kernel_py
from ._rng import SplitMix64, derive_seed
from .errors import BackendUnavailableError, ConfigError
from .topology import Topology
from .traffic import LightpathRequest
from .wavelength import (ActiveLightpath, AssignmentStrategy, WavelengthDatabase,
                         choose_wavelength)

__all__ = ["EpConfig", "Chromosome", "RouteDecision", "EpRouter",
           "route_request", "random_path", "initialize", "mutate",
           "evaluate_fitness", "select", "active_backend",
           "available_backends"]

log = logging.getLogger(__name__)

_STRATEGY_CODE = {"first-fit": 0, "round-robin": 1, "random": 2}


def _try_import_cython():
    try:
        from . import _kernel  # compiled extension, may be absent
        return _kernel
    except ImportError:
        return None


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _try_import_cython() else ("python",)


def _resolve_backend(name: str | None):
    """Return (kernel_module, backend_name) for the requested backend."""
    if name is None:
        name = os.environ.get("DRWASIM_KERNEL", "auto")
    if name in ("auto", "cython"):
        mod = _try_import_cython()
        if mod is not None:
            return mod, "cython"
        if name == "cython":
            raise BackendUnavailableError(
                "compiled kernel requested but drwasim._kernel is not installed")
    elif name != "python":
        raise ConfigError(f"unknown kernel backend {name!r}; expected auto, cython or python")
    return _kernel_py, "python"


def active_backend() -> str:
    """Backend the router will use by default in this environment."""
    return _resolve_backend(None)[1]


@dataclass(frozen=True, slots=True)
class EpConfig:
    """Search parameters for the evolutionary router.

    `init_budget` / `mutation_budget` are walk-attempt budgets per hop-bound
    level; when `wall_clock_thresholds` (seconds for initialization and
    mutation) is set, time thresholds replace the budgets and setup effort is
    measured with the injected clock instead of counted, which sacrifices
    reproducibility.
    """

    generations: int = 8
    offspring_count: int = 15
    hop_bound: int = 4
    init_budget: int = 200
    mutation_budget: int = 200
    seconds_per_expansion: float = 1e-6
    wall_clock_thresholds: tuple[float, float] | None = None
    seed: int = 12345

    def __post_init__(self):
        if self.generations < 1:
            raise ConfigError(f"generations (G) must be >= 1, got {self.generations}")
        if self.offspring_count < 1:
            raise ConfigError(f"offspring count (C) must be >= 1, got {self.offspring_count}")
        if self.hop_bound < 1:
            raise ConfigError(f"hop bound must be >= 1, got {self.hop_bound}")
        if self.init_budget < 1 or self.mutation_budget < 1:
            raise ConfigError("walk budgets must be >= 1")
        if self.seconds_per_expansion <= 0:
            raise ConfigError("seconds_per_expansion must be > 0")
        if self.wall_clock_thresholds is not None:
            t1, t2 = self.wall_clock_thresholds
            if t1 <= 0 or t2 <= 0:
                raise ConfigError("wall clock thresholds must be > 0")

    @property
    def effort_unit(self) -> float:
        """Seconds per effort unit: tau in budget mode, 1 in wall-clock mode."""
        return 1.0 if self.wall_clock_thresholds is not None else self.seconds_per_expansion


@dataclass(slots=True)
class Chromosome:
    """A candidate path with its construction bookkeeping and fitness fields.

    `setup_effort` is the construction effort in kernel units (node
    expansions, or seconds in wall-clock mode); `setup_time` is the same in
    seconds and is what the fitness divides by.
    """

    genes: tuple[int, ...]
    link_ids: tuple[int, ...]
    cost_sum: float
    hop_count: int
    setup_effort: float
    setup_time: float
    bound_used: int
    mutation_locus: int | None = None
    degenerate: bool = False
    free_factor: int | None = None
    chosen_wavelength: int | None = None
    fitness: float | None = None

    @property
    def length(self) -> int:
        return len(self.genes)

    def structurally_valid(self, topology: Topology) -> bool:
        """Loop-free, adjacency-respecting, and consistent with its links."""
        g = self.genes
        if len(g) < 2 or len(set(g)) != len(g):
            return False
        if len(self.link_ids) != len(g) - 1:
            return False
        try:
            return all(topology.link_between(g[i], g[i + 1]) == self.link_ids[i]
                       for i in range(len(g) - 1))
        except Exception:
            return False


@dataclass(frozen=True, slots=True)
class RouteDecision:
    """Outcome of routing one request."""

    accepted: bool
    chromosome: Chromosome
    lightpath: ActiveLightpath | None
    fitness_evaluations: int
    generations_run: int
    elapsed: float
    expansions: int
    probes: int
    relaxations: int
    hop_bound_final: int
    first_feasible_generation: int


def _chromosome_cost(topology: Topology, links) -> float:
    # Left-to-right accumulation: must match the kernels exactly.
    _, _, _, cost = topology.csr()
    total = 0.0
    for l in links:
        total += float(cost[l])
    return total


def random_path(topology: Topology, source: int, destination: int,
                hop_bound: int, budget: int, rng: SplitMix64):
    """Randomized loop-free path search at a fixed hop bound.

    Runs up to `budget` forward walks; returns (nodes, expansions) on
    success or (None, expansions) when every walk failed.  The expansion
    count covers failed walks too, for setup-time accounting.
    """
    if source == destination:
        raise ValueError("source and destination must differ")
    ws = _kernel_py.WalkState.from_topology(topology, rng)
    exp_total = 0
    for _ in range(budget):
        ws.stamp += 1
        ws.visited[source] = ws.stamp
        genes = [source]
        links = []
        ok, exp = _kernel_py.walk_suffix(ws, source, destination, hop_bound, genes, links)
        exp_total += exp
        if ok:
            return genes, exp_total
    return None, exp_total


def initialize(topology: Topology, request: LightpathRequest, cfg: EpConfig,
               rng: SplitMix64, clock: Callable[[], float] | None = None) -> Chromosome:
    """Build the founder chromosome, relaxing the hop bound until one exists."""
    ws = _kernel_py.WalkState.from_topology(topology, rng)
    wall = cfg.wall_clock_thresholds
    genes, links, effort, _exp, bound, _relax = _kernel_py.build_founder(
        ws, request.source, request.destination, cfg.hop_bound, cfg.init_budget,
        wall[0] if wall else None, clock or time.perf_counter)
    return Chromosome(
        genes=tuple(genes),
        link_ids=tuple(links),
        cost_sum=_chromosome_cost(topology, links),
        hop_count=len(genes) - 1,
        setup_effort=effort,
        setup_time=effort * cfg.effort_unit,
        bound_used=bound,
    )


def mutate(parent: Chromosome, topology: Topology, cfg: EpConfig,
           rng: SplitMix64, hop_bound: int | None = None,
           clock: Callable[[], float] | None = None) -> Chromosome:
    """Produce one offspring: random interior locus, prefix kept, suffix regrown.

    Mutation always occurs; when no suffix can be found even at the fully
    relaxed bound the offspring is a verbatim copy of the parent, flagged
    `degenerate`.  `hop_bound` overrides the config bound so a caller can
    carry a previously relaxed bound through the request.
    """
    ws = _kernel_py.WalkState.from_topology(topology, rng)
    wall = cfg.wall_clock_thresholds
    bound0 = cfg.hop_bound if hop_bound is None else hop_bound
    genes, links, effort, _exp, bound, _relax, p, degenerate = _kernel_py.mutate_suffix(
        ws, list(parent.genes), list(parent.link_ids), parent.setup_effort,
        bound0, cfg.mutation_budget,
        wall[1] if wall else None, clock or time.perf_counter)
    return Chromosome(
        genes=tuple(genes),
        link_ids=tuple(links),
        cost_sum=_chromosome_cost(topology, links),
        hop_count=len(genes) - 1,
        setup_effort=effort,
        setup_time=effort * cfg.effort_unit,
        bound_used=bound,
        mutation_locus=p + 1,  # 1-indexed locus of the first regenerated gene
        degenerate=degenerate,
    )


def evaluate_fitness(x: Chromosome, topology: Topology, db: WavelengthDatabase,
                     strategy: AssignmentStrategy) -> Chromosome:
    """Score a chromosome in place and return it.

    The free-wavelength factor gates every term: a chromosome with no
    wavelength free along its whole path scores exactly 0.  The candidate
    wavelength is previewed without advancing strategy state; the state
    advances only when an accepted request is actually granted.
    """
    free = db.free_wavelengths_on_path(x.link_ids)
    if free:
        x.free_factor = 1
        x.chosen_wavelength = strategy.peek(db, free)
        x.fitness = (1.0 / x.cost_sum + 1.0 / x.hop_count + 1.0 / x.setup_time)
    else:
        x.free_factor = 0
        x.chosen_wavelength = None
        x.fitness = 0.0
    return x


def select(pool: list[Chromosome]) -> Chromosome:
    """Elitist pick over parent-plus-offspring (parent first in the pool).

    Maximum fitness wins; ties break to lower cost, then fewer hops, then the
    earlier pool position.
    """
    if not pool:
        raise ValueError("selection pool is empty")
    best = pool[0]
    if best.fitness is None:
        raise ValueError("pool chromosomes must be fitness-evaluated")
    for cand in pool[1:]:
        if cand.fitness is None:
            raise ValueError("pool chromosomes must be fitness-evaluated")
        if (cand.fitness > best.fitness
                or (cand.fitness == best.fitness
                    and (cand.cost_sum < best.cost_sum
                         or (cand.cost_sum == best.cost_sum
                             and cand.hop_count < best.hop_count)))):
            best = cand
    return best


class EpRouter:
    """Reusable per-run router bound to one topology, database and strategy.

    Holds the kernel with its walk-rng stream, so consecutive requests of a
    simulation run draw from one deterministic sequence.
    """

    def __init__(self, topology: Topology, cfg: EpConfig, db: WavelengthDatabase,
                 strategy: AssignmentStrategy,
                 clock: Callable[[], float] | None = None,
                 backend: str | None = None):
        self.topology = topology
        self.cfg = cfg
        self.db = db
        self.strategy = strategy
        wall = cfg.wall_clock_thresholds
        if wall is not None:
            # Threshold checks need the injected clock; only the python
            # kernel implements them.
            kernel_mod, backend_name = _kernel_py, "python"
        else:
            kernel_mod, backend_name = _resolve_backend(backend)
        self.backend = backend_name
        indptr, nbr, nlk, cost = topology.csr()
        self._kernel = kernel_mod.RouterKernel(
            indptr, nbr, nlk, cost, db.occupancy, db.wavelengths,
            _STRATEGY_CODE[strategy.name], cfg.generations, cfg.offspring_count,
            cfg.hop_bound, cfg.init_budget, cfg.mutation_budget,
            cfg.effort_unit, derive_seed(cfg.seed, 1),
            wall_thresholds=wall, clock=clock or time.perf_counter)

    def route(self, request: LightpathRequest) -> RouteDecision:
        """Search a route for `request`; reserve the wavelength on acceptance."""
        res = self._kernel.route(request.source, request.destination,
                                 self.db.rr_counter)
        assert res["evaluations"] == 1 + self.cfg.generations * self.cfg.offspring_count
        chromo = Chromosome(
            genes=tuple(res["genes"]),
            link_ids=tuple(res["links"]),
            cost_sum=res["cost"],
            hop_count=res["hops"],
            setup_effort=res["effort"],
            setup_time=res["effort"] * self.cfg.effort_unit,
            bound_used=res["bound_final"],
            free_factor=res["wx"],
            fitness=res["fitness"],
        )
        lightpath = None
        if res["accepted"]:
            free = self.db.free_wavelengths_on_path(chromo.link_ids)
            wavelength = choose_wavelength(self.db, self.strategy, free)
            if wavelength is None:  # impossible: db is untouched during search
                raise RuntimeError("free set vanished between search and grant")
            chromo.chosen_wavelength = wavelength
            lightpath = ActiveLightpath(
                request_id=request.id,
                link_ids=chromo.link_ids,
                wavelength=wavelength,
                teardown_time=request.arrival_time + request.holding_time,
                nodes=chromo.genes,
            )
            self.db.reserve(lightpath)
        if res["relaxations"]:
            log.debug("request %d: hop bound relaxed %d time(s) to %d",
                      request.id, res["relaxations"], res["bound_final"])
        return RouteDecision(
            accepted=res["accepted"],
            chromosome=chromo,
            lightpath=lightpath,
            fitness_evaluations=res["evaluations"],
            generations_run=res["generations"],
            elapsed=res["elapsed"],
            expansions=res["expansions"],
            probes=res["probes"],
            relaxations=res["relaxations"],
            hop_bound_final=res["bound_final"],
            first_feasible_generation=res["first_feasible"],
        )


def route_request(topology: Topology, request: LightpathRequest, cfg: EpConfig,
                  db: WavelengthDatabase, strategy: AssignmentStrategy,
                  clock: Callable[[], float] | None = None,
                  backend: str | None = None) -> RouteDecision:
    """One-shot convenience wrapper: route a single request.

    Builds a fresh router (and therefore a fresh walk-rng stream seeded from
    `cfg.seed`) per call; simulation runs should hold an :class:`EpRouter`
    instead so requests share one stream.
    """
    return EpRouter(topology, cfg, db, strategy, clock=clock, backend=backend).route(request)
