"""Stochastic workload generation for lightpath requests.

Arrivals follow a Poisson process (i.i.d. exponential inter-arrival gaps),
source-destination pairs are uniform over ordered pairs with S != D, and
holding times are exponential or Pareto.  Pareto draws use the inverse
transform ``x_m * U**(-1/alpha)`` with U uniform on (0, 1], so a stream is
reproducible bit-for-bit from its seed.

Draws are taken in fixed-size blocks (inter-arrivals, then sources, then
destination offsets, then holding times); the block size is part of the
stream definition and must not change if existing seeds are to reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import ConfigError
from .topology import Topology

__all__ = ["Exponential", "Pareto", "HoldingModel", "TrafficConfig",
           "LightpathRequest", "generate_requests", "pareto_mean",
           "erlang_load", "solve_pareto_shape_for_mean"]

_BLOCK = 8192  # draws per sampling block; fixed forever (stream identity)


def pareto_mean(shape: float, location: float) -> float:
    """Closed-form Pareto mean ``shape * location / (shape - 1)``.

    Only defined for shape > 1; below that the mean is infinite and the
    distribution cannot be matched against an exponential of equal mean.
    """
    if shape <= 1:
        raise ConfigError(f"pareto shape must be > 1 for a finite mean, got {shape}")
    if location <= 0:
        raise ConfigError(f"pareto location must be > 0, got {location}")
    return shape * location / (shape - 1)


def solve_pareto_shape_for_mean(target_mean: float, location: float) -> float:
    """Shape alpha such that a Pareto(alpha, location) has the given mean.

    Inverts the mean formula: alpha = mean / (mean - location).
    """
    if location <= 0:
        raise ConfigError(f"pareto location must be > 0, got {location}")
    if target_mean <= location:
        raise ConfigError(
            f"target mean {target_mean} must exceed the location parameter {location}")
    return target_mean / (target_mean - location)


def erlang_load(arrival_rate: float, mean_holding: float) -> float:
    """Offered load in Erlang: arrival rate times mean holding time."""
    if arrival_rate <= 0:
        raise ConfigError(f"arrival rate must be > 0, got {arrival_rate}")
    if mean_holding <= 0:
        raise ConfigError(f"mean holding time must be > 0, got {mean_holding}")
    return arrival_rate * mean_holding


@dataclass(frozen=True, slots=True)
class Exponential:
    """Exponentially distributed holding times with the given mean."""

    mean_holding: float

    def __post_init__(self):
        if self.mean_holding <= 0:
            raise ConfigError(f"mean holding time must be > 0, got {self.mean_holding}")

    @property
    def kind(self) -> str:
        return "exponential"

    def mean(self) -> float:
        return self.mean_holding

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(self.mean_holding, n)


@dataclass(frozen=True, slots=True)
class Pareto:
    """Pareto holding times: density ~ x^-(shape+1) for x >= location.

    shape > 1 is required so the mean is finite (Erlang accounting needs it).
    """

    shape: float
    location: float

    def __post_init__(self):
        pareto_mean(self.shape, self.location)  # validates both fields

    @property
    def kind(self) -> str:
        return "pareto"

    def mean(self) -> float:
        return pareto_mean(self.shape, self.location)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # U on (0,1]: numpy's random() is [0,1), so flip it.
        u = 1.0 - rng.random(n)
        return self.location * u ** (-1.0 / self.shape)


HoldingModel = Union[Exponential, Pareto]


@dataclass(frozen=True, slots=True)
class TrafficConfig:
    """Parameters of one request stream."""

    arrival_rate: float
    holding: HoldingModel
    request_count: int
    seed: int

    def __post_init__(self):
        if self.arrival_rate <= 0:
            raise ConfigError(f"arrival rate (lambda) must be > 0, got {self.arrival_rate}")
        if self.request_count < 0:
            raise ConfigError(f"request count must be >= 0, got {self.request_count}")

    def offered_load(self) -> float:
        """Offered load in Erlang for this stream."""
        return erlang_load(self.arrival_rate, self.holding.mean())


@dataclass(frozen=True, slots=True)
class LightpathRequest:
    """One connection request: source, destination, arrival, holding time."""

    id: int
    source: int
    destination: int
    arrival_time: float
    holding_time: float


def generate_requests(cfg: TrafficConfig, topology: Topology) -> Iterator[LightpathRequest]:
    """Yield the request stream for `cfg` over `topology`, in arrival order.

    Identical configs (seed included) produce identical streams.
    """
    n = topology.node_count
    if n < 2:
        raise ConfigError(f"topology must have >= 2 nodes to generate traffic, got {n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 0])))
    scale = 1.0 / cfg.arrival_rate
    t = 0.0
    produced = 0
    while produced < cfg.request_count:
        m = min(_BLOCK, cfg.request_count - produced)
        gaps = rng.exponential(scale, m)
        src = rng.integers(0, n, m)
        off = rng.integers(0, n - 1, m)
        hold = cfg.holding.sample(rng, m)
        for i in range(m):
            t += gaps[i]
            s = int(src[i])
            d = int(off[i])
            if d >= s:
                d += 1
            yield LightpathRequest(produced, s, d, t, float(hold[i]))
            produced += 1
