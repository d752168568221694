"""Dynamic routing and wavelength assignment (DRWA) simulator for WDM networks.

Per-request routing is an evolutionary-programming search over variable
length loop-free path chromosomes; wavelengths are granted by first-fit,
random, or round-robin assignment under the wavelength continuity
constraint.  A discrete-event engine drives Poisson arrivals with
exponential or Pareto holding times and reports blocking statistics.
"""

from .ep_router import (Chromosome, EpConfig, EpRouter, RouteDecision,
                        active_backend, available_backends, evaluate_fitness,
                        initialize, mutate, random_path, route_request, select)
from .errors import (BackendUnavailableError, ConfigError, DrwaError,
                     SimulationInvariantError, TopologyError, UnroutableError,
                     WavelengthConflictError)
from .sim_engine import (ReplicateResult, RunConfig, RunMetrics, replicate,
                         run, run_stream, sweep_generations)
from .topology import Link, Topology, load_topology, nsf14, save_topology
from .traffic import (Exponential, LightpathRequest, Pareto, TrafficConfig,
                      erlang_load, generate_requests, pareto_mean,
                      solve_pareto_shape_for_mean)
from .wavelength import (ActiveLightpath, FirstFit, RandomPick, RoundRobin,
                         Violation, WavelengthDatabase, choose_wavelength,
                         free_wavelengths_on_path, make_strategy,
                         validate_constraints)

__version__ = "0.1.0"
