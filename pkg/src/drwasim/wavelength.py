"""Centralized wavelength occupancy database and assignment strategies.

The database holds one boolean occupancy vector per link (W entries, True =
busy) plus the global round-robin counter.  Three assignment strategies are
provided:

* first-fit: lowest free index;
* random: uniform draw among free indices from a dedicated seeded generator;
* round-robin: first free index scanning cyclically from the database
  counter, which then advances past the grant.

`validate_constraints` re-checks the full active set against the occupancy
matrix: unique wavelength per lightpath, continuity along its links, no
(link, wavelength) shared by two lightpaths, and per-lightpath flow
conservation (links chain into a simple path from source to destination).
Violations are returned as data, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import SplitMix64
from .errors import ConfigError, WavelengthConflictError
from .topology import Topology

__all__ = ["ActiveLightpath", "WavelengthDatabase", "FirstFit", "RandomPick",
           "RoundRobin", "AssignmentStrategy", "make_strategy",
           "choose_wavelength", "free_wavelengths_on_path",
           "validate_constraints", "Violation", "STRATEGY_NAMES"]

STRATEGY_NAMES = ("first-fit", "random", "round-robin")


@dataclass(frozen=True, slots=True)
class ActiveLightpath:
    """An established lightpath: its links, single wavelength, teardown time."""

    request_id: int
    link_ids: tuple[int, ...]
    wavelength: int
    teardown_time: float
    nodes: tuple[int, ...] = ()


@dataclass(frozen=True, slots=True)
class Violation:
    """One constraint breach found by `validate_constraints`."""

    constraint: str  # "2a" | "2b" | "2c" | "2d" | "occupancy"
    request_id: int | None
    message: str


class FirstFit:
    """Pick the lowest free wavelength index."""

    name = "first-fit"

    def peek(self, db: "WavelengthDatabase", free: set[int]) -> int | None:
        return min(free) if free else None

    def choose(self, db: "WavelengthDatabase", free: set[int]) -> int | None:
        return self.peek(db, free)


class RoundRobin:
    """Scan cyclically from the database counter; advance it past the grant."""

    name = "round-robin"

    def peek(self, db: "WavelengthDatabase", free: set[int]) -> int | None:
        if not free:
            return None
        w = db.wavelengths
        for t in range(w):
            cand = (db.rr_counter + t) % w
            if cand in free:
                return cand
        return None

    def choose(self, db: "WavelengthDatabase", free: set[int]) -> int | None:
        cand = self.peek(db, free)
        if cand is not None:
            db.rr_counter = (cand + 1) % db.wavelengths
        return cand


class RandomPick:
    """Uniform draw among free indices from a dedicated seeded generator."""

    name = "random"

    def __init__(self, seed: int):
        self._rng = SplitMix64(seed)

    def peek(self, db: "WavelengthDatabase", free: set[int]) -> int | None:
        if not free:
            return None
        ordered = sorted(free)
        return ordered[self._rng.clone().randint(len(ordered))]

    def choose(self, db: "WavelengthDatabase", free: set[int]) -> int | None:
        if not free:
            return None
        ordered = sorted(free)
        return ordered[self._rng.randint(len(ordered))]


AssignmentStrategy = FirstFit | RandomPick | RoundRobin


def make_strategy(name: str, seed: int = 0) -> AssignmentStrategy:
    """Build a strategy from its CLI name; `seed` only matters for random."""
    if name == "first-fit":
        return FirstFit()
    if name == "random":
        return RandomPick(seed)
    if name == "round-robin":
        return RoundRobin()
    raise ConfigError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}")


class WavelengthDatabase:
    """Occupancy state for every link, owned by exactly one simulation run."""

    __slots__ = ("link_count", "wavelengths", "rr_counter", "_occ", "_active")

    def __init__(self, link_count: int, wavelengths: int = 8):
        if wavelengths < 1:
            raise ConfigError(f"wavelengths (W) must be >= 1, got {wavelengths}")
        if link_count < 1:
            raise ConfigError(f"link count must be >= 1, got {link_count}")
        self.link_count = link_count
        self.wavelengths = wavelengths
        self.rr_counter = 0
        self._occ = np.zeros((link_count, wavelengths), dtype=np.uint8)
        self._active: dict[int, ActiveLightpath] = {}

    # The routing kernels read this array directly (it is mutated in place
    # by reserve/release, never reallocated).
    @property
    def occupancy(self) -> np.ndarray:
        return self._occ

    def occupancy_snapshot(self) -> np.ndarray:
        return self._occ.copy()

    def free_wavelengths_on_path(self, links) -> set[int]:
        """Indices free on every link of `links` (wavelength continuity)."""
        link_list = list(links)
        if not link_list:
            raise ValueError("links must be nonempty")
        busy = self._occ[link_list].max(axis=0)
        return {int(w) for w in np.flatnonzero(busy == 0)}

    def is_free(self, links, wavelength: int) -> bool:
        return not self._occ[list(links), wavelength].any()

    def reserve(self, lp: ActiveLightpath) -> None:
        """Mark `lp`'s wavelength busy on all its links.

        Raises WavelengthConflictError if any cell is already busy or the
        request id is already active: both are fatal invariant breaches.
        """
        if lp.request_id in self._active:
            raise WavelengthConflictError(
                f"request {lp.request_id} already holds a lightpath")
        if not (0 <= lp.wavelength < self.wavelengths):
            raise WavelengthConflictError(
                f"wavelength {lp.wavelength} outside [0, {self.wavelengths})")
        col = self._occ[list(lp.link_ids), lp.wavelength]
        if col.any():
            raise WavelengthConflictError(
                f"wavelength {lp.wavelength} already busy on a link of request "
                f"{lp.request_id}")
        self._occ[list(lp.link_ids), lp.wavelength] = 1
        self._active[lp.request_id] = lp

    def release(self, request_id: int) -> ActiveLightpath:
        """Clear the lightpath of `request_id`; unknown ids raise KeyError."""
        try:
            lp = self._active.pop(request_id)
        except KeyError:
            raise KeyError(f"request {request_id} has no active lightpath") from None
        self._occ[list(lp.link_ids), lp.wavelength] = 0
        return lp

    @property
    def active_count(self) -> int:
        return len(self._active)

    def active_lightpaths(self) -> tuple[ActiveLightpath, ...]:
        return tuple(self._active.values())

    def all_free(self) -> bool:
        return not self._occ.any()


def free_wavelengths_on_path(db: WavelengthDatabase, links) -> set[int]:
    """Module-level alias of :meth:`WavelengthDatabase.free_wavelengths_on_path`."""
    return db.free_wavelengths_on_path(links)


def choose_wavelength(db: WavelengthDatabase, strategy: AssignmentStrategy,
                      free: set[int]) -> int | None:
    """Pick a wavelength from `free` per the strategy, advancing its state.

    An empty set yields None and leaves all strategy state untouched.
    """
    if free and not all(0 <= w < db.wavelengths for w in free):
        raise ValueError(f"free set {free} outside [0, {db.wavelengths})")
    return strategy.choose(db, free)


def _chain_violations(lp: ActiveLightpath, topology: Topology) -> list[Violation]:
    """Flow-conservation checks: links must chain into a simple path."""
    out: list[Violation] = []
    links = [topology.links[l] for l in lp.link_ids]

    # Node incidence over the link multiset: endpoints once, interior twice.
    incidence: dict[int, int] = {}
    for ln in links:
        incidence[ln.endpoint_a] = incidence.get(ln.endpoint_a, 0) + 1
        incidence[ln.endpoint_b] = incidence.get(ln.endpoint_b, 0) + 1
    odd = sorted(n for n, c in incidence.items() if c == 1)
    bad = sorted(n for n, c in incidence.items() if c > 2)
    if len(odd) != 2 or bad:
        out.append(Violation("2d", lp.request_id,
                             f"links do not balance into one source-destination path "
                             f"(degree-1 nodes {odd}, overloaded nodes {bad})"))
        return out

    # Consecutive links must share exactly one node (no gaps, no branches).
    for i in range(len(links) - 1):
        shared = ({links[i].endpoint_a, links[i].endpoint_b}
                  & {links[i + 1].endpoint_a, links[i + 1].endpoint_b})
        if len(shared) != 1:
            out.append(Violation("2d", lp.request_id,
                                 f"links {lp.link_ids[i]} and {lp.link_ids[i + 1]} do not chain"))
            return out

    if lp.nodes:
        if len(lp.nodes) != len(lp.link_ids) + 1:
            out.append(Violation("2d", lp.request_id,
                                 "node sequence length does not match link count"))
        elif len(set(lp.nodes)) != len(lp.nodes):
            out.append(Violation("2d", lp.request_id, "node sequence repeats a node"))
        elif (lp.nodes[0] not in odd) or (lp.nodes[-1] not in odd):
            out.append(Violation("2d", lp.request_id,
                                 "declared endpoints are not the path endpoints"))
    return out


def validate_constraints(db: WavelengthDatabase, topology: Topology) -> list[Violation]:
    """Check the whole active set; returns [] iff every constraint holds."""
    violations: list[Violation] = []
    owner: dict[tuple[int, int], int] = {}

    for lp in db.active_lightpaths():
        if not (0 <= lp.wavelength < db.wavelengths):
            violations.append(Violation("2a", lp.request_id,
                                        f"wavelength {lp.wavelength} outside [0, {db.wavelengths})"))
            continue
        if not lp.link_ids:
            violations.append(Violation("2d", lp.request_id, "lightpath has no links"))
            continue
        for l in lp.link_ids:
            if not db._occ[l, lp.wavelength]:
                violations.append(Violation("2b", lp.request_id,
                                            f"occupancy cleared on link {l} mid-lightpath"))
            key = (l, lp.wavelength)
            if key in owner:
                violations.append(Violation("2c", lp.request_id,
                                            f"link {l} wavelength {lp.wavelength} also held by "
                                            f"request {owner[key]}"))
            else:
                owner[key] = lp.request_id
        violations.extend(_chain_violations(lp, topology))

    # Every busy cell must be owned by exactly one active lightpath.
    for l, w in zip(*np.nonzero(db._occ)):
        if (int(l), int(w)) not in owner:
            violations.append(Violation("occupancy", None,
                                        f"link {int(l)} wavelength {int(w)} busy but unowned"))
    return violations
