"""Immutable network graph: nodes, bidirectional cost-weighted links, adjacency.

Nodes are dense integers `0..node_count-1`; links carry a positive routing
cost and are stored once per unordered node pair.  The plain-text file format
is::

    # comment
    nodes 14
    link 0 1 1.0
    link 1 2 2.5

The built-in 14-node NSF backbone (21 bidirectional links) is available via
:func:`nsf14`.  Published NSFNET maps do not fix a single cost table, so the
built-in uses unit costs; supply a topology file to use any other table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import TopologyError

__all__ = ["Link", "Topology", "load_topology", "save_topology", "nsf14",
           "nsf14_file_text", "NSF14_LINKS"]


@dataclass(frozen=True, slots=True)
class Link:
    """One bidirectional fiber between two distinct nodes."""

    endpoint_a: int
    endpoint_b: int
    cost: float


# Standard 14-node / 21-link NSF backbone adjacency, unit costs.
NSF14_LINKS: tuple[tuple[int, int], ...] = (
    (0, 1), (0, 2), (0, 7),
    (1, 2), (1, 3),
    (2, 5),
    (3, 4), (3, 10),
    (4, 5), (4, 6),
    (5, 9), (5, 12),
    (6, 7),
    (7, 8),
    (8, 9), (8, 11), (8, 13),
    (10, 11), (10, 13),
    (11, 12),
    (12, 13),
)


class Topology:
    """Validated immutable graph with dense link ids and sorted adjacency."""

    __slots__ = ("node_count", "links", "_adjacency", "_link_index",
                 "_csr_cache")

    def __init__(self, node_count: int, links: list[tuple[int, int, float]]):
        if node_count < 1:
            raise TopologyError("node count must be >= 1")
        seen: set[tuple[int, int]] = set()
        canonical: list[Link] = []
        for u, v, cost in links:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise TopologyError(f"link ({u},{v}) references a node outside 0..{node_count - 1}")
            if u == v:
                raise TopologyError(f"self-loop at node {u} is not allowed")
            if not (cost > 0 and math.isfinite(cost)):
                raise TopologyError(f"link ({u},{v}) must have a positive finite cost, got {cost}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise TopologyError(f"duplicate link for node pair {key}")
            seen.add(key)
            canonical.append(Link(key[0], key[1], float(cost)))

        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(node_count)]
        for link_id, ln in enumerate(canonical):
            adjacency[ln.endpoint_a].append((ln.endpoint_b, link_id))
            adjacency[ln.endpoint_b].append((ln.endpoint_a, link_id))
        for entries in adjacency:
            entries.sort()

        self.node_count = node_count
        self.links: tuple[Link, ...] = tuple(canonical)
        self._adjacency: tuple[tuple[tuple[int, int], ...], ...] = tuple(
            tuple(entries) for entries in adjacency)
        self._link_index = {(ln.endpoint_a, ln.endpoint_b): i
                            for i, ln in enumerate(canonical)}
        self._csr_cache = None
        self._check_connected()

    def _check_connected(self) -> None:
        if self.node_count == 1:
            return
        seen = [False] * self.node_count
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for v, _ in self._adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        if count != self.node_count:
            raise TopologyError(
                f"graph is disconnected: reached {count} of {self.node_count} nodes")

    @property
    def link_count(self) -> int:
        return len(self.links)

    def neighbors(self, node: int) -> tuple[tuple[int, int], ...]:
        """All (neighbor, link_id) pairs of `node`, ascending by neighbor."""
        return self._adjacency[node]

    def degree(self, node: int) -> int:
        return len(self._adjacency[node])

    def link_between(self, u: int, v: int) -> int:
        """Link id connecting `u` and `v`; raises TopologyError if absent."""
        key = (min(u, v), max(u, v))
        try:
            return self._link_index[key]
        except KeyError:
            raise TopologyError(f"nodes {u} and {v} are not adjacent") from None

    def path_links(self, nodes: list[int] | tuple[int, ...]) -> list[int]:
        """Link ids along a node sequence; every consecutive pair must be adjacent."""
        return [self.link_between(nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1)]

    def path_cost(self, nodes: list[int] | tuple[int, ...]) -> float:
        """Sum of link costs along a node sequence.

        Uses an exactly rounded sum, so reversing the sequence cannot change
        the result.
        """
        return math.fsum(self.links[l].cost for l in self.path_links(nodes))

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency in CSR form: (indptr, neighbor, link_id, link_cost).

        Built once and cached; this is the representation the routing kernels
        consume.
        """
        if self._csr_cache is None:
            indptr = np.zeros(self.node_count + 1, dtype=np.int32)
            total = sum(len(a) for a in self._adjacency)
            nbr = np.zeros(total, dtype=np.int32)
            lnk = np.zeros(total, dtype=np.int32)
            pos = 0
            for u in range(self.node_count):
                for v, link_id in self._adjacency[u]:
                    nbr[pos] = v
                    lnk[pos] = link_id
                    pos += 1
                indptr[u + 1] = pos
            cost = np.array([ln.cost for ln in self.links], dtype=np.float64)
            self._csr_cache = (indptr, nbr, lnk, cost)
        return self._csr_cache

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return self.node_count == other.node_count and self.links == other.links

    def __hash__(self) -> int:
        return hash((self.node_count, self.links))

    def __repr__(self) -> str:
        return f"Topology(nodes={self.node_count}, links={self.link_count})"


def load_topology(text: str) -> Topology:
    """Parse the plain-text topology format and return a validated Topology."""
    node_count = None
    links: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "nodes":
            if node_count is not None:
                raise TopologyError(f"line {lineno}: duplicate 'nodes' line")
            if len(fields) != 2:
                raise TopologyError(f"line {lineno}: expected 'nodes N'")
            try:
                node_count = int(fields[1])
            except ValueError:
                raise TopologyError(f"line {lineno}: node count {fields[1]!r} is not an integer") from None
        elif fields[0] == "link":
            if node_count is None:
                raise TopologyError(f"line {lineno}: 'link' before 'nodes'")
            if len(fields) != 4:
                raise TopologyError(f"line {lineno}: expected 'link u v cost'")
            try:
                u, v = int(fields[1]), int(fields[2])
                cost = float(fields[3])
            except ValueError:
                raise TopologyError(f"line {lineno}: malformed link fields {fields[1:]!r}") from None
            links.append((u, v, cost))
        else:
            raise TopologyError(f"line {lineno}: unknown directive {fields[0]!r}")
    if node_count is None:
        raise TopologyError("missing 'nodes' line")
    return Topology(node_count, links)


def save_topology(t: Topology) -> str:
    """Serialize a Topology back to the plain-text format (round-trip exact)."""
    lines = [f"nodes {t.node_count}"]
    for ln in t.links:
        lines.append(f"link {ln.endpoint_a} {ln.endpoint_b} {ln.cost!r}")
    return "\n".join(lines) + "\n"


def nsf14() -> Topology:
    """The built-in 14-node NSF backbone with unit link costs."""
    return Topology(14, [(u, v, 1.0) for u, v in NSF14_LINKS])


def nsf14_file_text() -> str:
    """Contents of the nsf14 topology file shipped with the package."""
    return resources.files("drwasim.data").joinpath("nsf14.topo").read_text()
