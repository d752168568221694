"""Pure-Python routing kernel: the per-request evolutionary path search.

This is the fallback for the compiled kernel in `_kernel.pyx`; the two are
kept bit-for-bit interchangeable.  Every random draw comes from a splitmix64
stream consumed in the same order in both lanes, and every floating-point
expression is written with the same operation order, so a run produces
identical decisions whichever kernel is active.

The search per request:

1. build one founder chromosome by randomized loop-free forward walks under
   the hop bound, relaxing the bound by one after each exhausted attempt
   budget (the relaxed bound persists for the rest of the request);
2. for each generation, mutate the surviving parent at a random interior
   locus (prefix kept verbatim, suffix regrown by walk) to produce the
   offspring pool, evaluate each offspring, and keep the fittest of
   parent-plus-offspring (ties: lower cost, then fewer hops, then earlier
   pool position);
3. after the final generation the survivor is accepted iff at least one
   wavelength is free on all its links.

Fitness of a feasible chromosome is ``1/cost + 1/hops + 1/setup_time`` where
setup time is the logical construction effort (node expansions) times a
configurable per-expansion constant; infeasible chromosomes score 0.

Effort bookkeeping: node expansions (walk steps) plus the wavelength
database operations of every evaluation (free-set occupancy probes and the
assignment strategy's choice scan) give the deterministic per-request
execution-time metric, so strategies whose assignment machinery does less
work per candidate really do report lower execution effort.
"""

from __future__ import annotations

from .errors import UnroutableError

_MASK64 = (1 << 64) - 1

STRATEGY_FIRST_FIT = 0
STRATEGY_ROUND_ROBIN = 1
STRATEGY_RANDOM = 2


class WalkState:
    """Reusable buffers for randomized walks over one topology."""

    __slots__ = ("indptr", "nbr", "nlk", "cost", "n_nodes", "visited",
                 "stamp", "rng")

    def __init__(self, indptr, nbr, nlk, cost, rng):
        # plain-int lists: fast to index and keep numpy scalars out of genes
        self.indptr = [int(x) for x in indptr]
        self.nbr = [int(x) for x in nbr]
        self.nlk = [int(x) for x in nlk]
        self.cost = [float(x) for x in cost]
        self.n_nodes = len(self.indptr) - 1
        self.visited = [0] * self.n_nodes
        self.stamp = 0
        self.rng = rng

    @classmethod
    def from_topology(cls, topology, rng):
        indptr, nbr, nlk, cost = topology.csr()
        return cls(indptr, nbr, nlk, cost, rng)


def walk_suffix(ws: WalkState, start: int, dst: int, max_links: int,
                genes: list, links: list):
    """One randomized forward walk of at most `max_links` steps.

    Nodes stamped `ws.stamp` in `ws.visited` are blocked (the caller stamps
    the preserved prefix, including `start`).  Appends visited nodes and the
    links taken to `genes`/`links`.  Returns (reached_dst, expansions); one
    expansion is counted per node appended.
    """
    indptr = ws.indptr
    nbr = ws.nbr
    nlk = ws.nlk
    visited = ws.visited
    stamp = ws.stamp
    rng = ws.rng
    u = start
    exp = 0
    for _ in range(max_links):
        lo = indptr[u]
        hi = indptr[u + 1]
        cn = []
        cl = []
        for i in range(lo, hi):
            v = nbr[i]
            if visited[v] != stamp:
                cn.append(v)
                cl.append(nlk[i])
        m = len(cn)
        if m == 0:
            return False, exp
        j = rng.next_u64() % m
        v = cn[j]
        genes.append(v)
        links.append(cl[j])
        visited[v] = stamp
        exp += 1
        if v == dst:
            return True, exp
        u = v
    return False, exp


def build_founder(ws: WalkState, src: int, dst: int, bound: int, budget: int,
                  wall_threshold=None, clock=None):
    """Construct the initial chromosome, relaxing the hop bound as needed.

    Returns (genes, links, effort, expansions, bound, relaxations).  Effort
    is the expansion count in budget mode, or measured seconds in wall-clock
    mode; expansions is always the raw count.
    """
    visited = ws.visited
    n_max = ws.n_nodes - 1
    relax = 0
    exp_total = 0
    t_start = clock() if wall_threshold is not None else 0.0
    while True:
        attempts = 0
        win_start = clock() if wall_threshold is not None else 0.0
        while True:
            ws.stamp += 1
            visited[src] = ws.stamp
            genes = [src]
            links = []
            ok, exp = walk_suffix(ws, src, dst, bound, genes, links)
            exp_total += exp
            attempts += 1
            if ok:
                if wall_threshold is not None:
                    effort = clock() - t_start
                else:
                    effort = float(exp_total)
                return genes, links, effort, exp_total, bound, relax
            if wall_threshold is not None:
                if clock() - win_start >= wall_threshold:
                    break
            elif attempts >= budget:
                break
        if bound >= n_max:
            raise UnroutableError(
                f"no loop-free path from {src} to {dst} found even at hop bound {bound}")
        bound += 1
        relax += 1


def mutate_suffix(ws: WalkState, parent_genes, parent_links, parent_effort: float,
                  bound: int, budget: int, wall_threshold=None, clock=None):
    """Mutate a parent chromosome: keep a random prefix, regrow the suffix.

    The split position p (0-indexed, in [1, k-2] for k >= 3, else 1) keeps
    genes[:p] verbatim; the walk restarts at genes[p-1] avoiding all
    preserved nodes.  The offspring inherits the parent effort scaled by the
    preserved fraction p/(k-1) plus the suffix effort.  If no suffix is found
    even at the maximum bound the offspring is a verbatim copy of the parent
    (a degenerate mutation) and carries the full parent effort plus the
    wasted walk effort.

    Returns (genes, links, effort, expansions, bound, relaxations, p,
    degenerate).
    """
    k = len(parent_genes)
    if k >= 3:
        p = 1 + ws.rng.next_u64() % (k - 2)
    else:
        p = 1
    dst = parent_genes[k - 1]
    visited = ws.visited
    n_max = ws.n_nodes - 1
    relax = 0
    exp_total = 0
    t_start = clock() if wall_threshold is not None else 0.0
    while True:
        attempts = 0
        win_start = clock() if wall_threshold is not None else 0.0
        while True:
            max_links = bound - (p - 1)
            if max_links < 1:
                break
            ws.stamp += 1
            st = ws.stamp
            for i in range(p):
                visited[parent_genes[i]] = st
            genes = parent_genes[:p]
            links = parent_links[:p - 1]
            ok, exp = walk_suffix(ws, parent_genes[p - 1], dst, max_links, genes, links)
            exp_total += exp
            attempts += 1
            if ok:
                if wall_threshold is not None:
                    effort = parent_effort * p / (k - 1) + (clock() - t_start)
                else:
                    effort = parent_effort * p / (k - 1) + exp_total
                return genes, links, effort, exp_total, bound, relax, p, False
            if wall_threshold is not None:
                if clock() - win_start >= wall_threshold:
                    break
            elif attempts >= budget:
                break
        if bound >= n_max:
            if wall_threshold is not None:
                effort = parent_effort + (clock() - t_start)
            else:
                effort = parent_effort + exp_total
            return (parent_genes[:], parent_links[:], effort, exp_total, bound,
                    relax, p, True)
        bound += 1
        relax += 1


class RouterKernel:
    """Per-run search state: topology arrays, occupancy view, rng stream."""

    def __init__(self, indptr, nbr, nlk, cost, occupancy, wavelengths: int,
                 strategy_kind: int, generations: int, offspring_count: int,
                 hop_bound: int, init_budget: int, mutation_budget: int,
                 effort_unit: float, seed: int,
                 wall_thresholds=None, clock=None):
        rng = _InlineSplitMix(seed)
        self.ws = WalkState(indptr, nbr, nlk, cost, rng)
        self._occ = occupancy  # live view shared with the wavelength database
        self.W = wavelengths
        self.strategy_kind = strategy_kind
        self.G = generations
        self.C = offspring_count
        self.hop_bound = hop_bound
        self.A1 = init_budget
        self.A2 = mutation_budget
        self.effort_unit = effort_unit
        self.wall_thresholds = wall_thresholds
        self.clock = clock
        self._snap = None
        self.rr_start = 0

    def _preview(self, links):
        """Free-set enumeration plus the strategy's candidate-choice scan.

        Returns (feasible, ops).  Every evaluation enumerates the free set
        (per wavelength, links are probed until the first busy one); on top
        of that, choosing the candidate wavelength costs what the strategy's
        machinery really does: nothing extra for first-fit (the minimum is
        the first free wavelength the enumeration meets), one mask check per
        scanned position for round-robin's rotation, one generator draw for
        random.
        """
        occ = self._snap
        W = self.W
        ops = 0
        mask = [0] * W
        nfree = 0
        for w in range(W):
            ok = 1
            for l in links:
                ops += 1
                if occ[l][w]:
                    ok = 0
                    break
            if ok:
                mask[w] = 1
                nfree += 1
        if nfree == 0:
            return 0, ops
        if self.strategy_kind == STRATEGY_ROUND_ROBIN:
            start = self.rr_start
            for t in range(W):
                ops += 1
                w = start + t
                if w >= W:
                    w -= W
                if mask[w]:
                    break
        elif self.strategy_kind == STRATEGY_RANDOM:
            ops += 1
        return 1, ops

    def route(self, src: int, dst: int, rr_counter: int) -> dict:
        """Run the full evolutionary search for one request.

        The caller grants the actual wavelength and reserves it afterwards;
        the database must not change while this runs.
        """
        self._snap = self._occ.tolist()
        self.rr_start = rr_counter
        cost_of = self.ws.cost
        wall = self.wall_thresholds
        clock = self.clock
        wall_t1 = wall[0] if wall is not None else None
        wall_t2 = wall[1] if wall is not None else None
        t_route = clock() if wall is not None else 0.0

        expansions = 0
        probes_total = 0
        bound = self.hop_bound

        pg, pl, p_eff, exp, bound, relax_total = build_founder(
            self.ws, src, dst, bound, self.A1, wall_t1, clock)
        expansions += exp
        p_cost = 0.0
        for l in pl:
            p_cost += cost_of[l]
        p_hops = len(pg) - 1
        p_wx, probes = self._preview(pl)
        probes_total += probes
        if p_wx:
            p_fit = 1.0 / p_cost + 1.0 / p_hops + 1.0 / (p_eff * self.effort_unit)
        else:
            p_fit = 0.0
        evals = 1
        first_feasible = 0 if p_wx else -1

        for g in range(1, self.G + 1):
            bg, bl = pg, pl
            b_cost, b_hops, b_eff, b_wx, b_fit = p_cost, p_hops, p_eff, p_wx, p_fit
            for _ in range(self.C):
                cg, cl, c_eff, exp, bound, relax, _locus, _degen = mutate_suffix(
                    self.ws, pg, pl, p_eff, bound, self.A2, wall_t2, clock)
                expansions += exp
                relax_total += relax
                c_cost = 0.0
                for l in cl:
                    c_cost += cost_of[l]
                c_hops = len(cg) - 1
                c_wx, probes = self._preview(cl)
                probes_total += probes
                if c_wx:
                    c_fit = 1.0 / c_cost + 1.0 / c_hops + 1.0 / (c_eff * self.effort_unit)
                else:
                    c_fit = 0.0
                evals += 1
                if (c_fit > b_fit
                        or (c_fit == b_fit
                            and (c_cost < b_cost
                                 or (c_cost == b_cost and c_hops < b_hops)))):
                    bg, bl = cg, cl
                    b_cost, b_hops, b_eff, b_wx, b_fit = c_cost, c_hops, c_eff, c_wx, c_fit
            pg, pl = bg, bl
            p_cost, p_hops, p_eff, p_wx, p_fit = b_cost, b_hops, b_eff, b_wx, b_fit
            if p_wx and first_feasible < 0:
                first_feasible = g

        if wall is not None:
            elapsed = clock() - t_route
        else:
            elapsed = (expansions + probes_total) * self.effort_unit
        return {
            "accepted": bool(p_wx),
            "genes": pg,
            "links": pl,
            "cost": p_cost,
            "hops": p_hops,
            "effort": p_eff,
            "wx": p_wx,
            "fitness": p_fit,
            "evaluations": evals,
            "generations": self.G,
            "expansions": expansions,
            "probes": probes_total,
            "relaxations": relax_total,
            "bound_final": bound,
            "first_feasible": first_feasible,
            "elapsed": elapsed,
        }


class _InlineSplitMix:
    """splitmix64 with the state inlined; same stream as `_rng.SplitMix64`."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        s = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        self.state = s
        z = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


BACKEND_NAME = "python"
