# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled routing kernel: bit-identical mirror of `_kernel_py`.

Same splitmix64 stream, same draw order, same floating-point expression
order; see the pure-Python module for the algorithm description.  Wall-clock
threshold mode is not compiled (the router selects the Python kernel when it
is requested).
"""

from libc.stdint cimport uint64_t, int32_t, int64_t, uint8_t

import numpy as np

from .errors import UnroutableError

BACKEND_NAME = "cython"

cdef enum:
    K_FIRST_FIT = 0
    K_ROUND_ROBIN = 1
    K_RANDOM = 2


cdef inline uint64_t _next_u64(uint64_t* state) noexcept nogil:
    cdef uint64_t s = state[0] + <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z
    state[0] = s
    z = (s ^ (s >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef class RouterKernel:
    cdef int32_t[::1] indptr
    cdef int32_t[::1] nbr
    cdef int32_t[::1] nlk
    cdef double[::1] cost
    cdef uint8_t[:, ::1] occ
    cdef int W, G, C, hop_bound, A1, A2, n_nodes, strategy_kind, rr_start
    cdef double effort_unit
    cdef uint64_t rng
    cdef int64_t[::1] visited
    cdef int64_t stamp
    cdef int32_t[::1] pg, pl, cg, cl, bg, bl, cand_n, cand_l
    cdef uint8_t[::1] free_mask

    def __init__(self, indptr, nbr, nlk, cost, occupancy, wavelengths,
                 strategy_kind, generations, offspring_count, hop_bound,
                 init_budget, mutation_budget, effort_unit, seed,
                 wall_thresholds=None, clock=None):
        if wall_thresholds is not None:
            raise ValueError("wall-clock mode runs on the python kernel only")
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int32)
        self.nbr = np.ascontiguousarray(nbr, dtype=np.int32)
        self.nlk = np.ascontiguousarray(nlk, dtype=np.int32)
        self.cost = np.ascontiguousarray(cost, dtype=np.float64)
        self.occ = occupancy
        self.W = wavelengths
        self.strategy_kind = strategy_kind
        self.G = generations
        self.C = offspring_count
        self.hop_bound = hop_bound
        self.A1 = init_budget
        self.A2 = mutation_budget
        self.effort_unit = effort_unit
        self.rng = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
        cdef int n = self.indptr.shape[0] - 1
        self.n_nodes = n
        self.visited = np.zeros(n, dtype=np.int64)
        self.stamp = 0
        self.rr_start = 0
        self.pg = np.zeros(n, dtype=np.int32)
        self.pl = np.zeros(n, dtype=np.int32)
        self.cg = np.zeros(n, dtype=np.int32)
        self.cl = np.zeros(n, dtype=np.int32)
        self.bg = np.zeros(n, dtype=np.int32)
        self.bl = np.zeros(n, dtype=np.int32)
        self.cand_n = np.zeros(n, dtype=np.int32)
        self.cand_l = np.zeros(n, dtype=np.int32)
        self.free_mask = np.zeros(self.W, dtype=np.uint8)

    cdef int _walk(self, int dst, int max_links, int32_t[::1] genes,
                   int32_t[::1] links, int k0, int* k_out, int* exp_out) noexcept:
        """Walk from genes[k0-1]; 1 = reached dst, 0 = dead end or bound hit."""
        cdef int u = genes[k0 - 1]
        cdef int exp = 0, k = k0
        cdef int step, m, i, j, v, lo, hi
        cdef int64_t stamp = self.stamp
        for step in range(max_links):
            lo = self.indptr[u]
            hi = self.indptr[u + 1]
            m = 0
            for i in range(lo, hi):
                v = self.nbr[i]
                if self.visited[v] != stamp:
                    self.cand_n[m] = v
                    self.cand_l[m] = self.nlk[i]
                    m += 1
            if m == 0:
                k_out[0] = k
                exp_out[0] = exp
                return 0
            j = <int> (_next_u64(&self.rng) % <uint64_t> m)
            v = self.cand_n[j]
            genes[k] = v
            links[k - 1] = self.cand_l[j]
            self.visited[v] = stamp
            k += 1
            exp += 1
            if v == dst:
                k_out[0] = k
                exp_out[0] = exp
                return 1
            u = v
        k_out[0] = k
        exp_out[0] = exp
        return 0

    cdef int _founder(self, int src, int dst, int bound, double* eff_out,
                      int* exp_out, int* bound_out, int* relax_out,
                      int* k_out) except -1:
        cdef int relax = 0, exp_total = 0
        cdef int attempts, ok, k, exp
        cdef int n_max = self.n_nodes - 1
        while True:
            attempts = 0
            while True:
                self.stamp += 1
                self.visited[src] = self.stamp
                self.pg[0] = src
                ok = self._walk(dst, bound, self.pg, self.pl, 1, &k, &exp)
                exp_total += exp
                attempts += 1
                if ok:
                    eff_out[0] = <double> exp_total
                    exp_out[0] = exp_total
                    bound_out[0] = bound
                    relax_out[0] = relax
                    k_out[0] = k
                    return 0
                if attempts >= self.A1:
                    break
            if bound >= n_max:
                raise UnroutableError(
                    f"no loop-free path from {src} to {dst} found even at hop bound {bound}")
            bound += 1
            relax += 1

    cdef void _mutate(self, int k_parent, double parent_effort, int bound,
                      double* eff_out, int* exp_out, int* bound_out,
                      int* relax_out, int* k_out) noexcept:
        cdef int k = k_parent
        cdef int p
        if k >= 3:
            p = 1 + <int> (_next_u64(&self.rng) % <uint64_t> (k - 2))
        else:
            p = 1
        cdef int dst = self.pg[k - 1]
        cdef int relax = 0, exp_total = 0
        cdef int attempts, ok, i, kk, exp, max_links
        cdef int n_max = self.n_nodes - 1
        while True:
            attempts = 0
            while True:
                max_links = bound - (p - 1)
                if max_links < 1:
                    break
                self.stamp += 1
                for i in range(p):
                    self.visited[self.pg[i]] = self.stamp
                for i in range(p):
                    self.cg[i] = self.pg[i]
                for i in range(p - 1):
                    self.cl[i] = self.pl[i]
                ok = self._walk(dst, max_links, self.cg, self.cl, p, &kk, &exp)
                exp_total += exp
                attempts += 1
                if ok:
                    eff_out[0] = (parent_effort * <double> p) / <double> (k - 1) + <double> exp_total
                    exp_out[0] = exp_total
                    bound_out[0] = bound
                    relax_out[0] = relax
                    k_out[0] = kk
                    return
                if attempts >= self.A2:
                    break
            if bound >= n_max:
                for i in range(k):
                    self.cg[i] = self.pg[i]
                for i in range(k - 1):
                    self.cl[i] = self.pl[i]
                eff_out[0] = parent_effort + <double> exp_total
                exp_out[0] = exp_total
                bound_out[0] = bound
                relax_out[0] = relax
                k_out[0] = k
                return
            bound += 1
            relax += 1

    cdef int _preview(self, int32_t[::1] links, int n_links, int* probes_out) noexcept:
        """Free-set enumeration plus choice-scan cost; see the python kernel."""
        cdef int ops = 0
        cdef int w, t, ok, li, nfree, start
        cdef int W = self.W
        nfree = 0
        for w in range(W):
            ok = 1
            for li in range(n_links):
                ops += 1
                if self.occ[links[li], w]:
                    ok = 0
                    break
            self.free_mask[w] = ok
            nfree += ok
        if nfree == 0:
            probes_out[0] = ops
            return 0
        if self.strategy_kind == K_ROUND_ROBIN:
            start = self.rr_start
            for t in range(W):
                ops += 1
                w = start + t
                if w >= W:
                    w -= W
                if self.free_mask[w]:
                    break
        elif self.strategy_kind == K_RANDOM:
            ops += 1
        probes_out[0] = ops
        return 1

    def route(self, int src, int dst, int rr_counter):
        cdef double p_cost, p_eff, p_fit, b_cost, b_eff, b_fit, c_cost, c_eff, c_fit
        cdef double elapsed
        cdef int p_hops, p_wx, b_hops, b_wx, c_hops, c_wx
        cdef int k_parent = 0, k_best, k_cand = 0
        cdef int expansions = 0, probes_total = 0, relax_total = 0
        cdef int bound = self.hop_bound
        cdef int evals, first_feasible, g, c, i, probes = 0, exp = 0, relax_o = 0

        self.rr_start = rr_counter
        self._founder(src, dst, bound, &p_eff, &exp, &bound, &relax_total, &k_parent)
        expansions += exp
        p_cost = 0.0
        for i in range(k_parent - 1):
            p_cost += self.cost[self.pl[i]]
        p_hops = k_parent - 1
        p_wx = self._preview(self.pl, k_parent - 1, &probes)
        probes_total += probes
        if p_wx:
            p_fit = 1.0 / p_cost + 1.0 / <double> p_hops + 1.0 / (p_eff * self.effort_unit)
        else:
            p_fit = 0.0
        evals = 1
        first_feasible = 0 if p_wx else -1

        for g in range(1, self.G + 1):
            for i in range(k_parent):
                self.bg[i] = self.pg[i]
            for i in range(k_parent - 1):
                self.bl[i] = self.pl[i]
            k_best = k_parent
            b_cost = p_cost
            b_hops = p_hops
            b_eff = p_eff
            b_wx = p_wx
            b_fit = p_fit
            for c in range(self.C):
                relax_o = 0
                self._mutate(k_parent, p_eff, bound, &c_eff, &exp, &bound,
                             &relax_o, &k_cand)
                expansions += exp
                relax_total += relax_o
                c_cost = 0.0
                for i in range(k_cand - 1):
                    c_cost += self.cost[self.cl[i]]
                c_hops = k_cand - 1
                c_wx = self._preview(self.cl, k_cand - 1, &probes)
                probes_total += probes
                if c_wx:
                    c_fit = 1.0 / c_cost + 1.0 / <double> c_hops + 1.0 / (c_eff * self.effort_unit)
                else:
                    c_fit = 0.0
                evals += 1
                if (c_fit > b_fit
                        or (c_fit == b_fit
                            and (c_cost < b_cost
                                 or (c_cost == b_cost and c_hops < b_hops)))):
                    for i in range(k_cand):
                        self.bg[i] = self.cg[i]
                    for i in range(k_cand - 1):
                        self.bl[i] = self.cl[i]
                    k_best = k_cand
                    b_cost = c_cost
                    b_hops = c_hops
                    b_eff = c_eff
                    b_wx = c_wx
                    b_fit = c_fit
            for i in range(k_best):
                self.pg[i] = self.bg[i]
            for i in range(k_best - 1):
                self.pl[i] = self.bl[i]
            k_parent = k_best
            p_cost = b_cost
            p_hops = b_hops
            p_eff = b_eff
            p_wx = b_wx
            p_fit = b_fit
            if p_wx and first_feasible < 0:
                first_feasible = g

        elapsed = (expansions + probes_total) * self.effort_unit
        genes = [self.pg[i] for i in range(k_parent)]
        links = [self.pl[i] for i in range(k_parent - 1)]
        return {
            "accepted": p_wx != 0,
            "genes": genes,
            "links": links,
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
