"""Approximate and polytree-exact interval propagation.

Message passing works on Boolean networks.  A π message is an interval on
``P(U = true | evidence above)``; a λ message is an interval on the
normalized likelihood ``t = λ(true) / (λ(true) + λ(false))``, so 0.5 means
"no information".
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import (InconsistentConstraintsError, PreconditionError, TopologyError,
                     ZeroProbabilityEvidenceError)
from .model import ConstraintForm, CredalNetwork, IntervalResult, Query

Interval = tuple[float, float]


def _require_boolean(net: CredalNetwork) -> None:
    bad = [v.name for v in net.variables if v.cardinality != 2]
    if bad:
        raise PreconditionError(f"non-Boolean variables: {', '.join(bad[:5])}")


def true_bounds(net: CredalNetwork, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-configuration bounds on ``P(X_i = true | config)``."""
    spec = net.local[i]
    if isinstance(spec, ConstraintForm):
        lo = np.maximum(spec.lower[1], 1.0 - spec.upper[0])
        hi = np.minimum(spec.upper[1], 1.0 - spec.lower[0])
        return lo, hi
    lo = np.empty(net.n_configs(i))
    hi = np.empty(net.n_configs(i))
    for b in net.blocks(i):
        vals = b.alternatives[:, 1, :]
        lo[list(b.columns)] = vals.min(axis=0)
        hi[list(b.columns)] = vals.max(axis=0)
    return lo, hi


def _weights(pis) -> np.ndarray:
    """Joint parent-configuration weights for point parent marginals (C order)."""
    w = np.ones(1)
    for p in pis:
        w = np.outer(w, [1.0 - p, p]).ravel()
    return w


def local_bounds(net: CredalNetwork, i: int, parent_intervals: list[Interval],
                 cpt: tuple[np.ndarray, np.ndarray] | None = None) -> Interval:
    """Interval on ``P(X_i = true)`` given intervals on each parent's marginal.

    The expression is linear in the CPT and multilinear in the parent
    marginals, so its extremes sit at the corners of the parent box.
    """
    lo_p, hi_p = cpt if cpt is not None else true_bounds(net, i)
    lo, hi = np.inf, -np.inf
    for corner in itertools.product(*parent_intervals):
        w = _weights(corner)
        lo = min(lo, float(w @ lo_p))
        hi = max(hi, float(w @ hi_p))
    return max(lo, 0.0), min(hi, 1.0)


def _combine(ts: list[float]) -> float:
    """Normalized product of likelihood ratios; nan if contradictory."""
    a = float(np.prod(ts)) if ts else 1.0
    b = float(np.prod([1.0 - t for t in ts])) if ts else 1.0
    return a / (a + b) if a + b > 0 else np.nan


def _combine_interval(ts: list[Interval]) -> Interval:
    return _combine([t[0] for t in ts]), _combine([t[1] for t in ts])


def _posterior(pi: float, t: float) -> float:
    num, den = pi * t, pi * t + (1.0 - pi) * (1.0 - t)
    return num / den if den > 0 else np.nan


def _lambda_to_parent(lo_p, hi_p, k: int, m: int, t: Interval,
                      others: list[Interval]) -> Interval:
    """λ message from a node to its ``k``-th of ``m`` parents."""
    shape = (2,) * m
    plo = np.moveaxis(lo_p.reshape(shape), k, 0).reshape(2, -1)
    phi = np.moveaxis(hi_p.reshape(shape), k, 0).reshape(2, -1)
    ts = {t[0], t[1]}
    if t[0] < 0.5 < t[1]:
        ts.add(0.5)
    best_lo, best_hi = np.inf, -np.inf
    for tv in ts:
        s = 2.0 * tv - 1.0
        up, down = (phi, plo) if s >= 0 else (plo, phi)
        for corner in itertools.product(*others):
            w = _weights(corner)
            n_max = ((1.0 - tv) + s * up) @ w  # per parent value
            n_min = ((1.0 - tv) + s * down) @ w
            a, b = n_max[1] + n_min[0], n_min[1] + n_max[0]
            if a > 0:
                best_hi = max(best_hi, n_max[1] / a)
            if b > 0:
                best_lo = min(best_lo, n_min[1] / b)
    if not np.isfinite(best_lo) or not np.isfinite(best_hi):
        return 0.0, 1.0
    return max(best_lo, 0.0), min(best_hi, 1.0)


class _Messages:
    """State of interval message passing over the directed edges."""

    def __init__(self, net: CredalNetwork, evidence: dict[int, int]):
        self.net = net
        self.ev = evidence
        self.children = [net.children(i) for i in range(len(net))]
        self.cpt = [true_bounds(net, i) for i in range(len(net))]
        edges = [(u, x) for x in range(len(net)) for u in net.parents[x]]
        self.pi = {e: (0.5, 0.5) for e in edges}
        self.lam = {e: (0.5, 0.5) for e in edges}

    def _ev_t(self, x) -> list[Interval]:
        if x in self.ev:
            v = float(self.ev[x])
            return [(v, v)]
        return []

    def node_pi(self, x) -> Interval:
        return local_bounds(self.net, x, [self.pi[(u, x)] for u in self.net.parents[x]], self.cpt[x])

    def node_t(self, x, skip=None) -> Interval:
        ts = [self.lam[(x, c)] for c in self.children[x] if c != skip] + self._ev_t(x)
        return _combine_interval(ts)

    def update(self, x: int) -> float:
        """Recompute the messages leaving ``x``; returns the largest change."""
        net, delta = self.net, 0.0

        def put(store, e, v):
            nonlocal delta
            old = store[e]
            delta = max(delta, abs(v[0] - old[0]), abs(v[1] - old[1]))
            store[e] = v

        pi_x = self.node_pi(x)
        for c in self.children[x]:
            if x in self.ev:
                v = float(self.ev[x])
                put(self.pi, (x, c), (v, v))
                continue
            t = self.node_t(x, skip=c)
            lo, hi = _posterior(pi_x[0], t[0]), _posterior(pi_x[1], t[1])
            put(self.pi, (x, c), (0.0, 1.0) if np.isnan(lo) or np.isnan(hi) else (lo, hi))
        ps = net.parents[x]
        if ps:
            t = self.node_t(x)
            if np.isnan(t[0]) or np.isnan(t[1]):
                t = (0.0, 1.0)
            for k, u in enumerate(ps):
                others = [self.pi[(w, x)] for w in ps if w != u]
                put(self.lam, (u, x), _lambda_to_parent(*self.cpt[x], k, len(ps), t, others))
        return delta

    def sweep(self, order) -> float:
        return max((self.update(x) for x in order), default=0.0)

    def belief(self, x: int) -> Interval:
        if x in self.ev:
            v = float(self.ev[x])
            return v, v
        pi = self.node_pi(x)
        t = self.node_t(x)
        lo, hi = _posterior(pi[0], t[0]), _posterior(pi[1], t[1])
        if np.isnan(lo) or np.isnan(hi):
            raise ZeroProbabilityEvidenceError("evidence has zero upper probability")
        return max(lo, 0.0), min(hi, 1.0)


def _setup(net: CredalNetwork, query: Query):
    query.check(net)
    _require_boolean(net)
    t = net.index(query.target[0])
    ev = {net.index(k): v for k, v in query.evidence}
    return t, ev


def _result(net, query, t, msgs, status, iterations, start, method, extras=None) -> IntervalResult:
    lo, hi = msgs.belief(t)
    if query.target[1] == 0:
        lo, hi = 1.0 - hi, 1.0 - lo
    return IntervalResult(lo, hi, status, 0.0, iterations, 0,
                          int((time.perf_counter() - start) * 1000), method, extras or {})


@dataclass
class PropagationSchedule:
    order: tuple[int, ...]
    max_iterations: int = 100
    tolerance: float = 1e-6

    @classmethod
    def random(cls, net: CredalNetwork, seed: int = 0, max_iterations: int = 100,
               tolerance: float = 1e-6) -> "PropagationSchedule":
        order = np.random.default_rng(seed).permutation(len(net))
        return cls(tuple(int(i) for i in order), max_iterations, tolerance)


def two_u(net: CredalNetwork, query: Query) -> IntervalResult:
    """Exact posterior intervals on Boolean polytrees."""
    start = time.perf_counter()
    if not net.is_polytree():
        raise TopologyError("2U needs a polytree")
    t, ev = _setup(net, query)
    msgs = _Messages(net, ev)
    # a forward and a backward pass per sweep; on a polytree two sweeps
    # already settle every message, the loop only confirms it
    topo = net.topological_order()
    order = list(topo) + list(reversed(topo))
    sweeps = 0
    for sweeps in range(1, len(net) + 3):
        if msgs.sweep(order) <= 1e-15:
            break
    return _result(net, query, t, msgs, "exact", sweeps, start, "2u")


def l2u(net: CredalNetwork, query: Query, schedule: PropagationSchedule | None = None,
        seed: int = 0) -> IntervalResult:
    """Loopy 2U: polytree updates swept along ``schedule`` until stable.

    On networks with loops the result is an approximation with no enclosure
    guarantee; ``extras["converged"]`` reports whether the tolerance was met.
    """
    start = time.perf_counter()
    t, ev = _setup(net, query)
    schedule = schedule or PropagationSchedule.random(net, seed)
    missing = set(net.ancestral_set([t, *ev])) - set(schedule.order)
    if missing:
        raise PreconditionError("schedule misses relevant nodes")
    msgs = _Messages(net, ev)
    converged, it, history = False, 0, []
    for it in range(1, schedule.max_iterations + 1):
        delta = msgs.sweep(schedule.order)
        history.append(delta)
        if delta < schedule.tolerance:
            converged = True
            break
    return _result(net, query, t, msgs, "anytime", it, start, "l2u",
                   {"converged": converged, "changes": history})


# ---------------------------------------------------------------------------
# A/R+ and A/R++ over the elimination decomposition


def _normalize(joint: list[Interval], x: int, evidence: bool) -> Interval:
    lo, hi = joint[x]
    o_lo = sum(j[0] for k, j in enumerate(joint) if k != x)
    o_hi = sum(j[1] for k, j in enumerate(joint) if k != x)
    if not evidence:
        # annihilation for the lower bound, reinforcement for the upper
        return max(lo, 1.0 - o_hi, 0.0), min(hi, 1.0 - o_lo, 1.0)
    if hi <= 0 and o_hi <= 0:
        raise ZeroProbabilityEvidenceError("evidence has zero upper probability")
    low = lo / (lo + o_hi) if lo + o_hi > 0 else 0.0
    high = hi / (hi + o_lo) if hi + o_lo > 0 else 1.0
    return max(low, 0.0), min(high, 1.0)


def _finish_ar(net, query, joint, start, method, extras=None) -> IntervalResult:
    lo, hi = _normalize(joint, query.target[1], bool(query.evidence))
    if lo > hi:  # rounding only
        lo = hi = 0.5 * (lo + hi)
    return IntervalResult(lo, hi, "outer", float(hi - lo), 0, 0,
                          int((time.perf_counter() - start) * 1000), method, extras or {})


def ar_plus(net: CredalNetwork, query: Query) -> IntervalResult:
    """Interval arithmetic along the elimination messages, then normalization."""
    from .mlp import _propagate, build_target_programs, poly_interval

    start = time.perf_counter()
    mp, objectives = build_target_programs(net, query)
    lo, hi = mp.lower.copy(), mp.upper.copy()
    if not _propagate(mp, lo, hi):
        raise InconsistentConstraintsError("empty interval message")
    joint = [poly_interval(p, lo, hi) for p in objectives]
    return _finish_ar(net, query, joint, start, "ar+")


class _Neighborhood:
    """Rows reachable from a set of variables, for local programs."""

    def __init__(self, mp):
        self.mp = mp
        self.row_vars = [set(i for m in r.poly for i in m) for r in mp.rows]
        self.by_var: dict[int, list[int]] = {}
        for k, vs in enumerate(self.row_vars):
            for v in vs:
                self.by_var.setdefault(v, []).append(k)

    def program(self, poly, lo, hi, sense):
        from .mlp import MultilinearProgram, Row

        vars_ = {i for m in poly for i in m}
        rows: set[int] = set()
        todo = list(vars_)
        while todo:
            v = todo.pop()
            for k in self.by_var.get(v, ()):
                if k not in rows:
                    rows.add(k)
                    new = self.row_vars[k] - vars_
                    vars_ |= new
                    todo.extend(new)
        keep = sorted(vars_)
        pos = {v: k for k, v in enumerate(keep)}

        def remap(p):
            return {tuple(sorted(pos[i] for i in m)): c for m, c in p.items()}

        return MultilinearProgram(
            names=[self.mp.names[v] for v in keep], lower=lo[keep].copy(), upper=hi[keep].copy(),
            objective=remap(poly),
            rows=[Row(remap(self.mp.rows[k].poly), self.mp.rows[k].relation, self.mp.rows[k].rhs)
                  for k in sorted(rows)],
            sense=sense)


def _local_bound(hood: _Neighborhood, poly, lo, hi, max_branches: int) -> Interval:
    from .mlp import poly_interval, rl_solve

    a, b = poly_interval(poly, lo, hi)
    if not any(m for m in poly):
        return a, b
    up = rl_solve(hood.program(poly, lo, hi, "max"), epsilon=1e-10, max_branches=max_branches)
    down = rl_solve(hood.program(poly, lo, hi, "min"), epsilon=1e-10, max_branches=max_branches)
    return max(a, down.best_bound), min(b, up.best_bound)


def ar_plus_plus(net: CredalNetwork, query: Query,
                 max_branches: int = 20) -> tuple[IntervalResult, dict]:
    """A/R+ with each message bounded by a local multilinear program.

    Every bound is intersected with the interval-arithmetic one, so the
    result is never wider than :func:`ar_plus`.  Also returns enclosing
    ranges for every program variable, keyed by name.
    """
    from .mlp import build_target_programs

    start = time.perf_counter()
    mp, objectives = build_target_programs(net, query)
    lo, hi = mp.lower.copy(), mp.upper.copy()
    hood = _Neighborhood(mp)
    for v, p in mp.definitions:
        a, b = _local_bound(hood, p, lo, hi, max_branches)
        lo[v], hi[v] = max(lo[v], a), min(hi[v], b)
        if lo[v] > hi[v]:
            if lo[v] > hi[v] + 1e-7:
                raise InconsistentConstraintsError("empty interval message")
            lo[v] = hi[v] = 0.5 * (lo[v] + hi[v])
    joint = [_local_bound(hood, p, lo, hi, max_branches) for p in objectives]
    ranges = {nm: (float(a), float(b)) for nm, a, b in zip(mp.names, lo, hi)}
    res = _finish_ar(net, query, joint, start, "ar++", {"variables": len(ranges)})
    return res, ranges


# ---------------------------------------------------------------------------
# cutsets and IPE


def select_cutset(net: CredalNetwork, seed: int = 0, exclude=(), prefer=()) -> list[int]:
    """Random minimal set of nodes whose outgoing arcs, once removed, leave a polytree."""
    rng = np.random.default_rng(seed)
    exclude, prefer = set(exclude), set(prefer)
    children = [net.children(i) for i in range(len(net))]

    def graph(cut):
        g = nx.Graph()
        g.add_nodes_from(range(len(net)))
        g.add_edges_from((p, c) for c in range(len(net)) for p in net.parents[c] if p not in cut)
        return g

    cut: set[int] = set()
    g = graph(cut)
    while not nx.is_forest(g):
        cycles = sorted(sorted(c) for c in nx.cycle_basis(g))
        cyc = cycles[int(rng.integers(len(cycles)))]
        on = set(cyc)
        cands = sorted(u for u in on if u not in exclude and u not in cut
                       and any(w in on and g.has_edge(u, w) for w in children[u]))
        if not cands:
            raise PreconditionError("no admissible cutset node on a loop")
        pool = [u for u in cands if u in prefer] or cands
        cut.add(int(pool[int(rng.integers(len(pool)))]))
        g = graph(cut)
    for u in rng.permutation(sorted(cut)):
        if nx.is_forest(graph(cut - {int(u)})):
            cut.discard(int(u))
    return sorted(cut)


def _restrict_columns(spec, cols):
    from .model import ExtensiveVertexForm, SeparateVertexForm

    if isinstance(spec, SeparateVertexForm):
        return SeparateVertexForm(tuple(spec.columns[j] for j in cols))
    if isinstance(spec, ExtensiveVertexForm):
        return ExtensiveVertexForm(spec.tables[:, :, cols])
    # cross-column constraints are dropped: a relaxation, so still enclosing
    return ConstraintForm(spec.lower[:, cols], spec.upper[:, cols], (), spec.owner)


def cut_network(net: CredalNetwork, values: dict[int, int]) -> CredalNetwork:
    """Remove the outgoing arcs of the nodes in ``values``, keeping for each
    child only the CPT columns consistent with the given values."""
    from .model import config_values

    parents, local = [], []
    for y in range(len(net)):
        ps = net.parents[y]
        if not any(p in values for p in ps):
            parents.append(ps)
            local.append(net.local[y])
            continue
        pc = net.parent_cards(y)
        cols = [j for j in range(net.n_configs(y))
                if all(values.get(p, v) == v for p, v in zip(ps, config_values(pc, j)))]
        parents.append(tuple(p for p in ps if p not in values))
        local.append(_restrict_columns(net.local[y], cols))
    return CredalNetwork(net.variables, parents, local)


def ipe(net: CredalNetwork, query: Query, iterations: int = 10, seed: int = 0,
        max_cut_values: int = 4096) -> IntervalResult:
    """Intersection of cutset-conditioned polytree bounds.

    Each iteration draws a cutset (seed + k) avoiding the target and
    preferring observed nodes.  An observed cut node is cut exactly; for
    unobserved ones every value combination is cut and solved by 2U, and the
    hull of those conditional intervals encloses the true posterior, which
    is a mixture of them.
    """
    from .errors import TooLargeError

    start = time.perf_counter()
    t, ev = _setup(net, query)
    lo, hi = 0.0, 1.0
    cutsets = []
    for k in range(max(1, iterations)):
        cut = select_cutset(net, seed + k, exclude={t}, prefer=ev)
        cutsets.append(cut)
        free = [c for c in cut if c not in ev]
        if 2 ** len(free) > max_cut_values:
            raise TooLargeError(f"{2 ** len(free)} cutset value combinations")
        a, b = np.inf, -np.inf
        for vals in itertools.product((0, 1), repeat=len(free)):
            fixed = {**{c: ev[c] for c in cut if c in ev}, **dict(zip(free, vals))}
            evidence = {**{net.variables[i].name: v for i, v in ev.items()},
                        **{net.variables[i].name: v for i, v in fixed.items()}}
            sub = cut_network(net, fixed)
            try:
                r = two_u(sub, Query(query.target, evidence, query.direction))
            except ZeroProbabilityEvidenceError:
                continue
            a, b = min(a, r.lower), max(b, r.upper)
        if not np.isfinite(a):
            raise ZeroProbabilityEvidenceError("evidence has zero upper probability")
        lo, hi = max(lo, a), min(hi, b)
    assert lo <= hi + 1e-9, "IPE intersection is empty"
    hi = max(hi, lo)
    return IntervalResult(lo, hi, "outer", hi - lo, len(cutsets), 0,
                          int((time.perf_counter() - start) * 1000), "ipe", {"cutsets": cutsets})
