"""Ground-truth inference for credal networks.

* :func:`ve_marginal` -- variable elimination on a precise network.
* :func:`exact_bounds_enumeration` -- min/max over every vertex selection of
  the strong extension, done as one tensor contraction with an extra axis per
  credal column.
* :func:`local_search_bound` -- steepest-ascent hill climbing over vertex
  selections; its value is always attained, hence an inner bound.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import (ModelError, PreconditionError, TooLargeError,
                     ZeroProbabilityEvidenceError)
from .model import CredalNetwork, IntervalResult, Query

Selection = dict  # variable index -> tuple of alternative indices, one per block


@dataclass
class Factor:
    scope: tuple[int, ...]
    table: np.ndarray

    def restrict(self, var: int, value: int) -> "Factor":
        if var not in self.scope:
            return self
        ax = self.scope.index(var)
        return Factor(self.scope[:ax] + self.scope[ax + 1:], np.take(self.table, value, axis=ax))

    def __mul__(self, other: "Factor") -> "Factor":
        scope = tuple(dict.fromkeys(self.scope + other.scope))
        table = np.einsum(self.table, list(self.scope), other.table, list(other.scope), list(scope))
        return Factor(scope, table)

    def sum_out(self, var: int) -> "Factor":
        ax = self.scope.index(var)
        return Factor(self.scope[:ax] + self.scope[ax + 1:], self.table.sum(axis=ax))


def selection_cpts(net: CredalNetwork, selection: Selection | None = None,
                   nodes=None) -> dict[int, np.ndarray]:
    """CPT arrays of shape ``(card, *parent_cards)`` for one vertex selection."""
    out = {}
    for i in (range(len(net)) if nodes is None else nodes):
        blocks = net.blocks(i)
        pick = (0,) * len(blocks) if selection is None else selection[i]
        table = np.empty((net.card(i), net.n_configs(i)))
        for b, a in zip(blocks, pick):
            table[:, list(b.columns)] = b.alternatives[a]
        out[i] = table.reshape((net.card(i),) + net.parent_cards(i))
    return out


def _min_degree_order(factors: list[Factor], keep=()) -> list[int]:
    nbrs: dict[int, set] = {}
    for f in factors:
        for v in f.scope:
            nbrs.setdefault(v, set()).update(f.scope)
    for v in nbrs:
        nbrs[v].discard(v)
    order = []
    remaining = {v for v in nbrs if v not in keep}
    while remaining:
        v = min(remaining, key=lambda u: (len(nbrs[u] & (remaining | set(keep))), u))
        order.append(v)
        for a in nbrs[v]:
            nbrs[a].update(nbrs[v] - {a})
            nbrs[a].discard(v)
        remaining.discard(v)
    return order


def _eliminate(factors: list[Factor], order) -> float:
    factors = list(factors)
    for v in order:
        bucket = [f for f in factors if v in f.scope]
        if not bucket:
            continue
        factors = [f for f in factors if v not in f.scope]
        prod = bucket[0]
        for f in bucket[1:]:
            prod = prod * f
        factors.append(prod.sum_out(v))
    value = 1.0
    for f in factors:
        value *= float(f.table)
    return value


def ve_marginal(net: CredalNetwork, query: Query, order=None, pair: bool = False,
                selection: Selection | None = None):
    """P(target | evidence) on a precise network (or one vertex selection).

    With ``pair=True`` returns ``(P(target, evidence), P(evidence))``.
    """
    query.check(net)
    if selection is None and not net.is_singleton():
        raise PreconditionError("ve_marginal needs singleton local specs")
    t_name, t_val = query.target
    t = net.index(t_name)
    ev = {net.index(k): v for k, v in query.evidence}
    relevant = net.ancestral_set([t, *ev])
    cpts = selection_cpts(net, selection, sorted(relevant))
    base = [Factor((i,) + net.parents[i], cpts[i]) for i in sorted(relevant)]
    for v, val in ev.items():
        base = [f.restrict(v, val) for f in base]
    joint_f = [f.restrict(t, t_val) for f in base]
    ev_relevant = net.ancestral_set(ev)
    ev_f = [f for f, i in zip(base, sorted(relevant)) if i in ev_relevant]

    def run(fs):
        vars_ = sorted({v for f in fs for v in f.scope})
        if order is None:
            o = _min_degree_order(fs)
        else:
            o = [v for v in order if v in vars_] + [v for v in vars_ if v not in order]
        return _eliminate(fs, o)

    joint = run(joint_f)
    p_ev = run(ev_f) if ev else 1.0
    if pair:
        return joint, p_ev
    if p_ev <= 0.0:
        raise ZeroProbabilityEvidenceError("P(evidence) = 0")
    return joint / p_ev


# ---------------------------------------------------------------------------
# exhaustive enumeration


class _Tensors:
    """Per-variable CPT tensors carrying one axis per multi-vertex block."""

    def __init__(self, net: CredalNetwork, nodes):
        self.net = net
        self.nodes = sorted(nodes)
        self.blocks = {i: net.blocks(i) for i in self.nodes}
        self.axes: list[tuple[int, int]] = []  # (variable, block)
        self.axis_size: list[int] = []
        self.var_axes: dict[int, list[int]] = {}
        for i in self.nodes:
            ids = []
            for k, b in enumerate(self.blocks[i]):
                if len(b.alternatives) > 1:
                    ids.append(len(self.axes))
                    self.axes.append((i, k))
                    self.axis_size.append(len(b.alternatives))
            self.var_axes[i] = ids

    def tensor(self, i, fixed: dict[int, int]):
        """CPT of ``i`` with free block axes first, then (x, *parents)."""
        net, blocks = self.net, self.blocks[i]
        free = [a for a in self.var_axes[i] if a not in fixed]
        shape = tuple(self.axis_size[a] for a in free)
        arr = np.empty(shape + (net.card(i), net.n_configs(i)))
        for k, b in enumerate(blocks):
            cols = list(b.columns)
            alts = b.alternatives
            ax = next((a for a in self.var_axes[i] if self.axes[a] == (i, k)), None)
            if ax is None:
                arr[..., cols] = alts[0]
            elif ax in fixed:
                arr[..., cols] = alts[fixed[ax]]
            else:
                p = free.index(ax)
                view = alts.reshape((1,) * p + (len(alts),) + (1,) * (len(free) - p - 1) + alts.shape[1:])
                arr[..., cols] = view
        arr = arr.reshape(shape + (net.card(i),) + net.parent_cards(i))
        return arr, free


def _contract(tens: _Tensors, nodes, indicators, out_axes, fixed, open_vars=()):
    """Sum the product of the CPTs of ``nodes`` over all variables.

    Returns an array over the free block axes ``out_axes`` followed by
    ``open_vars`` (left unsummed).
    """
    n_axes = len(tens.axes)
    var_label = {v: n_axes + v for v in range(len(tens.net))}
    ops = []
    for i in nodes:
        arr, free = tens.tensor(i, fixed)
        ops += [arr, free + [var_label[i]] + [var_label[p] for p in tens.net.parents[i]]]
    for v, vec in indicators:
        ops += [vec, [var_label[v]]]
    out = [a for a in out_axes if a not in fixed] + [var_label[v] for v in open_vars]
    labels = sorted({l for k in range(1, len(ops), 2) for l in ops[k]} | set(out))
    if len(labels) > 52:
        raise TooLargeError("too many tensor axes for one contraction")
    remap = {l: k for k, l in enumerate(labels)}
    ops = [o if k % 2 == 0 else [remap[l] for l in o] for k, o in enumerate(ops)]
    return np.einsum(*ops, [remap[l] for l in out], optimize="greedy")


def _plan_outer(sizes: list[int], budget: float, max_axes: int = 40) -> int:
    """How many leading axes to iterate explicitly to fit the budget."""
    k = 0
    while k < len(sizes) and (math.prod(sizes[k:]) > budget or len(sizes) - k > max_axes):
        k += 1
    return k


def exact_bounds_enumeration(net: CredalNetwork, query: Query, cap: float = 1e7,
                             chunk: float = 2e6) -> IntervalResult:
    """Exact bounds over the strong extension by enumerating vertex selections."""
    start = time.perf_counter()
    query.check(net)
    t_name, t_val = query.target
    t = net.index(t_name)
    ev = {net.index(k): v for k, v in query.evidence}
    relevant = net.ancestral_set([t, *ev])
    tens = _Tensors(net, relevant)

    def onehot(v, val):
        e = np.zeros(net.card(v))
        e[val] = 1.0
        return e

    indicators = [(v, onehot(v, val)) for v, val in ev.items()]
    target_ind = [(t, onehot(t, t_val))]

    if not ev:
        # Closed form for one variable: the marginal is linear and separable in
        # the columns of any single variable once the rest is fixed.
        star = max(tens.nodes, key=lambda i: (math.prod(tens.axis_size[a] for a in tens.var_axes[i]), -i))
        enum_axes = [a for a in range(len(tens.axes)) if a not in tens.var_axes[star]]
        total = math.prod(tens.axis_size[a] for a in enum_axes)
        if total > cap:
            raise TooLargeError(f"{total} vertex combinations exceed cap {cap:g}")
        others = [i for i in tens.nodes if i != star]
        cell = net.card(star) * net.n_configs(star)
        n_outer = _plan_outer([tens.axis_size[a] for a in enum_axes], chunk / cell)
        outer, inner = enum_axes[:n_outer], enum_axes[n_outer:]
        best = {"upper": (-np.inf, None), "lower": (np.inf, None)}
        blocks = tens.blocks[star]
        open_vars = (star,) + net.parents[star]
        for combo in itertools.product(*[range(tens.axis_size[a]) for a in outer]):
            fixed = dict(zip(outer, combo))
            K = _contract(tens, others, indicators + target_ind, inner, fixed, open_vars)
            K = K.reshape(K.shape[:len(inner)] + (net.card(star), net.n_configs(star)))
            for sense in ("upper", "lower"):
                pick = np.max if sense == "upper" else np.min
                argpick = np.argmax if sense == "upper" else np.argmin
                val = np.zeros(K.shape[:len(inner)])
                choices = []
                for b in blocks:
                    contrib = np.einsum("...xc,axc->...a", K[..., list(b.columns)], b.alternatives)
                    val = val + pick(contrib, axis=-1)
                    choices.append(argpick(contrib, axis=-1))
                flat = int(argpick(val))
                v = float(val.reshape(-1)[flat]) if val.ndim else float(val)
                if (sense == "upper" and v > best[sense][0]) or (sense == "lower" and v < best[sense][0]):
                    loc = np.unravel_index(flat, val.shape) if val.ndim else ()
                    sel = dict(fixed)
                    sel.update(zip(inner, loc))
                    star_pick = tuple(int(c[loc]) if c.ndim else int(c) for c in choices)
                    best[sense] = (v, (sel, star_pick))
        lo, hi = best["lower"][0], best["upper"][0]
        sels = {s: _selection(tens, *best[s][1], star=star) for s in best}
        enumerated = total
    else:
        enum_axes = list(range(len(tens.axes)))
        total = math.prod(tens.axis_size)
        if total > cap:
            raise TooLargeError(f"{total} vertex combinations exceed cap {cap:g}")
        ev_nodes = sorted(net.ancestral_set(ev))
        n_outer = _plan_outer(tens.axis_size, chunk)
        outer, inner = enum_axes[:n_outer], enum_axes[n_outer:]
        lo, hi = np.inf, -np.inf
        lo_sel = hi_sel = None
        any_positive = False
        for combo in itertools.product(*[range(tens.axis_size[a]) for a in outer]):
            fixed = dict(zip(outer, combo))
            num = _contract(tens, tens.nodes, indicators + target_ind, inner, fixed)
            inner_ev = [a for a in inner if tens.axes[a][0] in ev_nodes]
            den = _contract(tens, ev_nodes, indicators, inner_ev, fixed)
            # broadcast the denominator over axes it does not depend on
            shape = [tens.axis_size[a] if a in inner_ev else 1 for a in inner]
            den = np.broadcast_to(np.reshape(den, shape), num.shape)
            ok = den > 0
            if not ok.any():
                continue
            any_positive = True
            ratio = np.where(ok, num / np.where(ok, den, 1.0), np.nan)
            kmax, kmin = int(np.nanargmax(ratio)), int(np.nanargmin(ratio))
            flat = ratio.reshape(-1)
            if flat[kmax] > hi:
                hi = float(flat[kmax])
                hi_sel = {**fixed, **dict(zip(inner, np.unravel_index(kmax, ratio.shape)))}
            if flat[kmin] < lo:
                lo = float(flat[kmin])
                lo_sel = {**fixed, **dict(zip(inner, np.unravel_index(kmin, ratio.shape)))}
        if not any_positive:
            raise ZeroProbabilityEvidenceError("P(evidence) = 0 for every vertex selection")
        sels = {"upper": _selection(tens, hi_sel, ()), "lower": _selection(tens, lo_sel, ())}
        enumerated = total
    elapsed = int((time.perf_counter() - start) * 1000)
    return IntervalResult(lo, hi, "exact", 0.0, iterations=int(enumerated), elapsed_ms=elapsed,
                          method="oracle", extras={"selections": sels})


def _selection(tens: _Tensors, axis_pick: dict, star_pick, star=None) -> Selection:
    sel = {}
    for i in tens.nodes:
        if i == star:
            sel[i] = tuple(int(a) for a in star_pick)
            continue
        picks = []
        for k, b in enumerate(tens.blocks[i]):
            ax = next((a for a in tens.var_axes[i] if tens.axes[a] == (i, k)), None)
            picks.append(0 if ax is None else int(axis_pick[ax]))
        sel[i] = tuple(picks)
    return sel


# ---------------------------------------------------------------------------
# local search


class _Evaluator:
    """Fast repeated evaluation of P(target | evidence) under selections."""

    def __init__(self, net: CredalNetwork, query: Query):
        self.net = net
        t = net.index(query.target[0])
        self.ev = {net.index(k): v for k, v in query.evidence}
        self.nodes = sorted(net.ancestral_set([t, *self.ev]))
        self.ev_nodes = sorted(net.ancestral_set(self.ev))
        self.blocks = {i: net.blocks(i) for i in self.nodes}
        self.inds = []
        for v, val in list(self.ev.items()) + [(t, query.target[1])]:
            e = np.zeros(net.card(v))
            e[val] = 1.0
            self.inds.append((v, e))
        self._paths = {}

    def cpt(self, i, picks):
        net = self.net
        table = np.empty((net.card(i), net.n_configs(i)))
        for b, a in zip(self.blocks[i], picks):
            table[:, list(b.columns)] = b.alternatives[a]
        return table.reshape((net.card(i),) + net.parent_cards(i))

    def _run(self, key, nodes, cpts, inds):
        ops = []
        for i in nodes:
            ops += [cpts[i], [i] + list(self.net.parents[i])]
        for v, e in inds:
            ops += [e, [v]]
        if key not in self._paths:
            self._paths[key] = np.einsum_path(*ops, [], optimize="greedy")[0]
        return float(np.einsum(*ops, [], optimize=self._paths[key]))

    def value(self, cpts) -> float:
        num = self._run("num", self.nodes, cpts, self.inds)
        if not self.ev:
            return num
        den = self._run("den", self.ev_nodes, cpts, self.inds[:-1])
        return num / den if den > 0 else np.nan


def local_search_bound(net: CredalNetwork, query: Query, direction: str = "upper",
                       restarts: int = 10, seed: int = 0) -> tuple[float, Selection]:
    """Steepest-ascent hill climbing over vertex selections with random restarts."""
    if direction not in ("upper", "lower"):
        raise ModelError("direction must be 'upper' or 'lower'")
    query.check(net)
    ev = _Evaluator(net, query)
    sign = 1.0 if direction == "upper" else -1.0
    rng = np.random.default_rng(seed)
    moves = [(i, k, len(b.alternatives)) for i in ev.nodes
             for k, b in enumerate(ev.blocks[i]) if len(b.alternatives) > 1]
    best_val, best_sel = -np.inf, None
    for _ in range(max(1, restarts)):
        sel = {i: [int(rng.integers(len(b.alternatives))) for b in ev.blocks[i]] for i in ev.nodes}
        cpts = {i: ev.cpt(i, sel[i]) for i in ev.nodes}
        cur = sign * ev.value(cpts)
        if np.isnan(cur):
            cur = -np.inf
        while True:
            move, move_val = None, cur
            for i, k, n_alt in moves:
                old = sel[i][k]
                for a in range(n_alt):
                    if a == old:
                        continue
                    sel[i][k] = a
                    trial = dict(cpts)
                    trial[i] = ev.cpt(i, sel[i])
                    v = sign * ev.value(trial)
                    if not np.isnan(v) and v > move_val + 1e-15:
                        move, move_val = (i, k, a), v
                sel[i][k] = old
            if move is None:
                break
            i, k, a = move
            sel[i][k] = a
            cpts[i] = ev.cpt(i, sel[i])
            cur = move_val
        if cur > best_val:
            best_val, best_sel = cur, {i: tuple(p) for i, p in sel.items()}
        if not moves:
            break
    if best_sel is None or not np.isfinite(best_val):
        raise ZeroProbabilityEvidenceError("no selection gives positive evidence probability")
    return sign * best_val, best_sel
