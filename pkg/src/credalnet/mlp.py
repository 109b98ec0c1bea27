"""Inference as multilinear programming.

The product-of-CPTs objective is decomposed with variable elimination: every
entry of every intermediate elimination function becomes an artificial
variable defined by a degree-2 multilinear equality.  The resulting program
is solved by reformulation-linearization branch and bound: each product is
replaced by a new variable tied to its factors by bilinear envelopes, the LP
gives an outer bound, and the box of the variable behind the worst
linearization error is split until the gap closes.

Polynomials are ``dict[monomial, coef]`` where a monomial is a sorted tuple of
variable indices; ``()`` is the constant term.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import (CredalError, InconsistentConstraintsError, ModelError,
                     ZeroProbabilityEvidenceError)
from .lp import LinearProgram, solve_lp
from .model import ConstraintForm, CredalNetwork, IntervalResult, Query, TOL, config_values

Poly = dict


# ---------------------------------------------------------------------------
# polynomial helpers


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(sorted(m1 + m2))
            out[m] = out.get(m, 0.0) + c1 * c2
    return {m: c for m, c in out.items() if c != 0.0}


def poly_add(a: Poly, b: Poly, scale: float = 1.0) -> Poly:
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0.0) + scale * c
    return {m: c for m, c in out.items() if c != 0.0}


def poly_eval(p: Poly, x) -> float:
    total = 0.0
    for m, c in p.items():
        v = c
        for i in m:
            v *= x[i]
        total += v
    return total


def poly_interval(p: Poly, lo, hi) -> tuple[float, float]:
    a = b = 0.0
    for m, c in p.items():
        ml, mh = c, c
        for i in m:
            cands = (ml * lo[i], ml * hi[i], mh * lo[i], mh * hi[i])
            ml, mh = min(cands), max(cands)
        a += ml
        b += mh
    return a, b


def poly_degree(p: Poly) -> int:
    return max((len(m) for m in p), default=0)


def _const(c: float) -> Poly:
    return {(): float(c)} if c != 0.0 else {}


class Row(NamedTuple):
    poly: Poly
    relation: str  # ">=", "<=", "=="
    rhs: float


# ---------------------------------------------------------------------------
# the program


@dataclass
class MultilinearProgram:
    """``max/min objective(θ)`` over boxes, rows and definitions.

    ``definitions`` are ordered equalities ``x_v = poly`` whose right-hand
    side only uses earlier variables; they are kept apart from ``rows`` so a
    point can be completed from its free variables.  ``denominator``, when
    set, turns the objective into the ratio ``objective / denominator``.
    """

    names: list
    lower: np.ndarray
    upper: np.ndarray
    objective: Poly
    rows: list[Row] = field(default_factory=list)
    definitions: list[tuple[int, Poly]] = field(default_factory=list)
    sense: str = "max"
    denominator: Poly | None = None
    space: "_Space | None" = field(default=None, repr=False)
    groups: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return len(self.names)

    def polys(self):
        yield self.objective
        if self.denominator is not None:
            yield self.denominator
        for r in self.rows:
            yield r.poly
        for _, p in self.definitions:
            yield p

    @property
    def maxdegree(self) -> int:
        return max((poly_degree(p) for p in self.polys()), default=0)

    def nonlinear_terms(self) -> int:
        return sum(1 for p in self.polys() for m in p if len(m) >= 2)

    def defined(self) -> set[int]:
        return {v for v, _ in self.definitions}

    def complete(self, x) -> np.ndarray:
        """Clip to the boxes and recompute every defined variable."""
        x = np.clip(np.asarray(x, float)[: self.n].copy(), self.lower, self.upper)
        for v, p in self.definitions:
            x[v] = poly_eval(p, x)
        return x

    def feasible(self, x, tol: float = 1e-6) -> bool:
        if np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            return False
        for p, rel, rhs in self.rows:
            v = poly_eval(p, x)
            if (rel == ">=" and v < rhs - tol) or (rel == "<=" and v > rhs + tol) \
                    or (rel == "==" and abs(v - rhs) > tol):
                return False
        return True

    def with_objective(self, objective: Poly, sense: str | None = None) -> "MultilinearProgram":
        return replace(self, objective=objective, sense=sense or self.sense, denominator=None)

    def dump(self) -> str:
        """Plain-text listing: one term per line, one block per row."""

        def terms(p):
            return [f"  {c:+.12g} " + " ".join(str(self.names[i]) for i in m) for m, c in sorted(p.items())]

        out = [f"{self.sense} objective"] + terms(self.objective)
        if self.denominator is not None:
            out += ["denominator"] + terms(self.denominator)
        for v, p in self.definitions:
            out += [f"define {self.names[v]} ="] + terms(p)
        for p, rel, rhs in self.rows:
            out += [f"row {rel} {rhs:.12g}"] + terms(p)
        out += ["bounds"] + [f"  {nm} {lo:.12g} {hi:.12g}" for nm, lo, hi in zip(self.names, self.lower, self.upper)]
        return "\n".join(out)


# ---------------------------------------------------------------------------
# building the program from a network


class _Space:
    """Variables, rows and definitions under construction."""

    def __init__(self, net: CredalNetwork):
        self.net = net
        self.names: list = []
        self.index: dict = {}
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.rows: list[Row] = []
        self.definitions: list[tuple[int, Poly]] = []
        self.entries: dict[int, list[list[Poly]]] = {}  # node -> [x][config] -> poly
        self.weights: dict[tuple[int, int], list[int]] = {}  # (node, block) -> weight vars
        # separately specified parameter groups with their vertices, used for
        # vertex branching; groups touched by coupling constraints are dropped
        self.groups: list[tuple[list[int], np.ndarray]] = []
        self.coupled: set[int] = set()
        self._fid: dict = {}

    def var(self, name, lo, hi) -> int:
        if name in self.index:
            return self.index[name]
        self.index[name] = len(self.names)
        self.names.append(name)
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        return self.index[name]

    # -- local parameters ---------------------------------------------------

    def params(self, i: int) -> list[list[Poly]]:
        if i in self.entries:
            return self.entries[i]
        net = self.net
        name, card, n_cfg = net.variables[i].name, net.card(i), net.n_configs(i)
        spec = net.local[i]
        entries = [[{} for _ in range(n_cfg)] for _ in range(card)]
        self.entries[i] = entries
        if isinstance(spec, ConstraintForm):
            lo, hi = np.asarray(spec.lower), np.asarray(spec.upper)
            for j in range(n_cfg):
                # tighten boxes with the simplex: l_x >= 1 - sum of other uppers
                lo_j = np.maximum(lo[:, j], 1.0 - (hi[:, j].sum() - hi[:, j]))
                hi_j = np.minimum(hi[:, j], 1.0 - (lo[:, j].sum() - lo[:, j]))
                for x in range(card):
                    if hi_j[x] - lo_j[x] <= TOL:
                        entries[x][j] = _const(0.5 * (lo_j[x] + hi_j[x]))
                    else:
                        v = self.var(("theta", name, x, j), max(lo_j[x], 0.0), min(hi_j[x], 1.0))
                        entries[x][j] = {(v,): 1.0}
                self._simplex_row([entries[x][j] for x in range(card)])
                if not spec.constraints:
                    self._constraint_group(spec, entries, j)
            for c in spec.constraints:
                poly: Poly = {}
                for coef, ids in c.terms:
                    term = _const(coef)
                    for pid in ids:
                        k = net.index(pid.var)
                        term = poly_mul(term, self.params(k)[pid.value][pid.config])
                    poly = poly_add(poly, term)
                const = poly.pop((), 0.0)
                self.coupled.update(v for m in poly for v in m)
                self.rows.append(Row(poly, c.relation, c.rhs - const))
            return entries
        blocks = spec.blocks()
        for k, b in enumerate(blocks):
            alts = b.alternatives  # (n_alt, card, ncols)
            if len(alts) == 1:
                for x in range(card):
                    for col, j in enumerate(b.columns):
                        entries[x][j] = _const(alts[0, x, col])
                continue
            w = [self.var(("w", name, k, a), 0.0, 1.0) for a in range(len(alts))]
            self.weights[(i, k)] = w
            self.rows.append(Row({(v,): 1.0 for v in w}, "==", 1.0))
            gvars, gvals = list(w), [np.eye(len(alts))]
            for col, j in enumerate(b.columns):
                for x in range(card):
                    vals = alts[:, x, col]
                    if np.ptp(vals) <= TOL:
                        entries[x][j] = _const(vals[0])
                        continue
                    v = self.var(("theta", name, x, j), vals.min(), vals.max())
                    entries[x][j] = {(v,): 1.0}
                    gvars.append(v)
                    gvals.append(vals[:, None])
                    row = {(v,): 1.0}
                    for a, wv in enumerate(w):
                        if vals[a] != 0.0:
                            row[(wv,)] = -float(vals[a])
                    self.rows.append(Row(row, "==", 0.0))
                self._simplex_row([entries[x][j] for x in range(card)])
            self.groups.append((gvars, np.hstack(gvals)))
        return entries

    def _constraint_group(self, spec: ConstraintForm, entries, j: int):
        from .errors import CredalError
        from .model import hrep_to_vrep

        gvars, rows = [], []
        for x in range(len(entries)):
            p = entries[x][j]
            if len(p) == 1 and next(iter(p)) != ():
                gvars.append((x, next(iter(p))[0]))
        if not gvars:
            return
        try:
            verts = hrep_to_vrep(spec, j, limit=6)
        except CredalError:
            return
        vals = np.array([[v[x] for x, _ in gvars] for v in verts])
        self.groups.append(([v for _, v in gvars], vals))

    def _simplex_row(self, column: list[Poly]):
        poly: Poly = {}
        for p in column:
            poly = poly_add(poly, p)
        const = poly.pop((), 0.0)
        if poly:
            self.rows.append(Row(poly, "==", 1.0 - const))

    # -- artificial variables --------------------------------------------------

    def atom(self, poly: Poly, name) -> Poly:
        """Return ``poly`` itself if it is a constant or a bare variable,
        otherwise a new variable defined by it."""
        if all(m == () for m in poly):
            return dict(poly)
        if len(poly) == 1:
            (m, c), = poly.items()
            if len(m) == 1 and c == 1.0:
                return dict(poly)
        lo, hi = poly_interval(poly, self.lo, self.hi)
        v = self.var(name, max(lo, 0.0) if lo >= -TOL else lo, hi)
        self.definitions.append((v, poly))
        return {(v,): 1.0}

    def new_fid(self, tag) -> int:
        self._fid[tag] = self._fid.get(tag, 0) + 1
        return self._fid[tag]


class _SymFactor(NamedTuple):
    scope: tuple[int, ...]
    table: dict  # assignment tuple -> poly


def _cards(net, scope):
    return [net.card(v) for v in scope]


def _restrict(f: _SymFactor, var: int, val: int) -> _SymFactor:
    if var not in f.scope:
        return f
    ax = f.scope.index(var)
    table = {k[:ax] + k[ax + 1:]: p for k, p in f.table.items() if k[ax] == val}
    return _SymFactor(f.scope[:ax] + f.scope[ax + 1:], table)


def _product_table(net, f: _SymFactor, g: _SymFactor):
    scope = tuple(dict.fromkeys(f.scope + g.scope))
    fi = [scope.index(v) for v in f.scope]
    gi = [scope.index(v) for v in g.scope]
    table = {}
    for a in itertools.product(*[range(c) for c in _cards(net, scope)]):
        table[a] = poly_mul(f.table[tuple(a[k] for k in fi)], g.table[tuple(a[k] for k in gi)])
    return scope, table


def _decompose(space: _Space, nodes, restrict: dict[int, int], tag, keep: int | None = None):
    """Symbolic variable elimination.

    Returns the final scalar polynomial, or with ``keep`` one variable per
    value of that node (the node is never eliminated).
    """
    from .oracle import _min_degree_order

    net = space.net
    factors = []
    for i in sorted(nodes):
        ent = space.params(i)
        scope = (i,) + net.parents[i]
        table = {}
        pc = net.parent_cards(i)
        for x in range(net.card(i)):
            for j in range(net.n_configs(i)):
                table[(x,) + config_values(pc, j)] = ent[x][j]
        f = _SymFactor(scope, table)
        for v, val in restrict.items():
            f = _restrict(f, v, val)
        factors.append(f)
    scalars = [f.table[()] for f in factors if not f.scope]
    factors = [f for f in factors if f.scope]
    order = _min_degree_order(factors, keep=() if keep is None else (keep,))
    for v in order:
        bucket = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        fid = space.new_fid(tag)
        g = bucket[0]
        for k, f in enumerate(bucket[1:-1]):
            scope, table = _product_table(net, g, f)
            g = _SymFactor(scope, {a: space.atom(p, (tag, fid, f"p{k}", a)) for a, p in table.items()})
        if len(bucket) > 1:
            scope, table = _product_table(net, g, bucket[-1])
        else:
            scope, table = g.scope, g.table
        ax = scope.index(v)
        out_scope = scope[:ax] + scope[ax + 1:]
        summed: dict = {}
        for a, p in table.items():
            key = a[:ax] + a[ax + 1:]
            summed[key] = poly_add(summed.get(key, {}), p)
        if not out_scope:
            scalars.append(summed[()])
            continue
        factors.append(_SymFactor(out_scope, {a: space.atom(p, (tag, fid, a)) for a, p in summed.items()}))
    result = _const(1.0)
    last = len(scalars) - 1 if keep is None else len(scalars)
    for k, s in enumerate(scalars):
        if k < last:
            s = space.atom(s, (tag, "scalar", k))
        result = poly_mul(result, s)
    if keep is None:
        return result
    table = {(x,): dict(result) for x in range(net.card(keep))}
    for k, f in enumerate(factors):
        table = {a: poly_mul(p, f.table[a]) for a, p in table.items()}
        if k < len(factors) - 1:
            table = {a: space.atom(p, (tag, "keep", k, a)) for a, p in table.items()}
    return [space.atom(table[(x,)], (tag, "value", x)) for x in range(net.card(keep))]


def _target_evidence(net: CredalNetwork, query: Query):
    query.check(net)
    t = net.index(query.target[0])
    ev = {net.index(k): v for k, v in query.evidence}
    return t, ev


def _finish(space: _Space, objective, sense, denominator=None) -> MultilinearProgram:
    return MultilinearProgram(
        names=list(space.names), lower=np.array(space.lo), upper=np.array(space.hi),
        objective=objective, rows=list(space.rows), definitions=list(space.definitions),
        sense=sense, denominator=denominator, space=space,
        groups=[g for g in space.groups if not space.coupled.intersection(g[0])])


def build_multilinear_program(net: CredalNetwork, query: Query,
                              direction: str = "upper") -> MultilinearProgram:
    """Decomposed program for ``P(target | evidence)``.

    Without evidence the objective is ``P(target)``; with evidence the
    objective is ``P(target, evidence)`` and ``denominator`` is
    ``P(evidence)``, both read off one elimination that keeps the target.
    """
    t, ev = _target_evidence(net, query)
    sense = "min" if direction == "lower" else "max"
    space = _Space(net)
    nodes = net.ancestral_set([t, *ev])
    if not ev:
        num = _decompose(space, nodes, {t: query.target[1]}, ("joint", query.target[1]))
        return _finish(space, num, sense)
    # one elimination with the target left open: the numerator and the
    # denominator then share every artificial variable
    joint = _decompose(space, nodes, ev, ("joint",), keep=t)
    den: Poly = {}
    for p in joint:
        den = poly_add(den, p)
    return _finish(space, joint[query.target[1]], sense, den)


def build_target_programs(net: CredalNetwork, query: Query):
    """One shared space with ``P(target = x', evidence)`` for every value x'.

    Variable names agree with :func:`build_multilinear_program` for the same
    query, so ranges computed here can seed it.
    """
    t, ev = _target_evidence(net, query)
    space = _Space(net)
    nodes = net.ancestral_set([t, *ev])
    if ev:
        objectives = _decompose(space, nodes, ev, ("joint",), keep=t)
    else:
        objectives = [_decompose(space, nodes, {t: x}, ("joint", x)) for x in range(net.card(t))]
    return _finish(space, {}, "max"), objectives


def flattened_terms(net: CredalNetwork, query: Query) -> dict[int, int]:
    """Term count by degree of the undecomposed sum-of-products objective."""
    t, ev = _target_evidence(net, query)
    space = _Space(net)
    nodes = sorted(net.ancestral_set([t, *ev]))
    fixed = {**ev, t: query.target[1]}
    free = [i for i in nodes if i not in fixed]
    total: Poly = {}
    for vals in itertools.product(*[range(net.card(i)) for i in free]):
        a = {**dict(zip(free, vals)), **fixed}
        term = _const(1.0)
        for i in nodes:
            j = 0
            pc = net.parent_cards(i)
            if pc:
                j = int(np.ravel_multi_index(tuple(a[p] for p in net.parents[i]), pc))
            term = poly_mul(term, space.params(i)[a[i]][j])
        total = poly_add(total, term)
    counts: dict[int, int] = {}
    for m in total:
        counts[len(m)] = counts.get(len(m), 0) + 1
    return counts


def selection_point(mp: MultilinearProgram, selection) -> np.ndarray:
    """Complete point of ``mp`` at one vertex selection of the network."""
    space = mp.space
    net = space.net
    x = 0.5 * (mp.lower + mp.upper)
    for i in space.entries:
        blocks = net.blocks(i)
        picks = selection.get(i, (0,) * len(blocks))
        for k, (b, a) in enumerate(zip(blocks, picks)):
            for wk, wv in enumerate(space.weights.get((i, k), [])):
                x[wv] = 1.0 if wk == a else 0.0
            for col, j in enumerate(b.columns):
                for xv in range(net.card(i)):
                    p = space.entries[i][xv][j]
                    if len(p) == 1:
                        (m, _), = p.items()
                        if len(m) == 1:
                            x[m[0]] = b.alternatives[a, xv, col]
    return mp.complete(x)


# ---------------------------------------------------------------------------
# linearization


class LinearRelaxation:
    """Products of the program replaced by artificial variables.

    ``products[k] = (left, right)`` in the extended index space (original
    variables first, then one slot per product); higher-degree monomials are
    built from pairwise products of their prefixes.
    """

    def __init__(self, mp: MultilinearProgram, rlt: bool = True):
        self.mp = mp
        self.n = mp.n
        self.products: list[tuple[int, int]] = []
        self.slot: dict[tuple, int] = {}
        polys = list(mp.polys())
        for p in polys:
            for m in p:
                if m:
                    self._ext(m)
        eq_rows, ub_rows = [], []  # (dict ext->coef, rhs)

        def lin(p):
            d, const = {}, 0.0
            for m, c in p.items():
                if not m:
                    const += c
                else:
                    k = self._ext(m)
                    d[k] = d.get(k, 0.0) + c
            return d, const

        for p, rel, rhs in mp.rows:
            d, c = lin(p)
            if rel == "==":
                eq_rows.append((d, rhs - c))
            elif rel == "<=":
                ub_rows.append((d, rhs - c))
            else:
                ub_rows.append(({k: -v for k, v in d.items()}, c - rhs))
        for v, p in mp.definitions:
            d, c = lin(p)
            d = {k: -val for k, val in d.items()}
            d[v] = d.get(v, 0.0) + 1.0
            eq_rows.append((d, c))
        self.n_rlt = 0
        if rlt:
            for p, rel, rhs in mp.rows:
                if rel != "==" or poly_degree(p) != 1 or () in p:
                    continue
                idx = [m[0] for m in p]
                for y in range(self.n):
                    keys = [tuple(sorted((i, y))) for i in idx]
                    if all(k in self.slot for k in keys):
                        d = {}
                        for k, m in zip(keys, p):
                            d[self.slot[k]] = d.get(self.slot[k], 0.0) + p[m]
                        d[y] = d.get(y, 0.0) - rhs
                        eq_rows.append((d, 0.0))
                        self.n_rlt += 1
        self.n_ext = self.n + len(self.products)
        self.a_eq, self.b_eq = self._matrix(eq_rows)
        self.a_ub, self.b_ub = self._matrix(ub_rows)
        self.c, self.c0 = lin(mp.objective)
        self.den = lin(mp.denominator) if mp.denominator is not None else None
        self.left = np.array([l for l, _ in self.products], dtype=int)
        self.right = np.array([r for _, r in self.products], dtype=int)
        self.originals = [self._flatten(self.n + k) for k in range(len(self.products))]

    def _ext(self, m: tuple) -> int:
        if len(m) == 1:
            return m[0]
        if m in self.slot:
            return self.slot[m]
        left = self._ext(m[:-1])
        k = self.n + len(self.products)
        self.products.append((left, m[-1]))
        self.slot[m] = k
        return k

    def _flatten(self, k: int) -> list[int]:
        if k < self.n:
            return [k]
        l, r = self.products[k - self.n]
        return self._flatten(l) + self._flatten(r)

    def _matrix(self, rows):
        data, ri, ci, b = [], [], [], []
        for r, (d, rhs) in enumerate(rows):
            for k, v in d.items():
                ri.append(r), ci.append(k), data.append(v)
            b.append(rhs)
        shape = (len(rows), self.n + len(self.products))
        return sp.csr_matrix((data, (ri, ci)), shape=shape), np.array(b, float)

    def product_bounds(self, lo, hi):
        elo = np.concatenate([lo, np.zeros(len(self.products))])
        ehi = np.concatenate([hi, np.zeros(len(self.products))])
        for k, (l, r) in enumerate(self.products):
            c = (elo[l] * elo[r], elo[l] * ehi[r], ehi[l] * elo[r], ehi[l] * ehi[r])
            elo[self.n + k], ehi[self.n + k] = min(c), max(c)
        return elo, ehi

    def envelope_rows(self, elo, ehi):
        """Four bilinear envelope rows per product, as ``A x <= b``."""
        P = len(self.products)
        if P == 0:
            return sp.csr_matrix((0, self.n_ext)), np.zeros(0)
        L, R = self.left, self.right
        t = self.n + np.arange(P)
        xl, xu, yl, yu = elo[L], ehi[L], elo[R], ehi[R]
        # -t + yl x + xl y <= xl yl ; -t + yu x + xu y <= xu yu
        #  t - yl x - xu y <= -xu yl ;  t - yu x - xl y <= -xl yu
        cols = np.concatenate([t, L, R] * 4)
        vals = np.concatenate([-np.ones(P), yl, xl, -np.ones(P), yu, xu,
                               np.ones(P), -yl, -xu, np.ones(P), -yu, -xl])
        rows = np.repeat(np.arange(4), 3 * P) * P + np.tile(np.arange(P), 12)
        a = sp.csr_matrix((vals, (rows, cols)), shape=(4 * P, self.n_ext))
        b = np.concatenate([xl * yl, xu * yu, -xu * yl, -xl * yu])
        return a, b

    def lp(self, lo, hi, objective=None) -> LinearProgram:
        elo, ehi = self.product_bounds(lo, hi)
        a_env, b_env = self.envelope_rows(elo, ehi)
        c = np.zeros(self.n_ext)
        for k, v in (objective if objective is not None else self.c).items():
            c[k] += v
        return LinearProgram(
            c=c, a_ub=sp.vstack([self.a_ub, a_env]).tocsr(), b_ub=np.concatenate([self.b_ub, b_env]),
            a_eq=self.a_eq, b_eq=self.b_eq, lower=elo, upper=ehi, maximize=True)


def linearize(mp: MultilinearProgram, lo=None, hi=None, rlt: bool = True):
    """Linear relaxation of ``mp`` over the given boxes (default: its own)."""
    rel = LinearRelaxation(mp, rlt=rlt)
    lo = mp.lower if lo is None else lo
    hi = mp.upper if hi is None else hi
    return rel, rel.lp(np.asarray(lo, float), np.asarray(hi, float))


# ---------------------------------------------------------------------------
# branch and bound


@dataclass
class BoundReport:
    best_bound: float  # valid outer bound in the program's sense
    incumbent: float  # attained value (nan if none found)
    point: np.ndarray | None
    gap: float
    branches: int
    nodes: int
    status: str  # "exact" | "anytime"
    elapsed_ms: int = 0


def _propagate(mp: MultilinearProgram, lo, hi) -> bool:
    """Forward interval tightening of defined variables; False if empty."""
    for v, p in mp.definitions:
        a, b = poly_interval(p, lo, hi)
        lo[v] = max(lo[v], a)
        hi[v] = min(hi[v], b)
        if lo[v] > hi[v] + 1e-9:
            return False
        if lo[v] > hi[v]:
            lo[v] = hi[v] = 0.5 * (lo[v] + hi[v])
    return True


def _supports(mp: MultilinearProgram) -> dict[int, set[int]]:
    """Free variables each defined variable depends on."""
    sup: dict[int, set[int]] = {}
    for v, p in mp.definitions:
        s: set[int] = set()
        for m in p:
            for i in m:
                s |= sup.get(i, {i})
        sup[v] = s
    return sup


def rl_solve(mp: MultilinearProgram, ranges: dict | None = None, epsilon: float = 1e-6,
             max_branches: int | None = None, max_ms: float | None = None,
             incumbent: tuple[float, np.ndarray] | None = None,
             relaxation: LinearRelaxation | None = None) -> BoundReport:
    """Reformulation-linearization branch and bound on ``mp``.

    Works internally in maximization form.  ``ranges`` (name -> (lo, hi))
    tightens the boxes; they must enclose the feasible projections.
    """
    start = time.perf_counter()
    sign = 1.0 if mp.sense == "max" else -1.0
    rel = relaxation or LinearRelaxation(mp)
    obj = {k: sign * v for k, v in rel.c.items()}
    c0 = sign * rel.c0
    lo, hi = mp.lower.astype(float).copy(), mp.upper.astype(float).copy()
    if ranges:
        for k, nm in enumerate(mp.names):
            if nm in ranges:
                a, b = ranges[nm]
                lo[k], hi[k] = max(lo[k], a), min(hi[k], b)
    if np.any(lo > hi + 1e-9) or not _propagate(mp, lo, hi):
        raise InconsistentConstraintsError("ranges exclude every feasible point")
    hi = np.maximum(hi, lo)

    best_val, best_pt = -np.inf, None
    if incumbent is not None and incumbent[1] is not None:
        best_val, best_pt = sign * incumbent[0], incumbent[1]

    def try_point(x):
        nonlocal best_val, best_pt
        pt = mp.complete(x)
        if mp.feasible(pt):
            val = sign * poly_eval(mp.objective, pt)
            if val > best_val:
                best_val, best_pt = val, pt

    def solve(lo_, hi_):
        res = solve_lp(rel.lp(lo_, hi_, obj))
        if res.status != "optimal":
            return None, None
        return res.value + c0, res.x

    support = _supports(mp)
    group_of = {v: g for g, (vs, _) in enumerate(mp.groups) for v in vs}
    root_val, root_x = solve(lo, hi)
    if root_val is None:
        raise InconsistentConstraintsError("linear relaxation is infeasible at the root")
    counter = itertools.count()
    heap = [(-root_val, next(counter), lo, hi, root_x)]
    branches = nodes = 0
    status = "exact"
    while heap:
        bound = -heap[0][0]
        if bound - best_val <= epsilon:
            break
        if (max_branches is not None and branches >= max_branches) or \
                (max_ms is not None and (time.perf_counter() - start) * 1000 > max_ms):
            status = "anytime"
            break
        neg, _, nlo, nhi, x = heapq.heappop(heap)
        nodes += 1
        try_point(x[: mp.n])
        if -neg - best_val <= epsilon:
            continue
        if not rel.products:
            continue
        err = np.abs(x[rel.n + np.arange(len(rel.products))] - x[rel.left] * x[rel.right])
        order = np.argsort(-err, kind="stable")
        var = None
        for k in order:
            if err[k] <= 1e-10:
                break
            # widest factor; a defined factor passes the split on to the
            # widest free parameter it depends on
            w, negv = max((nhi[v] - nlo[v], -v) for v in rel.originals[k])
            if w <= 1e-10:
                continue
            v = -negv
            if v in support:
                w, negv = max(((nhi[u] - nlo[u], -u) for u in support[v]), default=(0.0, 0))
                if w <= 1e-10:
                    continue
                v = -negv
            var = v
            break
        if var is None:
            continue
        branches += 1
        children = []
        if var in group_of:
            # separately specified column: the optimum sits at a vertex
            gvars, verts = mp.groups[group_of[var]]
            for vert in verts:
                if np.any(vert < nlo[gvars] - 1e-9) or np.any(vert > nhi[gvars] + 1e-9):
                    continue
                clo, chi = nlo.copy(), nhi.copy()
                clo[gvars] = chi[gvars] = vert
                children.append((clo, chi))
        else:
            mid = 0.5 * (nlo[var] + nhi[var])
            for side in (0, 1):
                clo, chi = nlo.copy(), nhi.copy()
                if side == 0:
                    chi[var] = mid
                else:
                    clo[var] = mid
                children.append((clo, chi))
        for clo, chi in children:
            if not _propagate(mp, clo, chi):
                continue
            val, cx = solve(clo, chi)
            if val is None:
                continue
            val = min(val, -neg)
            if val - best_val > epsilon:
                heapq.heappush(heap, (-val, next(counter), clo, chi, cx))
    open_bound = -heap[0][0] if heap else -np.inf
    best_bound = max(open_bound, best_val)
    if not np.isfinite(best_val):
        status = "anytime"
    gap = best_bound - best_val if np.isfinite(best_val) else np.inf
    if gap > epsilon + 1e-12:
        status = "anytime"
    elapsed = int((time.perf_counter() - start) * 1000)
    inc = sign * best_val if np.isfinite(best_val) else np.nan
    return BoundReport(sign * best_bound, inc, best_pt, gap, branches, nodes, status, elapsed)


# ---------------------------------------------------------------------------
# fractional programs


@dataclass
class FractionalReport:
    best_bound: float
    incumbent: float
    gap: float
    iterations: int
    branches: int
    status: str


def denominator_range(mp: MultilinearProgram, ranges: dict | None = None,
                      max_branches: int = 40) -> tuple[float, float]:
    """Outer bounds on the denominator.

    Any outer bound keeps the ratio certificates valid; tighter ones only
    sharpen them early, so a small branch budget is enough.
    """
    den = mp.denominator
    lo = rl_solve(mp.with_objective(den, "min"), ranges, epsilon=1e-9, max_branches=max_branches)
    hi = rl_solve(mp.with_objective(den, "max"), ranges, epsilon=1e-9, max_branches=max_branches)
    return max(lo.best_bound, 0.0), hi.best_bound


def solve_fractional(mp: MultilinearProgram, direction: str = "upper", epsilon: float = 1e-6,
                     incumbent_point: np.ndarray | None = None, ranges: dict | None = None,
                     max_iterations: int = 60, max_ms: float | None = None,
                     den_range: tuple[float, float] | None = None) -> FractionalReport:
    """Bounds on ``objective / denominator`` by a sequence of programs.

    For a trial ratio λ the program ``max N - λ D`` (resp. min) is solved;
    its outer bound B certifies ``N/D <= λ + B/D``, its incumbent gives an
    attained ratio.  λ follows the best attained ratio (Dinkelbach), with a
    bisection step whenever that stalls.
    """
    start = time.perf_counter()
    num, den = mp.objective, mp.denominator
    if den is None:
        raise ModelError("program has no denominator")
    d_min, d_max = den_range or denominator_range(mp, ranges)
    if d_max <= 0.0:
        raise ZeroProbabilityEvidenceError("upper probability of the evidence is zero")
    upper = direction == "upper"

    def ratio(pt):
        d = poly_eval(den, pt)
        return poly_eval(num, pt) / d if d > 0 else None

    attained = None
    if incumbent_point is not None:
        attained = ratio(incumbent_point)
    if attained is None:
        attained = 0.0 if upper else 1.0
        certified_attained = False
    else:
        certified_attained = True
    bound = 1.0 if upper else 0.0
    lam = attained
    iterations = branches = 0
    prev = None
    while iterations < max_iterations:
        iterations += 1
        sub = mp.with_objective(poly_add(num, den, -lam), "max" if upper else "min")
        rep = rl_solve(sub, ranges, epsilon=max(epsilon * max(d_min, 1e-3), 1e-12),
                       max_ms=None if max_ms is None else max(1.0, max_ms - (time.perf_counter() - start) * 1000))
        branches += rep.branches
        B = rep.best_bound
        if rep.point is not None:
            r = ratio(rep.point)
            if r is not None and ((upper and (r > attained or not certified_attained))
                                  or (not upper and (r < attained or not certified_attained))):
                attained, certified_attained = r, True
        if upper:
            if B >= 0:
                cand = lam + B / d_min if d_min > 0 else 1.0
            else:
                cand = lam + B / d_max
            bound = min(bound, cand)
        else:
            if B <= 0:
                cand = lam + B / d_min if d_min > 0 else 0.0
            else:
                cand = lam + B / d_max
            bound = max(bound, cand)
        gap = abs(bound - attained) if certified_attained else np.inf
        if gap <= epsilon:
            break
        if max_ms is not None and (time.perf_counter() - start) * 1000 > max_ms:
            break
        nxt = attained if certified_attained else lam
        if prev is not None and abs(nxt - prev) <= 1e-15:
            nxt = 0.5 * (attained + bound)
        prev = lam = nxt
    gap = abs(bound - attained) if certified_attained else np.inf
    status = "exact" if gap <= epsilon else "anytime"
    return FractionalReport(bound, attained if certified_attained else np.nan, gap,
                            iterations, branches, status)


# ---------------------------------------------------------------------------
# network-level driver


def rl_interval(net: CredalNetwork, query: Query, epsilon: float = 1e-6,
                max_branches: int | None = None, max_ms: float | None = None,
                ranges: dict | None = None, seed: int = 0, restarts: int = 10,
                use_local_search: bool = True) -> IntervalResult:
    """Outer interval on ``P(target | evidence)`` from the RL method."""
    from .oracle import local_search_bound

    start = time.perf_counter()
    directions = ["lower", "upper"] if query.direction == "both" else [query.direction]
    bounds = {"lower": 0.0, "upper": 1.0}
    incumbents = {}
    status, gap, iters, branches = "exact", 0.0, 0, 0
    den_range = None
    for d in directions:
        mp = build_multilinear_program(net, query, d)
        point = None
        if use_local_search:
            try:
                _, sel = local_search_bound(net, query, d, restarts=restarts, seed=seed)
                point = selection_point(mp, sel)
            except CredalError:
                point = None
        if mp.denominator is None:
            inc = (poly_eval(mp.objective, point), point) if point is not None else None
            rep = rl_solve(mp, ranges, epsilon, max_branches, max_ms, incumbent=inc)
            b, attained, g, it, br, st = rep.best_bound, rep.incumbent, rep.gap, rep.nodes, rep.branches, rep.status
        else:
            den_range = den_range or denominator_range(mp, ranges)
            rep = solve_fractional(mp, d, epsilon, point, ranges, max_ms=max_ms, den_range=den_range)
            b, attained, g, it, br, st = rep.best_bound, rep.incumbent, rep.gap, rep.iterations, rep.branches, rep.status
        bounds[d] = min(max(b, 0.0), 1.0)
        incumbents[d] = attained
        gap = max(gap, float(g))
        iters += it
        branches += br
        if st != "exact":
            status = "anytime"
    elapsed = int((time.perf_counter() - start) * 1000)
    return IntervalResult(bounds["lower"], bounds["upper"], status, gap, iters, branches, elapsed,
                          method="rl", extras={"incumbents": incumbents})
