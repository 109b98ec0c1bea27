"""Propositional credal networks: variables, local credal sets, queries.

Parent configurations are indexed lexicographically with the last parent
varying fastest (C order).  For Boolean variables value index 1 is "true",
so ``P(x)`` always means ``P(X = 1)``.

Parameters of constraint-form specs are named ``(variable, value, config)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InfeasibleSpecError, ModelError, UnsupportedConversionError

TOL = 1e-9
RELATIONS = (">=", "<=", "==")


class ParamId(NamedTuple):
    var: str
    value: int
    config: int


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Variable:
    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def cardinality(self) -> int:
        return len(self.labels)

    @classmethod
    def boolean(cls, name: str) -> "Variable":
        return cls(name, ("false", "true"))


@dataclass(frozen=True)
class MultilinearConstraint:
    """``sum_t coef_t * prod(params_t)  <relation>  rhs``."""

    terms: tuple[tuple[float, tuple[ParamId, ...]], ...]
    relation: str
    rhs: float

    def __post_init__(self):
        terms = tuple(
            (float(c), tuple(ParamId(*p) for p in ids)) for c, ids in self.terms
        )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "rhs", float(self.rhs))

    @property
    def degree(self) -> int:
        return max((len(ids) for _, ids in self.terms), default=0)

    def params(self) -> set[ParamId]:
        return {p for _, ids in self.terms for p in ids}

    def evaluate(self, values: Mapping[ParamId, float]) -> float:
        return sum(c * float(np.prod([values[p] for p in ids])) for c, ids in self.terms)

    def satisfied(self, values: Mapping[ParamId, float], tol: float = TOL) -> bool:
        lhs = self.evaluate(values)
        if self.relation == ">=":
            return lhs >= self.rhs - tol
        if self.relation == "<=":
            return lhs <= self.rhs + tol
        return abs(lhs - self.rhs) <= tol


class Block(NamedTuple):
    """Columns whose values are chosen jointly, with their alternatives.

    ``alternatives`` has shape ``(n_alt, cardinality, len(columns))``.
    """

    columns: tuple[int, ...]
    alternatives: np.ndarray


@dataclass(frozen=True, eq=False)
class SeparateVertexForm:
    """One list of candidate distributions per parent configuration."""

    columns: tuple[np.ndarray, ...]

    def __post_init__(self):
        cols = tuple(_frozen(np.atleast_2d(c)) for c in self.columns)
        object.__setattr__(self, "columns", cols)

    def blocks(self) -> list[Block]:
        return [Block((j,), c[:, :, None]) for j, c in enumerate(self.columns)]

    @property
    def is_singleton(self) -> bool:
        return all(len(c) == 1 for c in self.columns)


@dataclass(frozen=True, eq=False)
class ExtensiveVertexForm:
    """Full conditional tables, shape ``(n_tables, cardinality, n_configs)``."""

    tables: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tables", _frozen(self.tables))

    def blocks(self) -> list[Block]:
        n_cfg = self.tables.shape[2]
        return [Block(tuple(range(n_cfg)), self.tables)]

    @property
    def is_singleton(self) -> bool:
        return self.tables.shape[0] == 1


@dataclass(frozen=True, eq=False)
class ConstraintForm:
    """Box-bounded parameters plus multilinear constraints.

    ``lower``/``upper`` have shape ``(cardinality, n_configs)``; the simplex
    equality of every column is implicit.
    """

    lower: np.ndarray
    upper: np.ndarray
    constraints: tuple[MultilinearConstraint, ...] = ()
    owner: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "lower", _frozen(self.lower))
        object.__setattr__(self, "upper", _frozen(self.upper))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @classmethod
    def boolean_intervals(cls, intervals: Sequence[tuple[float, float]], owner=None):
        """Boolean spec from per-column intervals on P(X = true)."""
        iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
        lower = np.vstack([1.0 - iv[:, 1], iv[:, 0]])
        upper = np.vstack([1.0 - iv[:, 0], iv[:, 1]])
        return cls(lower, upper, (), owner)

    def with_constraints(self, extra: Iterable[MultilinearConstraint]) -> "ConstraintForm":
        return ConstraintForm(self.lower, self.upper, self.constraints + tuple(extra), self.owner)

    def column_constraints(self, column: int) -> list[MultilinearConstraint]:
        """Constraints touching ``column``; refuses cross-column coupling."""
        out = []
        for c in self.constraints:
            cfgs = {p.config for p in c.params()}
            names = {p.var for p in c.params()}
            if self.owner is not None and names - {self.owner}:
                if column in cfgs:
                    raise UnsupportedConversionError(
                        "constraint couples parameters of other variables")
                continue
            if column in cfgs:
                if len(cfgs) > 1:
                    raise UnsupportedConversionError(
                        "constraint couples several parent configurations")
                out.append(c)
        return out

    def blocks(self, limit: int = 4) -> list[Block]:
        n_cfg = self.lower.shape[1]
        blocks = []
        for j in range(n_cfg):
            verts = hrep_to_vrep(self, j, limit=limit)
            blocks.append(Block((j,), np.asarray(verts)[:, :, None]))
        return blocks

    @property
    def is_singleton(self) -> bool:
        return not self.constraints and bool(np.all(self.upper - self.lower <= TOL))


LocalCredalSpec = SeparateVertexForm | ExtensiveVertexForm | ConstraintForm


def config_values(cards: Sequence[int], index: int) -> tuple[int, ...]:
    if not cards:
        return ()
    return tuple(int(v) for v in np.unravel_index(index, tuple(cards)))


def config_index(cards: Sequence[int], values: Sequence[int]) -> int:
    if not cards:
        return 0
    return int(np.ravel_multi_index(tuple(values), tuple(cards)))


@dataclass(frozen=True, eq=False)
class CredalNetwork:
    variables: tuple[Variable, ...]
    parents: tuple[tuple[int, ...], ...]
    local: tuple[LocalCredalSpec, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "parents", tuple(tuple(int(p) for p in ps) for ps in self.parents))
        object.__setattr__(self, "local", tuple(self.local))
        object.__setattr__(self, "_index", {v.name: i for i, v in enumerate(self.variables)})

    def __len__(self):
        return len(self.variables)

    def index(self, name: str | int) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def card(self, i: int) -> int:
        return self.variables[i].cardinality

    def parent_cards(self, i: int) -> tuple[int, ...]:
        return tuple(self.card(p) for p in self.parents[i])

    def n_configs(self, i: int) -> int:
        return int(np.prod(self.parent_cards(i), dtype=int))

    def children(self, i: int) -> list[int]:
        return [j for j, ps in enumerate(self.parents) if i in ps]

    def topological_order(self) -> list[int]:
        indeg = [len(set(ps)) for ps in self.parents]
        kids = [self.children(i) for i in range(len(self))]
        ready = [i for i, d in enumerate(indeg) if d == 0]
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for k in kids[i]:
                indeg[k] -= 1
                if indeg[k] == 0:
                    ready.append(k)
        if len(order) != len(self):
            raise ModelError("parent relation has a cycle")
        return order

    def ancestral_set(self, nodes: Iterable[int]) -> set[int]:
        out, stack = set(), list(nodes)
        while stack:
            i = stack.pop()
            if i not in out:
                out.add(i)
                stack.extend(self.parents[i])
        return out

    def undirected_edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, ps in enumerate(self.parents) for p in ps]

    def is_polytree(self) -> bool:
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(len(self)))
        g.add_edges_from(self.undirected_edges())
        return nx.is_forest(g)

    def blocks(self, i: int) -> list[Block]:
        return self.local[i].blocks()

    def is_singleton(self) -> bool:
        return all(s.is_singleton for s in self.local)

    def with_local(self, i: int, spec: LocalCredalSpec) -> "CredalNetwork":
        local = list(self.local)
        local[i] = spec
        return CredalNetwork(self.variables, self.parents, local)

    def subnetwork(self, keep: Iterable[int]) -> tuple["CredalNetwork", list[int]]:
        """Restrict to ``keep`` (must be closed under parents).

        Returns the new network and the list mapping new to old indices.
        """
        old = sorted(set(keep))
        new_of = {o: n for n, o in enumerate(old)}
        parents = []
        for o in old:
            if any(p not in new_of for p in self.parents[o]):
                raise ModelError("subnetwork is not closed under parents")
            parents.append(tuple(new_of[p] for p in self.parents[o]))
        return CredalNetwork([self.variables[o] for o in old], parents,
                             [self.local[o] for o in old]), old


@dataclass(frozen=True)
class Query:
    target: tuple[str, int]
    evidence: tuple[tuple[str, int], ...] = ()
    direction: str = "both"

    def __post_init__(self):
        ev = self.evidence.items() if isinstance(self.evidence, Mapping) else self.evidence
        object.__setattr__(self, "evidence", tuple(sorted((str(k), int(v)) for k, v in ev)))
        object.__setattr__(self, "target", (str(self.target[0]), int(self.target[1])))
        if self.direction not in ("lower", "upper", "both"):
            raise ModelError(f"bad direction {self.direction!r}")

    @classmethod
    def parse(cls, net: CredalNetwork, target: str, evidence: Iterable[str] = (),
              direction: str = "both") -> "Query":
        """Build from ``"X=label"`` strings (a numeric value index also works)."""

        def one(text):
            name, _, val = text.partition("=")
            var = net.variables[net.index(name.strip())]
            val = val.strip()
            if val in var.labels:
                return var.name, var.labels.index(val)
            if val.isdigit() and int(val) < var.cardinality:
                return var.name, int(val)
            raise ModelError(f"unknown value {val!r} for {var.name}")

        return cls(one(target), tuple(one(e) for e in evidence), direction)

    def evidence_dict(self) -> dict[str, int]:
        return dict(self.evidence)

    def check(self, net: CredalNetwork) -> None:
        name, val = self.target
        t = net.index(name)
        if not 0 <= val < net.card(t):
            raise ModelError(f"target value out of range for {name}")
        for k, v in self.evidence:
            i = net.index(k)
            if k == name:
                raise ModelError("target variable is also observed")
            if not 0 <= v < net.card(i):
                raise ModelError(f"evidence value out of range for {k}")


@dataclass
class IntervalResult:
    lower: float
    upper: float
    status: str = "exact"
    gap: float = 0.0
    iterations: int = 0
    branches: int = 0
    elapsed_ms: int = 0
    method: str = ""
    extras: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.status not in ("exact", "outer", "anytime"):
            raise ValueError(f"bad status {self.status!r}")
        lo, hi = float(self.lower), float(self.upper)
        if lo > hi + 1e-7 or lo < -1e-7 or hi > 1 + 1e-7:
            raise ValueError(f"invalid probability interval [{lo}, {hi}]")
        self.lower = min(max(lo, 0.0), 1.0)
        self.upper = max(min(hi, 1.0), self.lower)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, other: "IntervalResult", slack: float = 1e-9) -> bool:
        return self.lower <= other.lower + slack and other.upper <= self.upper + slack

    def as_record(self) -> dict:
        return {
            "lower": self.lower, "upper": self.upper, "method": self.method,
            "status": self.status, "gap": self.gap, "iterations": self.iterations,
            "branches": self.branches, "elapsed_ms": self.elapsed_ms,
        }


# ---------------------------------------------------------------------------
# validation


class Violation(NamedTuple):
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, detail: str):
        self.violations.append(Violation(kind, detail))


def _check_distribution(report, where, vec, card):
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (card,):
        report.add("dimension", f"{where}: expected {card} entries, got {vec.shape}")
        return
    if np.any(vec < -TOL) or np.any(vec > 1 + TOL):
        report.add("range", f"{where}: entries outside [0, 1]")
    if abs(vec.sum() - 1.0) > TOL:
        report.add("column-sum", f"{where}: sums to {vec.sum():.12g}")


def validate_network(net: CredalNetwork) -> ValidationReport:
    """Collect every violated invariant; an empty report means valid."""
    from .lp import LinearProgram, solve_lp

    report = ValidationReport()
    n = len(net.variables)
    names = [v.name for v in net.variables]
    if len(set(names)) != len(names):
        report.add("duplicate", "variable names are not unique")
    for v in net.variables:
        if v.cardinality < 2:
            report.add("cardinality", f"{v.name}: needs at least 2 labels")
        if len(set(v.labels)) != len(v.labels):
            report.add("labels", f"{v.name}: labels not unique")
    if len(net.parents) != n or len(net.local) != n:
        report.add("dimension", "parents/local lists do not match variables")
        return report
    structural_ok = True
    for i, ps in enumerate(net.parents):
        if any(p < 0 or p >= n for p in ps):
            report.add("dimension", f"{names[i]}: parent index out of range")
            structural_ok = False
        elif i in ps:
            report.add("cycle", f"{names[i]} is its own parent")
            structural_ok = False
        if len(set(ps)) != len(ps):
            report.add("duplicate", f"{names[i]}: repeated parent")
    if structural_ok:
        try:
            net.topological_order()
        except ModelError:
            report.add("cycle", "parent relation has a cycle")
    if not structural_ok:
        return report

    for i, spec in enumerate(net.local):
        name, card, n_cfg = names[i], net.card(i), net.n_configs(i)
        if isinstance(spec, SeparateVertexForm):
            if len(spec.columns) != n_cfg:
                report.add("dimension", f"{name}: {len(spec.columns)} columns, expected {n_cfg}")
                continue
            for j, col in enumerate(spec.columns):
                if col.size == 0 or len(col) == 0:
                    report.add("empty-vertices", f"{name}[{j}]: no vertices")
                for k, vert in enumerate(col):
                    _check_distribution(report, f"{name}[{j}] vertex {k}", vert, card)
        elif isinstance(spec, ExtensiveVertexForm):
            t = spec.tables
            if t.ndim != 3 or t.shape[0] == 0:
                report.add("empty-vertices", f"{name}: no tables")
                continue
            if t.shape[1:] != (card, n_cfg):
                report.add("dimension", f"{name}: table shape {t.shape[1:]}, expected {(card, n_cfg)}")
                continue
            for k in range(t.shape[0]):
                for j in range(n_cfg):
                    _check_distribution(report, f"{name} table {k} column {j}", t[k, :, j], card)
        elif isinstance(spec, ConstraintForm):
            if spec.lower.shape != (card, n_cfg) or spec.upper.shape != (card, n_cfg):
                report.add("dimension", f"{name}: box shape mismatch")
                continue
            if np.any(spec.lower > spec.upper + TOL):
                report.add("box", f"{name}: lower bound above upper bound")
            if np.any(spec.lower < -TOL) or np.any(spec.upper > 1 + TOL):
                report.add("range", f"{name}: box outside [0, 1]")
            lo_sum, hi_sum = spec.lower.sum(axis=0), spec.upper.sum(axis=0)
            for j in range(n_cfg):
                if lo_sum[j] > 1 + TOL or hi_sum[j] < 1 - TOL:
                    report.add("infeasible", f"{name}[{j}]: boxes exclude the simplex")
            bad_ref = False
            for c in spec.constraints:
                if c.relation not in RELATIONS:
                    report.add("constraint", f"{name}: bad relation {c.relation!r}")
                if c.degree < 1:
                    report.add("constraint", f"{name}: constraint of degree 0")
                for p in c.params():
                    if p.var not in net._index:
                        report.add("unknown-parameter", f"{name}: {p} names unknown variable")
                        bad_ref = True
                        continue
                    k = net.index(p.var)
                    local = net.local[k]
                    if not (0 <= p.value < net.card(k) and 0 <= p.config < net.n_configs(k)):
                        report.add("unknown-parameter", f"{name}: {p} out of range")
                        bad_ref = True
                    elif not isinstance(local, ConstraintForm):
                        report.add("unknown-parameter", f"{name}: {p} is not a free parameter")
                        bad_ref = True
            if not bad_ref and spec.constraints and all(c.degree == 1 for c in spec.constraints):
                lp = _linear_feasibility_lp(net, i)
                if lp is not None and solve_lp(lp).status != "optimal":
                    report.add("infeasible", f"{name}: linear constraints have no solution")
        else:
            report.add("form", f"{name}: unknown local spec type {type(spec).__name__}")
    return report


def _linear_feasibility_lp(net, i):
    from .lp import LinearProgram

    spec = net.local[i]
    name = net.variables[i].name
    if any(p.var != name for c in spec.constraints for p in c.params()):
        return None
    card, n_cfg = spec.lower.shape
    nv = card * n_cfg
    idx = lambda x, j: x * n_cfg + j  # noqa: E731
    a_eq, b_eq, a_ub, b_ub = [], [], [], []
    for j in range(n_cfg):
        row = np.zeros(nv)
        row[[idx(x, j) for x in range(card)]] = 1
        a_eq.append(row)
        b_eq.append(1.0)
    for c in spec.constraints:
        row = np.zeros(nv)
        for coef, ids in c.terms:
            row[idx(ids[0].value, ids[0].config)] += coef
        if c.relation == "==":
            a_eq.append(row), b_eq.append(c.rhs)
        elif c.relation == "<=":
            a_ub.append(row), b_ub.append(c.rhs)
        else:
            a_ub.append(-row), b_ub.append(-c.rhs)
    return LinearProgram(
        c=np.zeros(nv), a_ub=np.array(a_ub).reshape(-1, nv), b_ub=np.array(b_ub),
        a_eq=np.array(a_eq), b_eq=np.array(b_eq),
        lower=spec.lower.reshape(-1), upper=spec.upper.reshape(-1))


# ---------------------------------------------------------------------------
# qualitative influences and vertex conversion


def qualitative_influence_constraints(net: CredalNetwork, edge: tuple[str, str],
                                      sign: str = "+") -> list[MultilinearConstraint]:
    """Constraints ``P(x|y,z) >= P(x|~y,z)`` for every configuration z of the
    other parents of X (reversed for sign ``-``)."""
    y_name, x_name = edge
    x, y = net.index(x_name), net.index(y_name)
    if net.card(x) != 2 or net.card(y) != 2:
        raise ModelError("qualitative influences need Boolean variables")
    if y not in net.parents[x]:
        raise ModelError(f"{y_name} is not a parent of {x_name}")
    if sign not in "+-":
        raise ModelError(f"unknown sign {sign!r}")
    pos = net.parents[x].index(y)
    cards = net.parent_cards(x)
    others = [c for k, c in enumerate(cards) if k != pos]
    rel = ">=" if sign == "+" else "<="
    out = []
    for z in itertools.product(*[range(c) for c in others]):
        vals_y = list(z[:pos]) + [1] + list(z[pos:])
        vals_n = list(z[:pos]) + [0] + list(z[pos:])
        j1, j0 = config_index(cards, vals_y), config_index(cards, vals_n)
        out.append(MultilinearConstraint(
            ((1.0, (ParamId(x_name, 1, j1),)), (-1.0, (ParamId(x_name, 1, j0),))), rel, 0.0))
    return out


def hrep_to_vrep(spec: ConstraintForm, column: int, limit: int = 4) -> list[np.ndarray]:
    """Extreme points of one constraint-form column.

    Every vertex lies where ``card - n_eq`` inequalities are active; all such
    intersections are solved and filtered for feasibility.
    """
    card = spec.lower.shape[0]
    if card > limit:
        raise UnsupportedConversionError(f"column dimension {card} exceeds limit {limit}")
    cons = spec.column_constraints(column)
    eq_rows, eq_rhs = [np.ones(card)], [1.0]
    ineq_rows, ineq_rhs = [], []  # row . x <= rhs
    for x in range(card):
        e = np.zeros(card)
        e[x] = 1
        ineq_rows += [e, -e]
        ineq_rhs += [spec.upper[x, column], -spec.lower[x, column]]
    for c in cons:
        if c.degree > 1:
            raise UnsupportedConversionError("nonlinear constraint in column")
        row = np.zeros(card)
        for coef, ids in c.terms:
            row[ids[0].value] += coef
        if c.relation == "==":
            eq_rows.append(row), eq_rhs.append(c.rhs)
        elif c.relation == "<=":
            ineq_rows.append(row), ineq_rhs.append(c.rhs)
        else:
            ineq_rows.append(-row), ineq_rhs.append(-c.rhs)
    E, e = np.array(eq_rows), np.array(eq_rhs)
    G, g = np.array(ineq_rows), np.array(ineq_rhs)
    rank_e = np.linalg.matrix_rank(E)
    need = card - rank_e
    verts: list[np.ndarray] = []

    def feasible(pt):
        return np.all(G @ pt <= g + TOL) and np.allclose(E @ pt, e, atol=TOL)

    for active in itertools.combinations(range(len(G)), need):
        A = np.vstack([E, G[list(active)]]) if need else E
        b = np.concatenate([e, g[list(active)]]) if need else e
        if np.linalg.matrix_rank(A) < card:
            continue
        pt, *_ = np.linalg.lstsq(A, b, rcond=None)
        if not np.allclose(A @ pt, b, atol=1e-10) or not feasible(pt):
            continue
        pt = np.clip(pt, 0.0, 1.0)
        if not any(np.max(np.abs(pt - v)) <= TOL for v in verts):
            verts.append(pt)
    if not verts:
        raise InfeasibleSpecError(f"column {column} has an empty credal set")
    verts.sort(key=lambda v: tuple(v))
    return verts
