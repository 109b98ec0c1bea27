"""Relational credal networks and their grounding into propositional ones.

A relation's probability formula is a small expression tree.  Grounding
walks the formula for one ground atom, collects the ground atoms it depends
on (these become parents) and evaluates the formula once per parent
configuration into an interval on ``P(atom = true)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (EmptyCombinationError, GroundingError, LeakViolationError,
                     ModelError, UnboundVariableError)
from .model import ConstraintForm, CredalNetwork, Variable, config_values

GroundAtom = tuple  # (relation name, (object, ...))

COMBINATION_KINDS = ("noisy-or", "min", "max", "mean", "cumulative-synergy")


def atom_name(atom: GroundAtom) -> str:
    rel, args = atom
    return f"{rel}({','.join(args)})" if args else rel


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int


# -- formula nodes ----------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    p: float


@dataclass(frozen=True)
class IntervalConstant:
    lower: float
    upper: float


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Indicator:
    condition: Atom
    then: "Formula"
    otherwise: "Formula"


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Neq:
    left: str
    right: str


@dataclass(frozen=True)
class HoldsFact:
    """Binder constraint satisfied when the ground atom is a known true fact."""

    atom: Atom


@dataclass(frozen=True)
class Combine:
    kind: str
    args: tuple["Formula", ...]
    bind: tuple[str, ...] = ()
    where: tuple = ()
    leak: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "bind", tuple(self.bind))
        object.__setattr__(self, "where", tuple(self.where))
        if self.kind not in COMBINATION_KINDS:
            raise ModelError(f"unknown combination function {self.kind!r}")
        if self.kind == "cumulative-synergy" and self.leak is None:
            raise ModelError("cumulative synergy needs a leak interval")


Formula = Union[Constant, IntervalConstant, Atom, Indicator, Combine]


@dataclass(frozen=True, eq=False)
class RelationalCredalNetwork:
    relations: tuple[Relation, ...]
    parents: Mapping[str, tuple[str, ...]]
    formulas: Mapping[str, tuple[tuple[str, ...], Formula]]  # relation -> (argument variables, formula)

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ModelError("relation names must be unique")
        rels = {r.name: r for r in self.relations}
        for r in names:
            if r not in self.formulas:
                raise ModelError(f"relation {r} has no probability formula")
            args, f = self.formulas[r]
            if len(args) != rels[r].arity:
                raise ModelError(f"formula for {r} binds {len(args)} arguments, arity is {rels[r].arity}")
            for used in _relations_in(f):
                if used not in rels:
                    raise ModelError(f"formula for {r} mentions unknown relation {used}")
                if used not in self.parents.get(r, ()):
                    raise ModelError(f"{used} appears in the formula of {r} but is not its parent")
        # acyclicity
        state: dict[str, int] = {}

        def visit(r):
            if state.get(r) == 1:
                raise ModelError("relation graph has a cycle")
            if state.get(r) == 2:
                return
            state[r] = 1
            for p in self.parents.get(r, ()):
                visit(p)
            state[r] = 2

        for r in names:
            visit(r)

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise GroundingError(f"unknown relation {name!r}")


@dataclass(frozen=True, eq=False)
class Domain:
    objects: tuple[str, ...]
    facts: Mapping[GroundAtom, bool] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "facts", {(r, tuple(a)): bool(v) for (r, a), v in dict(self.facts).items()})


def _relations_in(f) -> set[str]:
    if isinstance(f, Atom):
        return {f.relation}
    if isinstance(f, Indicator):
        return {f.condition.relation} | _relations_in(f.then) | _relations_in(f.otherwise)
    if isinstance(f, Combine):
        out = set()
        for a in f.args:
            out |= _relations_in(a)
        return out
    return set()


# -- combination functions --------------------------------------------------


def noisy_or(links: Iterable[float]) -> float:
    """``1 - prod(1 - p_i)``; the empty combination is 0."""
    q = 1.0
    for p in links:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"link probability {p} outside [0, 1]")
        q *= 1.0 - p
    return 1.0 - q


def _synergy_row(values: Sequence[float], leak) -> tuple[float, float]:
    active = [v for v in values if v > 0.0]
    if not active:
        return float(leak[0]), float(leak[1])
    if len(active) == 1:
        return active[0], active[0]
    return max(active), 1.0


def cumulative_synergy_constraints(links: Sequence[tuple[str, float]],
                                   leak: tuple[float, float]) -> ConstraintForm:
    """Boolean local spec for the cumulative-synergy model.

    Columns follow the parent order of ``links`` (last parent fastest):
    all parents false gives the leak interval, exactly one active parent
    gives its link, several active parents give ``[max active link, 1]``.
    """
    lo_a, hi_a = leak
    if not 0.0 <= lo_a <= hi_a <= 1.0:
        raise ModelError(f"bad leak interval {leak}")
    ps = [float(p) for _, p in links]
    if any(not 0.0 < p <= 1.0 for p in ps):
        raise ModelError("link probabilities must lie in (0, 1]")
    if ps and hi_a > min(ps):
        raise LeakViolationError(f"leak upper bound {hi_a} exceeds smallest link {min(ps)}")
    rows = []
    for cfg in itertools.product((0, 1), repeat=len(ps)):
        rows.append(_synergy_row([p if on else 0.0 for p, on in zip(ps, cfg)], leak))
    return ConstraintForm.boolean_intervals(rows)


# -- grounding --------------------------------------------------------------


def _term(t: str, env: Mapping[str, str], domain: Domain) -> str:
    if t in env:
        return env[t]
    if t in domain.objects:
        return t
    raise UnboundVariableError(f"variable {t!r} is not bound")


def _ground(a: Atom, env, domain) -> GroundAtom:
    return a.relation, tuple(_term(t, env, domain) for t in a.args)


def _satisfies(where, env, domain) -> bool:
    for c in where:
        if isinstance(c, Eq):
            ok = _term(c.left, env, domain) == _term(c.right, env, domain)
        elif isinstance(c, Neq):
            ok = _term(c.left, env, domain) != _term(c.right, env, domain)
        elif isinstance(c, HoldsFact):
            ok = domain.facts.get(_ground(c.atom, env, domain)) is True
        else:
            raise ModelError(f"unknown binder constraint {c!r}")
        if not ok:
            return False
    return True


def _expand(f: Combine, env, domain) -> list[tuple[Formula, dict]]:
    """Sub-formulas paired with their environments, binder expanded."""
    if not f.bind:
        return [(a, env) for a in f.args] if _satisfies(f.where, env, domain) else []
    out = []
    for objs in itertools.product(domain.objects, repeat=len(f.bind)):
        e = dict(env, **dict(zip(f.bind, objs)))
        if _satisfies(f.where, e, domain):
            out += [(a, e) for a in f.args]
    return out


def _collect(f, env, domain, acc: dict):
    if isinstance(f, Atom):
        acc.setdefault(_ground(f, env, domain), None)
    elif isinstance(f, Indicator):
        acc.setdefault(_ground(f.condition, env, domain), None)
        _collect(f.then, env, domain, acc)
        _collect(f.otherwise, env, domain, acc)
    elif isinstance(f, Combine):
        for sub, e in _expand(f, env, domain):
            _collect(sub, e, domain, acc)


def _evaluate(f, env, domain, truth: Mapping[GroundAtom, bool]) -> tuple[float, float]:
    if isinstance(f, Constant):
        return float(f.p), float(f.p)
    if isinstance(f, IntervalConstant):
        return float(f.lower), float(f.upper)
    if isinstance(f, Atom):
        v = float(truth[_ground(f, env, domain)])
        return v, v
    if isinstance(f, Indicator):
        branch = f.then if truth[_ground(f.condition, env, domain)] else f.otherwise
        return _evaluate(branch, env, domain, truth)
    subs = [_evaluate(s, e, domain, truth) for s, e in _expand(f, env, domain)]
    los, his = [s[0] for s in subs], [s[1] for s in subs]
    if f.kind == "noisy-or":
        leak = f.leak or (0.0, 0.0)
        return noisy_or(los + [leak[0]]), noisy_or(his + [leak[1]])
    if f.kind == "cumulative-synergy":
        if any(abs(a - b) > 1e-12 for a, b in subs):
            raise ModelError("cumulative-synergy arguments must be point valued")
        return _synergy_row(los, f.leak)
    if not subs:
        raise EmptyCombinationError(f"{f.kind} over an empty set has no value")
    if f.kind == "min":
        return min(los), min(his)
    if f.kind == "max":
        return max(los), max(his)
    return float(np.mean(los)), float(np.mean(his))


def _synergy_links(f, env, domain, parents, acc):
    """Largest value of every cumulative-synergy argument, for the leak check."""
    if isinstance(f, Indicator):
        _synergy_links(f.then, env, domain, parents, acc)
        _synergy_links(f.otherwise, env, domain, parents, acc)
    elif isinstance(f, Combine):
        expanded = _expand(f, env, domain)
        if f.kind == "cumulative-synergy":
            links = []
            for sub, e in expanded:
                best = 0.0
                for cfg in itertools.product((False, True), repeat=len(parents)):
                    best = max(best, _evaluate(sub, e, domain, dict(zip(parents, cfg)))[0])
                links.append(best)
            acc.append((f.leak, links))
        for sub, e in expanded:
            _synergy_links(sub, e, domain, parents, acc)


def eval_formula(formula: Formula, arg_vars: Sequence[str], atom: GroundAtom,
                 domain: Domain) -> tuple[list[GroundAtom], ConstraintForm]:
    """Parents of ``atom`` and its Boolean local spec (one interval per column)."""
    rel, objs = atom
    if len(arg_vars) != len(objs):
        raise GroundingError(f"{atom_name(atom)}: arity mismatch")
    env = dict(zip(arg_vars, objs))
    acc: dict = {}
    _collect(formula, env, domain, acc)
    parents = list(acc)
    synergy: list = []
    _synergy_links(formula, env, domain, parents, synergy)
    for leak, links in synergy:
        positive = [p for p in links if p > 0]
        if positive and leak[1] > min(positive):
            raise LeakViolationError(
                f"{atom_name(atom)}: leak upper bound {leak[1]} exceeds smallest link {min(positive)}")
    rows = []
    cards = (2,) * len(parents)
    for j in range(2 ** len(parents)):
        cfg = config_values(cards, j)
        rows.append(_evaluate(formula, env, domain, {a: bool(v) for a, v in zip(parents, cfg)}))
    spec = ConstraintForm.boolean_intervals(rows, owner=atom_name(atom))
    return parents, spec


def ground(rnet: RelationalCredalNetwork, domain: Domain,
           targets: Sequence[GroundAtom]) -> CredalNetwork:
    """Propositional network over the ancestral closure of ``targets``.

    Known facts become parentless nodes with a point distribution.  Nodes are
    listed parents-first in depth-first discovery order, so the result is a
    deterministic function of the inputs.
    """
    targets = [(r, tuple(a)) for r, a in targets]
    if targets and not domain.objects:
        raise GroundingError("empty domain")
    for rel, objs in list(targets) + list(domain.facts):
        r = rnet.relation(rel)
        if len(objs) != r.arity:
            raise GroundingError(f"{atom_name((rel, objs))}: arity {len(objs)}, expected {r.arity}")
        for o in objs:
            if o not in domain.objects:
                raise GroundingError(f"unknown object {o!r}")

    order: list[GroundAtom] = []
    local: dict[GroundAtom, tuple[list, ConstraintForm]] = {}
    visiting: set = set()

    def visit(atom):
        if atom in local:
            return
        if atom in visiting:
            raise GroundingError(f"cyclic dependency through {atom_name(atom)}")
        visiting.add(atom)
        rnet.relation(atom[0])
        if atom in domain.facts:
            p = 1.0 if domain.facts[atom] else 0.0
            entry = ([], ConstraintForm.boolean_intervals([(p, p)], owner=atom_name(atom)))
        else:
            arg_vars, formula = rnet.formulas[atom[0]]
            entry = eval_formula(formula, arg_vars, atom, domain)
        for parent in entry[0]:
            visit(parent)
        visiting.discard(atom)
        local[atom] = entry
        order.append(atom)

    for t in targets:
        visit(t)
    index = {a: k for k, a in enumerate(order)}
    variables = [Variable.boolean(atom_name(a)) for a in order]
    parents = [tuple(index[p] for p in local[a][0]) for a in order]
    specs = [local[a][1] for a in order]
    return CredalNetwork(variables, parents, specs)


# -- the Holmes example -----------------------------------------------------


def holmes(burglary=(0.001, 0.01), earthquake=(0.01, 0.1), lives_in=(0.05, 0.15),
           links=(0.9, 0.2), leak=(0.0, 0.1)) -> tuple[RelationalCredalNetwork, Domain]:
    """Holmes model with imprecise priors and a cumulative-synergy alarm.

    Residents of LA sound the alarm through a cumulative-synergy combination
    of burglary and earthquake; everyone else follows the point formula
    ``burglary ? 0.9 : 0``.
    """
    b_link, q_link = links
    relations = (Relation("lives-in", 2), Relation("burglary", 1),
                 Relation("earthquake", 1), Relation("alarm", 1))
    parents = {"alarm": ("lives-in", "burglary", "earthquake")}
    burg = Indicator(Atom("burglary", ("v",)), Constant(b_link), Constant(0.0))
    quake = Indicator(Atom("earthquake", ("LA",)), Constant(q_link), Constant(0.0))
    alarm = Indicator(Atom("lives-in", ("v", "LA")),
                      Combine("cumulative-synergy", (burg, quake), leak=tuple(leak)),
                      burg)
    formulas = {
        "lives-in": (("v", "w"), IntervalConstant(*lives_in)),
        "burglary": (("v",), IntervalConstant(*burglary)),
        "earthquake": (("v",), IntervalConstant(*earthquake)),
        "alarm": (("v",), alarm),
    }
    rnet = RelationalCredalNetwork(relations, parents, formulas)
    domain = Domain(("G", "H", "LA"), {("lives-in", ("G", "LA")): True})
    return rnet, domain
