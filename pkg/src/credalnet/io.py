"""JSON formats for networks, relational models and results.

Network files::

    {"variables": [{"name": "A", "labels": ["false", "true"]}, ...],
     "edges": [["A", "B"], ...],
     "local": {"B": {"form": "vertices", "columns": [[[0.9, 0.1], [0.8, 0.2]], ...]}},
     "queries": [{"target": "B=true", "evidence": ["A=false"]}]}

A node's parents are listed in the order their edges first appear.  Columns
follow parent configurations in lexicographic order with the last parent
varying fastest.  Local forms:

* ``{"form": "vertices", "columns": [...]}`` -- per column, a list of
  distributions (separately specified);
* ``{"form": "vertices", "tables": [...]}`` -- per table, a list of columns
  (extensively specified);
* ``{"form": "constraints", "lower": [...], "upper": [...], "constraints": [...]}``
  -- per-column boxes plus records
  ``{"terms": [[coef, [[var, value, config], ...]], ...], "relation": ">=", "rhs": 0}``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, ModelError
from .model import (ConstraintForm, CredalNetwork, ExtensiveVertexForm, IntervalResult,
                    MultilinearConstraint, Query, SeparateVertexForm, Variable)
from .relational import (Atom, Combine, Constant, Domain, Eq, HoldsFact, Indicator,
                         IntervalConstant, Neq, Relation, RelationalCredalNetwork)


def _load(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"{path}: {e}") from None


def _dump(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def _num(x) -> float | list:
    return np.asarray(x, float).round(15).tolist()


# -- networks ---------------------------------------------------------------


def _local_from_json(d: dict, card: int):
    form = d.get("form")
    if form == "vertices" and "columns" in d:
        return SeparateVertexForm(tuple(np.asarray(c, float).reshape(-1, card) for c in d["columns"]))
    if form == "vertices" and "tables" in d:
        t = np.asarray(d["tables"], float)  # (n, n_cfg, card)
        return ExtensiveVertexForm(t.transpose(0, 2, 1))
    if form == "constraints":
        cons = tuple(
            MultilinearConstraint(tuple((float(c), tuple(tuple(p) for p in ids)) for c, ids in r["terms"]),
                                  r["relation"], float(r["rhs"]))
            for r in d.get("constraints", ()))
        lo = np.asarray(d["lower"], float).T
        hi = np.asarray(d["upper"], float).T
        return ConstraintForm(lo, hi, cons, d.get("owner"))
    raise FormatError(f"unknown local form {form!r}")


def network_from_json(doc: dict) -> CredalNetwork:
    try:
        variables = [Variable(v["name"], tuple(v["labels"])) for v in doc["variables"]]
        index = {v.name: k for k, v in enumerate(variables)}
        parents: list[list[int]] = [[] for _ in variables]
        for p, c in doc.get("edges", ()):
            if p not in index or c not in index:
                raise ModelError(f"edge mentions unknown variable: {p} -> {c}")
            parents[index[c]].append(index[p])
        local = []
        for v in variables:
            if v.name not in doc["local"]:
                raise ModelError(f"no local spec for {v.name}")
            local.append(_local_from_json(doc["local"][v.name], v.cardinality))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed network document: {e!r}") from None
    return CredalNetwork(variables, [tuple(p) for p in parents], local)


def _local_to_json(spec) -> dict:
    if isinstance(spec, SeparateVertexForm):
        return {"form": "vertices", "columns": [_num(c) for c in spec.columns]}
    if isinstance(spec, ExtensiveVertexForm):
        return {"form": "vertices", "tables": _num(np.asarray(spec.tables).transpose(0, 2, 1))}
    out = {"form": "constraints", "lower": _num(np.asarray(spec.lower).T),
           "upper": _num(np.asarray(spec.upper).T),
           "constraints": [{"terms": [[c, [list(p) for p in ids]] for c, ids in r.terms],
                            "relation": r.relation, "rhs": r.rhs} for r in spec.constraints]}
    if spec.owner is not None:
        out["owner"] = spec.owner
    return out


def network_to_json(net: CredalNetwork, queries=()) -> dict:
    doc = {
        "variables": [{"name": v.name, "labels": list(v.labels)} for v in net.variables],
        "edges": [[net.variables[p].name, v.name] for i, v in enumerate(net.variables)
                  for p in net.parents[i]],
        "local": {v.name: _local_to_json(net.local[i]) for i, v in enumerate(net.variables)},
    }
    if queries:
        doc["queries"] = [query_to_json(net, q) for q in queries]
    return doc


def query_to_json(net: CredalNetwork, q: Query) -> dict:
    def one(name, val):
        return f"{name}={net.variables[net.index(name)].labels[val]}"

    return {"target": one(*q.target), "evidence": [one(k, v) for k, v in q.evidence]}


def queries_from_json(net: CredalNetwork, doc: dict) -> list[Query]:
    return [Query.parse(net, q["target"], q.get("evidence", ())) for q in doc.get("queries", ())]


def read_network(path) -> tuple[CredalNetwork, list[Query]]:
    doc = _load(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    net = network_from_json(doc)
    return net, queries_from_json(net, doc)


def write_network(net: CredalNetwork, path, queries=()) -> None:
    Path(path).write_text(_dump(network_to_json(net, queries)))


# -- relational models --------------------------------------------------------


def formula_from_json(d: dict):
    kind = d.get("type")
    if kind == "constant":
        return Constant(float(d["p"]))
    if kind == "interval":
        return IntervalConstant(float(d["lower"]), float(d["upper"]))
    if kind == "atom":
        return Atom(d["relation"], tuple(d["args"]))
    if kind == "if":
        return Indicator(formula_from_json(d["condition"]), formula_from_json(d["then"]),
                         formula_from_json(d["else"]))
    if kind == "combine":
        where = []
        for w in d.get("where", ()):
            if w["type"] == "eq":
                where.append(Eq(w["left"], w["right"]))
            elif w["type"] == "neq":
                where.append(Neq(w["left"], w["right"]))
            elif w["type"] == "holds":
                where.append(HoldsFact(formula_from_json(w["atom"])))
            else:
                raise FormatError(f"unknown binder constraint {w['type']!r}")
        leak = tuple(d["leak"]) if d.get("leak") is not None else None
        return Combine(d["kind"], tuple(formula_from_json(a) for a in d["args"]),
                       tuple(d.get("bind", ())), tuple(where), leak)
    raise FormatError(f"unknown formula node {kind!r}")


def formula_to_json(f) -> dict:
    if isinstance(f, Constant):
        return {"type": "constant", "p": f.p}
    if isinstance(f, IntervalConstant):
        return {"type": "interval", "lower": f.lower, "upper": f.upper}
    if isinstance(f, Atom):
        return {"type": "atom", "relation": f.relation, "args": list(f.args)}
    if isinstance(f, Indicator):
        return {"type": "if", "condition": formula_to_json(f.condition),
                "then": formula_to_json(f.then), "else": formula_to_json(f.otherwise)}
    where = []
    for w in f.where:
        if isinstance(w, HoldsFact):
            where.append({"type": "holds", "atom": formula_to_json(w.atom)})
        else:
            where.append({"type": "eq" if isinstance(w, Eq) else "neq", "left": w.left, "right": w.right})
    out = {"type": "combine", "kind": f.kind, "args": [formula_to_json(a) for a in f.args],
           "bind": list(f.bind), "where": where}
    if f.leak is not None:
        out["leak"] = list(f.leak)
    return out


def relational_from_json(doc: dict) -> tuple[RelationalCredalNetwork, Domain, list]:
    """Model, domain and the (possibly empty) list of target atoms."""
    try:
        relations = tuple(Relation(r["name"], int(r["arity"])) for r in doc["relations"])
        parents = {k: tuple(v) for k, v in doc.get("parents", {}).items()}
        formulas = {k: (tuple(v["args"]), formula_from_json(v["formula"]))
                    for k, v in doc["formulas"].items()}
        dom = doc.get("domain", {})
        facts = {(f["relation"], tuple(f["args"])): bool(f.get("value", True))
                 for f in dom.get("facts", ())}
        domain = Domain(tuple(dom.get("objects", ())), facts)
        targets = [(t[0], tuple(t[1])) for t in doc.get("targets", ())]
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise FormatError(f"malformed relational document: {e!r}") from None
    return RelationalCredalNetwork(relations, parents, formulas), domain, targets


def relational_to_json(rnet: RelationalCredalNetwork, domain: Domain, targets=()) -> dict:
    return {
        "relations": [{"name": r.name, "arity": r.arity} for r in rnet.relations],
        "parents": {k: list(v) for k, v in rnet.parents.items()},
        "formulas": {k: {"args": list(a), "formula": formula_to_json(f)}
                     for k, (a, f) in rnet.formulas.items()},
        "domain": {"objects": list(domain.objects),
                   "facts": [{"relation": r, "args": list(a), "value": v}
                             for (r, a), v in domain.facts.items()]},
        "targets": [[r, list(a)] for r, a in targets],
    }


def read_relational(path):
    doc = _load(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return relational_from_json(doc)


def write_relational(rnet, domain, path, targets=()) -> None:
    Path(path).write_text(_dump(relational_to_json(rnet, domain, targets)))


# -- results ------------------------------------------------------------------


def result_record(res: IntervalResult) -> dict:
    rec = res.as_record()
    for k in ("lower", "upper", "gap"):
        v = float(rec[k])
        rec[k] = float(f"{v:.12g}") if np.isfinite(v) else None
    for k in ("iterations", "branches", "elapsed_ms"):
        rec[k] = int(rec[k])
    return rec
