"""Seeded random credal networks for tests and benchmarks."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .errors import ModelError
from .model import CredalNetwork, SeparateVertexForm, Variable


def _variable(name: str, k: int) -> Variable:
    return Variable.boolean(name) if k == 2 else Variable(name, tuple(f"s{j}" for j in range(k)))


def _column(rng, k: int, v: int, spread: float) -> np.ndarray:
    """``v`` distinct-ish vertices around a uniform random distribution."""
    base = rng.dirichlet(np.ones(k))
    if v == 1:
        return base[None, :]
    pts = base + rng.uniform(-spread, spread, size=(v, k))
    pts = np.clip(pts, 0.0, None)
    pts[pts.sum(axis=1) == 0] = base
    return pts / pts.sum(axis=1, keepdims=True)


def _polytree_edges(rng, n: int, m: int) -> list[tuple[int, int]]:
    indeg = [0] * n
    edges = []
    for i in range(1, n):
        j = int(rng.integers(i))
        # orient at random unless it would break the in-degree cap
        if (rng.random() < 0.5 and indeg[i] < m) or indeg[j] >= m:
            edges.append((j, i))
            indeg[i] += 1
        else:
            edges.append((i, j))
            indeg[j] += 1
    return edges


def _multi_edges(rng, n: int, m: int) -> list[tuple[int, int]]:
    edges = []
    for i in range(1, n):
        k = int(rng.integers(1, min(m, i) + 1))
        edges += [(int(p), i) for p in sorted(rng.choice(i, size=k, replace=False))]
    g = nx.Graph(edges)
    g.add_nodes_from(range(n))
    if n >= 3 and nx.is_forest(g) and m >= 2:
        # close one loop: give a node with a single parent a second one
        for i in range(2, n):
            ps = [p for p, c in edges if c == i]
            if len(ps) < m:
                extra = [p for p in range(i) if p not in ps]
                if extra:
                    edges.append((int(rng.choice(extra)), i))
                    break
    return edges


def random_network(nodes: int, topology: str = "multi", cardinality: int = 2,
                   vertices: int = 2, max_parents: int | None = None, seed: int = 0,
                   spread: float = 0.15) -> CredalNetwork:
    """Random separately specified network; the same arguments give the same network."""
    if nodes < 1 or cardinality < 2 or vertices < 1:
        raise ModelError("need nodes >= 1, cardinality >= 2, vertices >= 1")
    if max_parents is None:
        max_parents = min(2, nodes - 1)
    elif nodes > 1 and max_parents >= nodes:
        raise ModelError(f"max parents {max_parents} must be below the node count {nodes}")
    if topology not in ("polytree", "multi"):
        raise ModelError(f"unknown topology {topology!r}")
    rng = np.random.default_rng(seed)
    m = max(max_parents, 1)
    edges = [] if nodes == 1 else (
        _polytree_edges(rng, nodes, m) if topology == "polytree" else _multi_edges(rng, nodes, m))
    # relabel in topological order so parents precede children
    g = nx.DiGraph(edges)
    g.add_nodes_from(range(nodes))
    order = list(nx.lexicographical_topological_sort(g))
    new = {old: k for k, old in enumerate(order)}
    parents = [[] for _ in range(nodes)]
    for p, c in edges:
        parents[new[c]].append(new[p])
    parents = [tuple(sorted(ps)) for ps in parents]
    variables = [_variable(f"X{i}", cardinality) for i in range(nodes)]
    local = []
    for ps in parents:
        n_cfg = cardinality ** len(ps)
        local.append(SeparateVertexForm(tuple(
            _column(rng, cardinality, vertices, spread) for _ in range(n_cfg))))
    return CredalNetwork(variables, parents, local)
