import networkx as nx
import numpy as np
import pytest

from credalnet import (ConstraintForm, CredalNetwork, PreconditionError, PropagationSchedule,
                       Query, SeparateVertexForm, TopologyError, Variable, ar_plus, ar_plus_plus,
                       exact_bounds_enumeration, ipe, l2u, local_bounds, random_network,
                       select_cutset, two_u, ve_marginal)

from conftest import boolean_column, chain_net, interval_root


def _diamond() -> CredalNetwork:
    """A -> B, A -> C, (B, C) -> D: one undirected loop over four nodes."""
    vs = [Variable.boolean(n) for n in "ABCD"]
    spec = lambda k: ConstraintForm.boolean_intervals([(0.2, 0.6)] * k)
    return CredalNetwork(vs, [(), (0,), (0,), (1, 2)], [spec(1), spec(2), spec(2), spec(4)])


def _is_polytree_after(net, cut):
    g = nx.Graph()
    g.add_nodes_from(i for i in range(len(net)) if i not in cut)
    g.add_edges_from((p, i) for i in range(len(net)) if i not in cut
                     for p in net.parents[i] if p not in cut)
    return nx.is_forest(g)


def _parent_child_net(cpt_true):
    y, x = Variable.boolean("Y"), Variable.boolean("X")
    return CredalNetwork([y, x], [(), (0,)],
                         [ConstraintForm.boolean_intervals([(0.5, 0.5)]),
                          ConstraintForm.boolean_intervals(cpt_true)])


def test_local_bounds_root():
    assert local_bounds(interval_root(0.2, 0.7), 0, []) == pytest.approx((0.2, 0.7))


def test_local_bounds_single_parent():
    net = _parent_child_net([(0.1, 0.1), (0.8, 0.8)])
    assert local_bounds(net, 1, [(0.3, 0.3)]) == pytest.approx((0.31, 0.31))


def test_local_bounds_vacuous():
    vs = [Variable.boolean(n) for n in "YZX"]
    vac = ConstraintForm.boolean_intervals
    net = CredalNetwork(vs, [(), (), (0, 1)], [vac([(0, 1)]), vac([(0, 1)]), vac([(0, 1)] * 4)])
    assert local_bounds(net, 2, [(0.0, 1.0), (0.0, 1.0)]) == pytest.approx((0.0, 1.0))


def test_two_u_single_node():
    res = two_u(interval_root(0.2, 0.7), Query(("X", 1)))
    assert (res.lower, res.upper) == pytest.approx((0.2, 0.7))
    assert res.status == "exact"


@pytest.mark.parametrize("seed", range(8))
def test_two_u_matches_oracle(seed):
    net = random_network(5, "polytree", seed=seed)
    rng = np.random.default_rng(seed)
    ev = ((net.variables[int(rng.integers(5))].name, int(rng.integers(2))),) if seed % 2 else ()
    target = next(v.name for v in net.variables if v.name not in dict(ev))
    q = Query((target, 1), ev)
    got, exact = two_u(net, q), exact_bounds_enumeration(net, q)
    assert got.lower == pytest.approx(exact.lower, abs=1e-6)
    assert got.upper == pytest.approx(exact.upper, abs=1e-6)


def test_two_u_singleton_with_evidence():
    q = Query(("X", 1), (("Y", 1),))
    res = two_u(chain_net(), q)
    assert res.lower == pytest.approx(res.upper) == pytest.approx(ve_marginal(chain_net(), q))


def test_two_u_rejects_loops():
    with pytest.raises(TopologyError):
        two_u(_diamond(), Query(("D", 1)))


def test_ar_plus_singleton_is_point():
    q = Query(("X", 1), (("Y", 1),))
    res = ar_plus(chain_net(), q)
    assert res.lower == pytest.approx(res.upper) == pytest.approx(ve_marginal(chain_net(), q))


def test_ar_plus_vacuous():
    net = _parent_child_net([(0.0, 1.0), (0.0, 1.0)])
    res = ar_plus(net, Query(("X", 1)))
    assert (res.lower, res.upper) == pytest.approx((0.0, 1.0))


@pytest.mark.parametrize("seed", range(5))
def test_ar_chain_of_enclosures(seed):
    net = random_network(6, "multi", seed=seed)
    q = Query((net.variables[-1].name, 1), ((net.variables[0].name, 0),))
    exact = exact_bounds_enumeration(net, q)
    plus = ar_plus(net, q)
    pp, ranges = ar_plus_plus(net, q)
    assert pp.contains(exact) and plus.contains(pp)
    assert pp.width <= plus.width + 1e-12
    assert ranges


def test_ar_plus_plus_singleton_is_point():
    res, _ = ar_plus_plus(chain_net(), Query(("Y", 1)))
    assert res.lower == pytest.approx(0.31) and res.upper == pytest.approx(0.31)


def test_ar_plus_plus_equals_exact_ar_plus():
    net = interval_root(0.2, 0.7)
    assert ar_plus_plus(net, Query(("X", 1)))[0].lower == ar_plus(net, Query(("X", 1))).lower


def test_cutset_of_polytree_is_empty():
    assert select_cutset(random_network(7, "polytree", seed=2), seed=5) == []


def test_cutset_breaks_single_loop():
    net = _diamond()
    cut = select_cutset(net, seed=0)
    assert len(cut) == 1
    assert _is_polytree_after(net, cut)
    assert select_cutset(net, seed=0) == cut


@pytest.mark.parametrize("seed", range(4))
def test_cutset_breaks_random_loops(seed):
    net = random_network(9, "multi", seed=seed)
    assert _is_polytree_after(net, select_cutset(net, seed=seed))


def test_ipe_on_polytree_equals_two_u():
    net = random_network(6, "polytree", seed=1)
    q = Query((net.variables[-1].name, 1))
    for iterations in (1, 5):
        got = ipe(net, q, iterations=iterations)
        assert got.lower == pytest.approx(two_u(net, q).lower)
        assert got.upper == pytest.approx(two_u(net, q).upper)


@pytest.mark.parametrize("seed", range(4))
def test_ipe_encloses_and_shrinks(seed):
    net = random_network(7, "multi", seed=seed)
    q = Query((net.variables[-1].name, 1), ((net.variables[1].name, 1),))
    one, ten = ipe(net, q, iterations=1, seed=seed), ipe(net, q, iterations=10, seed=seed)
    assert one.contains(ten, slack=0.0)
    assert ten.contains(exact_bounds_enumeration(net, q))


def test_ipe_observed_deterministic_link():
    # evidence on a deterministic child pins its parent completely
    vs = [Variable.boolean(n) for n in "CY"]
    net = CredalNetwork(vs, [(), (0,)],
                        [ConstraintForm.boolean_intervals([(0.3, 0.6)]),
                         SeparateVertexForm((boolean_column(0.0), boolean_column(1.0)))])
    q = Query(("C", 1), (("Y", 1),))
    assert ipe(net, q).lower == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(4))
def test_l2u_on_polytree_equals_two_u(seed):
    net = random_network(7, "polytree", seed=seed)
    q = Query((net.variables[-1].name, 1), ((net.variables[0].name, 1),))
    got = l2u(net, q, PropagationSchedule.random(net, seed))
    assert got.extras["converged"]
    assert got.lower == pytest.approx(two_u(net, q).lower, abs=1e-6)
    assert got.upper == pytest.approx(two_u(net, q).upper, abs=1e-6)


def test_l2u_zero_iterations_returns_initial_beliefs():
    net = interval_root(0.2, 0.7)
    res = l2u(net, Query(("X", 1)), PropagationSchedule((0,), max_iterations=0))
    assert res.iterations == 0
    assert not res.extras["converged"]
    assert (res.lower, res.upper) == pytest.approx((0.2, 0.7))


def test_l2u_schedule_must_cover_query():
    net = chain_net()
    with pytest.raises(PreconditionError):
        l2u(net, Query(("Y", 1)), PropagationSchedule((1,)))
