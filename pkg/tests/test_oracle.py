import pytest

from credalnet import (CredalNetwork, Query, SeparateVertexForm, TooLargeError, Variable,
                       ZeroProbabilityEvidenceError, exact_bounds_enumeration, ground, holmes,
                       local_search_bound, random_network, ve_marginal)

from conftest import boolean_column, chain_net, two_node_net


def test_chain_marginal():
    assert ve_marginal(chain_net(), Query(("Y", 1))) == pytest.approx(0.3 * 0.8 + 0.7 * 0.1)


def test_identity_cpt():
    x, y = Variable.boolean("X"), Variable.boolean("Y")
    net = CredalNetwork([x, y], [(), (0,)],
                        [SeparateVertexForm((boolean_column(0.37),)),
                         SeparateVertexForm((boolean_column(0.0), boolean_column(1.0)))])
    assert ve_marginal(net, Query(("Y", 1))) == pytest.approx(0.37)


def test_pair_and_conditional():
    net = chain_net()
    joint, ev = ve_marginal(net, Query(("X", 1), (("Y", 1),)), pair=True)
    assert joint == pytest.approx(0.24)
    assert ev == pytest.approx(0.31)
    assert ve_marginal(net, Query(("X", 1), (("Y", 1),))) == pytest.approx(0.24 / 0.31)


def test_zero_probability_evidence():
    x, y = Variable.boolean("X"), Variable.boolean("Y")
    net = CredalNetwork([x, y], [(), (0,)],
                        [SeparateVertexForm((boolean_column(0.0),)),
                         SeparateVertexForm((boolean_column(0.0), boolean_column(1.0)))])
    with pytest.raises(ZeroProbabilityEvidenceError):
        ve_marginal(net, Query(("X", 1), (("Y", 1),)))


def test_two_node_enumeration():
    res = exact_bounds_enumeration(two_node_net(), Query(("Y", 1)))
    # brute force over the four vertex combinations
    vals = [px * 0.8 + (1 - px) * py for px in (0.2, 0.7) for py in (0.1, 0.3)]
    assert res.status == "exact"
    assert res.lower == pytest.approx(min(vals)) == pytest.approx(0.24)
    assert res.upper == pytest.approx(max(vals)) == pytest.approx(0.65)


def test_singleton_enumeration_is_point():
    net = chain_net()
    res = exact_bounds_enumeration(net, Query(("Y", 1)))
    assert res.lower == pytest.approx(res.upper) == pytest.approx(ve_marginal(net, Query(("Y", 1))))


def test_holmes_extreme_vertex():
    rnet, domain = holmes(burglary=(0.001, 0.001), earthquake=(0.01, 0.01),
                          lives_in=(0.05, 0.05), leak=(0.0, 0.0))
    net = ground(rnet, domain, [("alarm", ("G",))])
    q = Query(("alarm(G)", 1))
    value, selection = local_search_bound(net, q, "lower", restarts=3)
    hand = 0.001 * 0.01 * 0.9 + 0.001 * 0.99 * 0.9 + 0.999 * 0.01 * 0.2
    assert round(hand, 4) == 0.0029
    assert value == pytest.approx(hand, abs=1e-9)
    assert ve_marginal(net, q, selection=selection) == pytest.approx(value)


def test_holmes_enumeration(holmes_net):
    res = exact_bounds_enumeration(holmes_net, Query(("alarm(G)", 1)))
    assert res.lower == pytest.approx(0.0029, abs=5e-4)
    assert res.upper == pytest.approx(0.1179, abs=5e-4)


def test_holmes_local_search_upper(holmes_net):
    value, _ = local_search_bound(holmes_net, Query(("alarm(G)", 1)), "upper", restarts=5)
    assert value == pytest.approx(exact_bounds_enumeration(holmes_net, Query(("alarm(G)", 1))).upper)


@pytest.mark.parametrize("seed", range(6))
def test_local_search_never_exceeds_enumeration(seed):
    net = random_network(6, "multi", seed=seed)
    q = Query((net.variables[-1].name, 1))
    exact = exact_bounds_enumeration(net, q)
    hi, _ = local_search_bound(net, q, "upper", restarts=2, seed=seed)
    lo, _ = local_search_bound(net, q, "lower", restarts=2, seed=seed)
    assert exact.lower - 1e-12 <= lo and hi <= exact.upper + 1e-12


def test_enumeration_cap():
    net = random_network(8, "multi", vertices=3, max_parents=3, seed=1)
    evidence = tuple((v.name, 1) for v in net.variables[1:])
    with pytest.raises(TooLargeError):
        exact_bounds_enumeration(net, Query((net.variables[0].name, 1), evidence), cap=10)


def test_singleton_local_search_one_evaluation():
    net = chain_net()
    value, sel = local_search_bound(net, Query(("Y", 1)), "upper", restarts=1)
    assert value == pytest.approx(0.31)
    assert ve_marginal(net, Query(("Y", 1)), selection=sel) == pytest.approx(0.31)
