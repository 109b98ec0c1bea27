import numpy as np
import pytest

from credalnet import (ConstraintForm, CredalNetwork, IntervalResult, ModelError,
                       MultilinearConstraint, ParamId, Query, SeparateVertexForm, Variable,
                       hrep_to_vrep, qualitative_influence_constraints, validate_network)
from credalnet.errors import UnsupportedConversionError

from conftest import boolean_column, two_node_net


def _vertex_set(verts):
    return sorted(tuple(np.round(v, 9)) for v in verts)


def test_holmes_network_is_valid(holmes_net):
    assert validate_network(holmes_net).valid


def test_column_sum_violation():
    net = CredalNetwork([Variable.boolean("X")], [()],
                        [SeparateVertexForm((np.array([[0.6, 0.5]]),))])
    report = validate_network(net)
    assert not report.valid
    assert "column-sum" in report.kinds()


def test_cycle_violation():
    a, b = Variable.boolean("A"), Variable.boolean("B")
    col = boolean_column(0.5)
    net = CredalNetwork([a, b], [(1,), (0,)],
                        [SeparateVertexForm((col, col)), SeparateVertexForm((col, col))])
    assert "cycle" in validate_network(net).kinds()


def test_qualitative_single_parent():
    cons = qualitative_influence_constraints(two_node_net(), ("X", "Y"))
    assert len(cons) == 1
    assert cons[0].relation == ">="


def test_qualitative_two_parents_is_feasible():
    vs = [Variable.boolean(n) for n in "YZX"]
    base = ConstraintForm.boolean_intervals([(0.1, 0.9)] * 4, owner="X")
    root = ConstraintForm.boolean_intervals([(0.5, 0.5)])
    net = CredalNetwork(vs, [(), (), (0, 1)], [root, root, base])
    cons = qualitative_influence_constraints(net, ("Y", "X"))
    assert len(cons) == 2
    spec = base.with_constraints(cons)
    net = net.with_local(2, spec)
    assert validate_network(net).valid


def test_hrep_interval_endpoints():
    spec = ConstraintForm.boolean_intervals([(0.2, 0.7)])
    # columns are stored as (P(false), P(true))
    assert _vertex_set(hrep_to_vrep(spec, 0)) == sorted([(0.8, 0.2), (0.3, 0.7)])


def test_hrep_ternary_simplex():
    spec = ConstraintForm(np.zeros((3, 1)), np.ones((3, 1)))
    assert _vertex_set(hrep_to_vrep(spec, 0)) == sorted(map(tuple, np.eye(3)))


def test_hrep_with_extra_constraint():
    spec = ConstraintForm.boolean_intervals([(0.1, 0.9)], owner="X").with_constraints(
        [MultilinearConstraint(((1.0, (ParamId("X", 1, 0),)),), ">=", 0.5)])
    assert _vertex_set(hrep_to_vrep(spec, 0)) == sorted([(0.5, 0.5), (0.1, 0.9)])


def test_hrep_refuses_coupled_columns():
    spec = ConstraintForm.boolean_intervals([(0.1, 0.9)] * 2, owner="X").with_constraints(
        [MultilinearConstraint(((1.0, (ParamId("X", 1, 0),)), (-1.0, (ParamId("X", 1, 1),))),
                               ">=", 0.0)])
    with pytest.raises(UnsupportedConversionError):
        hrep_to_vrep(spec, 0)


def test_query_parse_and_check():
    net = two_node_net()
    q = Query.parse(net, "Y=true", ["X=false"])
    assert q.target == ("Y", 1)
    assert q.evidence_dict() == {"X": 0}
    with pytest.raises(ModelError):
        Query.parse(net, "Y=maybe")


def test_interval_result_contains():
    outer = IntervalResult(0.1, 0.9, "outer")
    inner = IntervalResult(0.2, 0.8, "exact")
    assert outer.contains(inner)
    assert not inner.contains(outer)
