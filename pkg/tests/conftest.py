from pathlib import Path

import numpy as np
import pytest

from credalnet import (ConstraintForm, CredalNetwork, SeparateVertexForm, Variable, ground,
                       holmes)

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

HOLMES_TARGETS = [("alarm", ("G",)), ("alarm", ("H",))]


def boolean_column(*p_true):
    """Vertex column from values of P(true)."""
    return np.array([[1.0 - p, p] for p in p_true])


def two_node_net() -> CredalNetwork:
    """X -> Y with P(x) in {0.2, 0.7}, p(y|x) = 0.8, p(y|~x) in {0.1, 0.3}."""
    x, y = Variable.boolean("X"), Variable.boolean("Y")
    return CredalNetwork(
        [x, y], [(), (0,)],
        [SeparateVertexForm((boolean_column(0.2, 0.7),)),
         SeparateVertexForm((boolean_column(0.1, 0.3), boolean_column(0.8)))])


def chain_net() -> CredalNetwork:
    """X -> Y with p(x) = 0.3, p(y|x) = 0.8, p(y|~x) = 0.1."""
    x, y = Variable.boolean("X"), Variable.boolean("Y")
    return CredalNetwork(
        [x, y], [(), (0,)],
        [SeparateVertexForm((boolean_column(0.3),)),
         SeparateVertexForm((boolean_column(0.1), boolean_column(0.8)))])


def ternary_chain(seed: int = 0, vertices: int = 2) -> CredalNetwork:
    rng = np.random.default_rng(seed)
    variables = [Variable(n, ("e0", "e1", "e2")) for n in "ABCDE"]
    parents = [()] + [(k,) for k in range(4)]
    local = [SeparateVertexForm(tuple(rng.dirichlet(np.ones(3), size=vertices)
                                      for _ in range(3 ** len(p)))) for p in parents]
    return CredalNetwork(variables, parents, local)


def interval_root(lo: float, hi: float, name: str = "X") -> CredalNetwork:
    return CredalNetwork([Variable.boolean(name)], [()], [ConstraintForm.boolean_intervals([(lo, hi)])])


@pytest.fixture(scope="session")
def holmes_net() -> CredalNetwork:
    rnet, domain = holmes()
    return ground(rnet, domain, HOLMES_TARGETS)


# criterion -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
