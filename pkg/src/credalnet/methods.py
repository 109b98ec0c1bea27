"""One entry point for every inference method."""

from __future__ import annotations

from .errors import ModelError
from .mlp import rl_interval
from .model import CredalNetwork, IntervalResult, Query
from .oracle import exact_bounds_enumeration
from .propagation import PropagationSchedule, ar_plus, ar_plus_plus, ipe, l2u, two_u

METHODS = ("oracle", "rl", "2u", "ar+", "ar++", "ipe", "l2u")


def run_method(net: CredalNetwork, query: Query, method: str, epsilon: float = 1e-6,
               max_iterations: int | None = None, seed: int = 0,
               time_limit_ms: float | None = None) -> IntervalResult:
    """Run ``method`` on ``query``.

    ``max_iterations`` caps branch-and-bound branches for ``rl``, cutset
    draws for ``ipe`` and sweeps for ``l2u``.
    """
    if method == "oracle":
        return exact_bounds_enumeration(net, query)
    if method == "rl":
        return rl_interval(net, query, epsilon=epsilon, max_branches=max_iterations,
                           max_ms=time_limit_ms, seed=seed)
    if method == "2u":
        return two_u(net, query)
    if method == "ar+":
        return ar_plus(net, query)
    if method == "ar++":
        return ar_plus_plus(net, query)[0]
    if method == "ipe":
        return ipe(net, query, iterations=10 if max_iterations is None else max_iterations, seed=seed)
    if method == "l2u":
        schedule = PropagationSchedule.random(
            net, seed, max_iterations=100 if max_iterations is None else max_iterations)
        return l2u(net, query, schedule)
    raise ModelError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
