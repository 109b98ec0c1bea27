"""Holmes alarm model end to end.

Grounds the relational model for two people, G (who lives in LA) and H
(whose residence is uncertain), then bounds the alarm probabilities with the
exact enumeration oracle and with the branch-and-bound solver.

    python demos/holmes_walkthrough.py
"""

from credalnet import Query, exact_bounds_enumeration, ground, holmes, rl_interval
from credalnet.mlp import build_multilinear_program

rnet, domain = holmes()
net = ground(rnet, domain, [("alarm", ("G",)), ("alarm", ("H",))])

print("Grounded network:")
for i, var in enumerate(net.variables):
    parents = ", ".join(net.variables[p].name for p in net.parents[i]) or "-"
    print(f"  {var.name:16s} <- {parents}")

queries = [
    Query(("alarm(G)", 1)),
    Query(("alarm(G)", 1), (("earthquake(LA)", 1),)),
    Query(("alarm(H)", 1)),
    Query(("alarm(H)", 1), (("earthquake(LA)", 1),)),
]

print(f"\n{'query':38s} {'oracle':^16s}   {'rl':^16s} {'branches':>9s}")
for q in queries:
    given = " | " + ",".join(name for name, _ in q.evidence) if q.evidence else ""
    label = f"P({q.target[0]}{given})"
    exact = exact_bounds_enumeration(net, q)
    rl = rl_interval(net, q)
    print(f"{label:38s} [{exact.lower:.4f}, {exact.upper:.4f}]   "
          f"[{rl.lower:.4f}, {rl.upper:.4f}] {rl.branches:9d}")

mp = build_multilinear_program(net, queries[0])
print(f"\nProgram for {queries[0].target[0]}: {mp.n} variables, "
      f"{mp.nonlinear_terms()} bilinear terms, degree {mp.maxdegree}")
