"""Every inference method on a few random networks.

Outer methods (ar+, ar++, ipe) should enclose the oracle interval; l2u is an
approximation; 2u only runs on polytrees.

    python demos/compare_methods.py [--nodes 7] [--seeds 3]
"""

import argparse

from credalnet import METHODS, CredalError, Query, random_network, run_method

parser = argparse.ArgumentParser()
parser.add_argument("--nodes", type=int, default=7)
parser.add_argument("--seeds", type=int, default=3)
args = parser.parse_args()

for topology in ("polytree", "multi"):
    for seed in range(args.seeds):
        net = random_network(args.nodes, topology, seed=seed)
        target, observed = net.variables[-1].name, net.variables[0].name
        q = Query((target, 1), ((observed, 1),))
        print(f"\n{topology} seed={seed}: P({target} | {observed})")
        for method in METHODS:
            try:
                r = run_method(net, q, method, seed=seed)
            except CredalError as e:
                print(f"  {method:7s} skipped ({type(e).__name__})")
                continue
            print(f"  {method:7s} [{r.lower:.4f}, {r.upper:.4f}]  width {r.width:.4f}  "
                  f"{r.status:8s} {r.elapsed_ms:5d} ms")
