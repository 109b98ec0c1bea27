"""Command-line interface.

Exit codes: 0 ok, 1 unreadable input, 2 semantic error, 3 a method's
precondition does not hold, 4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from . import io
from .errors import CredalError, FormatError, PreconditionError, TooLargeError
from .generate import random_network
from .methods import METHODS, run_method
from .model import Query, validate_network
from .relational import ground

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_PRECONDITION, EXIT_RESOURCE = 0, 1, 2, 3, 4

_ATOM = re.compile(r"^\s*([^()\s]+)\s*(?:\(([^()]*)\))?\s*$")


def parse_atom(text: str) -> tuple[str, tuple[str, ...]]:
    m = _ATOM.match(text)
    if not m:
        raise FormatError(f"cannot parse atom {text!r}")
    args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2) else ()
    return m.group(1), args


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    with open(args.path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"{args.path}: {e}") from None
    if isinstance(doc, dict) and "relations" in doc:
        io.relational_from_json(doc)
        print("valid")
        return EXIT_OK
    report = validate_network(io.network_from_json(doc))
    if report.valid:
        print("valid")
        return EXIT_OK
    for v in report.violations:
        print(f"{v.kind}: {v.detail}")
    return EXIT_SEMANTIC


def cmd_ground(args) -> int:
    rnet, domain, targets = io.read_relational(args.path)
    if args.target:
        targets = [parse_atom(t) for t in args.target]
    net = ground(rnet, domain, targets)
    _emit(json.dumps(io.network_to_json(net), indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_infer(args) -> int:
    net, _ = io.read_network(args.path)
    query = Query.parse(net, args.target, args.evidence or ())
    if args.dump_mp:
        from .mlp import build_multilinear_program
        with open(args.dump_mp, "w") as fh:
            fh.write(build_multilinear_program(net, query).dump() + "\n")
    res = run_method(net, query, args.method, epsilon=args.epsilon, max_iterations=args.max_iters,
                     seed=args.seed, time_limit_ms=args.time_limit_ms)
    print(json.dumps(io.result_record(res)))
    return EXIT_OK


def cmd_generate(args) -> int:
    net = random_network(args.nodes, args.topology, args.cardinality, args.vertices,
                         args.max_parents, args.seed)
    rng = np.random.default_rng(args.seed)
    queries = []
    for _ in range(args.queries):
        t = int(rng.integers(len(net)))
        queries.append(Query((net.variables[t].name, int(rng.integers(net.card(t))))))
    _emit(json.dumps(io.network_to_json(net, queries), indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import bench

    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods + [args.reference] if m not in METHODS]
    if unknown:
        print(f"unknown method(s): {', '.join(unknown)}", file=sys.stderr)
        return EXIT_SEMANTIC
    report = bench(args.dir, methods, args.reference, args.epsilon, args.seed, args.time_limit_ms)
    if args.out:
        report.write_csv(args.out)
    else:
        import csv
        from .bench import COLUMNS, _fmt
        w = csv.DictWriter(sys.stdout, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in report.rows:
            w.writerow({k: _fmt(r.get(k, "")) for k in COLUMNS})
    text = report.text()
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="credalnet", description="Inference in credal networks.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a network or relational file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("ground", help="ground a relational model into a network file")
    g.add_argument("path")
    g.add_argument("--target", action="append", help="ground atom such as alarm(G); repeatable")
    g.add_argument("--out")
    g.set_defaults(func=cmd_ground)

    i = sub.add_parser("infer", help="bound a posterior probability")
    i.add_argument("path")
    i.add_argument("--target", required=True, help="X=value")
    i.add_argument("--evidence", action="append", help="Y=value; repeatable")
    i.add_argument("--method", choices=METHODS, default="rl")
    i.add_argument("--epsilon", type=float, default=1e-6)
    i.add_argument("--max-iters", type=int)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--time-limit-ms", type=float)
    i.add_argument("--dump-mp", help="write the multilinear program as text")
    i.set_defaults(func=cmd_infer)

    n = sub.add_parser("generate", help="write a random network file")
    n.add_argument("--nodes", type=int, required=True)
    n.add_argument("--topology", choices=("polytree", "multi"), default="multi")
    n.add_argument("--cardinality", type=int, default=2)
    n.add_argument("--vertices", type=int, default=2)
    n.add_argument("--max-parents", type=int)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--queries", type=int, default=1, help="random marginal queries to embed")
    n.add_argument("--out")
    n.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="compare methods over a directory of network files")
    b.add_argument("--dir", required=True)
    b.add_argument("--methods", default="ar+,ar++,rl")
    b.add_argument("--reference", default="oracle")
    b.add_argument("--epsilon", type=float, default=1e-6)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--time-limit-ms", type=float)
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--report", help="discrepancy report path (default stderr)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TooLargeError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except CredalError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
