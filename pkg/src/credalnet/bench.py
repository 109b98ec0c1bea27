"""Benchmark harness: methods against a reference over a directory of networks.

Each ``*.json`` network file carries its queries.  A query may also hold
``"published": [lower, upper]`` and a free-text ``"note"``; whenever the
reference departs from a published figure by more than 5e-4 the report
lists it together with the note.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CredalError
from .io import read_network
from .methods import run_method
from .mlp import LinearRelaxation, build_multilinear_program

COLUMNS = ["network", "method", "queries", "mp_vars", "linear_funcs", "mean_lower",
           "mean_upper", "mean_width", "mse", "max_error", "branches", "elapsed_ms", "status"]


@dataclass
class BenchReport:
    rows: list[dict] = field(default_factory=list)
    discrepancies: list[str] = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _fmt(r.get(k, "")) for k in COLUMNS})

    def text(self) -> str:
        lines = ["Discrepancies against published figures:"]
        lines += [f"- {d}" for d in self.discrepancies] or ["- none"]
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.6g}"
    return v


def _program_size(net, query) -> tuple[int, int]:
    """Variables of the decomposed program and its linearized products plus rows."""
    mp = build_multilinear_program(net, query)
    rel = LinearRelaxation(mp)
    return mp.n, len(rel.products) + rel.a_eq.shape[0] + rel.a_ub.shape[0]


def bench(directory, methods, reference: str = "oracle", epsilon: float = 1e-6,
          seed: int = 0, time_limit_ms: float | None = None) -> BenchReport:
    report = BenchReport()
    per_method: dict[str, list[dict]] = {m: [] for m in methods}
    for path in sorted(Path(directory).glob("*.json")):
        net, queries = read_network(path)
        raw = json.loads(path.read_text()).get("queries", [])
        if not queries:
            continue
        try:
            refs = [run_method(net, q, reference, epsilon, seed=seed) for q in queries]
        except CredalError as e:
            for m in methods:
                report.rows.append({"network": path.stem, "method": m, "status": f"reference failed: {e}"})
            continue
        for q, ref, meta in zip(queries, refs, raw):
            pub = meta.get("published")
            if pub is None:
                continue
            for side, got, want in (("lower", ref.lower, pub[0]), ("upper", ref.upper, pub[1])):
                if abs(got - want) > 5e-4:
                    msg = (f"{path.stem}: {meta['target']} given {meta.get('evidence', [])} "
                           f"{side} bound {got:.4f} (reference) vs {want:.4f} (published)")
                    if meta.get("note"):
                        msg += f"; {meta['note']}"
                    report.discrepancies.append(msg)
        try:
            mp_vars, lin = _program_size(net, queries[0])
        except CredalError:
            mp_vars, lin = "", ""
        for m in methods:
            row = {"network": path.stem, "method": m, "queries": len(queries),
                   "mp_vars": mp_vars, "linear_funcs": lin}
            try:
                res = [run_method(net, q, m, epsilon, seed=seed, time_limit_ms=time_limit_ms)
                       for q in queries]
            except CredalError as e:
                row["status"] = f"failed: {type(e).__name__}"
                report.rows.append(row)
                continue
            lo = np.array([r.lower for r in res])
            hi = np.array([r.upper for r in res])
            rlo = np.array([r.lower for r in refs])
            rhi = np.array([r.upper for r in refs])
            err = np.concatenate([lo - rlo, hi - rhi])
            row.update(mean_lower=float(lo.mean()), mean_upper=float(hi.mean()),
                       mean_width=float((hi - lo).mean()), mse=float(np.mean(err ** 2)),
                       max_error=float(np.abs(err).max()),
                       branches=int(sum(r.branches for r in res)),
                       elapsed_ms=int(sum(r.elapsed_ms for r in res)),
                       status=",".join(sorted({r.status for r in res})))
            report.rows.append(row)
            per_method[m].append(row)
    for m in methods:
        done = per_method[m]
        if not done:
            continue
        report.rows.append({
            "network": "MEAN", "method": m, "queries": sum(r["queries"] for r in done),
            **{k: float(np.mean([r[k] for r in done]))
               for k in ("mean_width", "mse", "max_error", "branches", "elapsed_ms")},
        })
    return report
