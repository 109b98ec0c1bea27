import csv
import json

import numpy as np
import pytest

from credalnet import Query, exact_bounds_enumeration, holmes, random_network
from credalnet.cli import main, parse_atom
from credalnet.io import (network_from_json, network_to_json, read_network, read_relational,
                          relational_from_json, relational_to_json, write_network)

from conftest import FIXTURES, two_node_net

HOLMES_NET = FIXTURES / "holmes" / "holmes.json"
HOLMES_REL = FIXTURES / "holmes-relational.json"


def _same_network(a, b):
    assert [v.name for v in a.variables] == [v.name for v in b.variables]
    assert [v.labels for v in a.variables] == [v.labels for v in b.variables]
    assert a.parents == b.parents


def test_network_round_trip(tmp_path, holmes_net):
    q = Query(("alarm(G)", 1), (("earthquake(LA)", 1),))
    path = tmp_path / "net.json"
    write_network(holmes_net, path, [q])
    net, queries = read_network(path)
    _same_network(net, holmes_net)
    assert queries == [q]
    a = exact_bounds_enumeration(net, q)
    b = exact_bounds_enumeration(holmes_net, q)
    assert (a.lower, a.upper) == pytest.approx((b.lower, b.upper))


def test_vertex_form_round_trip():
    net = two_node_net()
    back = network_from_json(json.loads(json.dumps(network_to_json(net))))
    _same_network(back, net)
    for sa, sb in zip(back.local, net.local):
        for ca, cb in zip(sa.columns, sb.columns):
            assert np.allclose(ca, cb)


def test_relational_round_trip():
    rnet, domain = holmes()
    doc = relational_to_json(rnet, domain, [("alarm", ("G",))])
    rnet2, domain2, targets = relational_from_json(json.loads(json.dumps(doc)))
    assert relational_to_json(rnet2, domain2, targets) == doc


def test_parse_atom():
    assert parse_atom("alarm(G)") == ("alarm", ("G",))
    assert parse_atom("lives-in(H, LA)") == ("lives-in", ("H", "LA"))


def test_validate_ok(capsys):
    assert main(["validate", str(HOLMES_NET)]) == 0
    assert main(["validate", str(HOLMES_REL)]) == 0


def test_validate_truncated(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(HOLMES_NET.read_text()[:200])
    assert main(["validate", str(bad)]) == 1


def test_validate_cycle(tmp_path, capsys):
    doc = json.loads(HOLMES_NET.read_text())
    doc["edges"].append(["alarm(G)", "burglary(G)"])
    doc["local"]["burglary(G)"] = {"form": "constraints",
                                   "lower": [[0.9, 0.0], [0.9, 0.0]],
                                   "upper": [[1.0, 0.1], [1.0, 0.1]]}
    path = tmp_path / "cyc.json"
    path.write_text(json.dumps(doc))
    code = main(["validate", str(path)])
    assert code == 2
    assert "cycle" in capsys.readouterr().out


def test_ground_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["ground", str(HOLMES_REL), "--target", "alarm(G)",
                     "--target", "alarm(H)", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    net, _ = read_network(a)
    assert len(net) == 7


def test_ground_missing_relation():
    assert main(["ground", str(HOLMES_REL), "--target", "theft(G)"]) == 2


def test_infer_holmes_rl(capsys):
    assert main(["infer", str(HOLMES_NET), "--target", "alarm(G)=true", "--method", "rl"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["lower"] == pytest.approx(0.0029, abs=5e-4)
    assert rec["upper"] == pytest.approx(0.1179, abs=5e-4)


def test_infer_dump_mp(tmp_path, capsys):
    dump = tmp_path / "mp.txt"
    assert main(["infer", str(HOLMES_NET), "--target", "alarm(G)=true", "--method", "ar+",
                 "--dump-mp", str(dump)]) == 0
    assert dump.read_text().strip()


def test_infer_2u_matches_oracle(tmp_path, capsys):
    path = tmp_path / "poly.json"
    write_network(random_network(6, "polytree", seed=3), path)
    out = {}
    for method in ("2u", "oracle"):
        assert main(["infer", str(path), "--target", "X5=true", "--evidence", "X0=false",
                     "--method", method]) == 0
        out[method] = json.loads(capsys.readouterr().out)
    assert out["2u"]["lower"] == pytest.approx(out["oracle"]["lower"], abs=1e-6)
    assert out["2u"]["upper"] == pytest.approx(out["oracle"]["upper"], abs=1e-6)


def test_infer_2u_on_loops_exits_3(tmp_path):
    path = tmp_path / "multi.json"
    write_network(random_network(6, "multi", seed=0), path)
    assert main(["infer", str(path), "--target", "X5=true", "--method", "2u"]) == 3


def test_generate_is_deterministic(tmp_path):
    files = [tmp_path / f"g{k}.json" for k in range(2)]
    for f in files:
        assert main(["generate", "--nodes", "10", "--topology", "multi", "--cardinality", "3",
                     "--vertices", "3", "--seed", "7", "--out", str(f)]) == 0
    assert files[0].read_bytes() == files[1].read_bytes()
    net, queries = read_network(files[0])
    assert len(net) == 10 and all(v.cardinality == 3 for v in net.variables)
    assert not net.is_polytree() and len(queries) == 1


def test_generate_single_node(tmp_path):
    out = tmp_path / "one.json"
    assert main(["generate", "--nodes", "1", "--out", str(out)]) == 0
    net, _ = read_network(out)
    assert len(net) == 1


def test_bench_reports_holmes_discrepancy(tmp_path):
    csv_path, report = tmp_path / "bench.csv", tmp_path / "report.txt"
    assert main(["bench", "--dir", str(FIXTURES / "holmes"), "--methods", "rl",
                 "--out", str(csv_path), "--report", str(report)]) == 0
    rows = list(csv.DictReader(csv_path.open()))
    holmes_row = next(r for r in rows if r["network"] == "holmes")
    assert float(holmes_row["max_error"]) <= 1e-4
    text = report.read_text()
    assert "alarm(H)" in text and "0.0010" in text


def test_bench_polytrees_two_u_exact(tmp_path):
    for seed in range(3):
        net = random_network(6, "polytree", seed=seed)
        write_network(net, tmp_path / f"p{seed}.json", [Query(("X5", 1)), Query(("X2", 0))])
    out = tmp_path / "b.csv"
    assert main(["bench", "--dir", str(tmp_path), "--methods", "2u,ar+,ar++",
                 "--out", str(out), "--report", str(tmp_path / "r.txt")]) == 0
    rows = [r for r in csv.DictReader(out.open()) if r["method"] == "2u" and r["network"] != "MEAN"]
    assert len(rows) == 3
    assert all(float(r["max_error"]) <= 1e-6 for r in rows)


def test_bench_unknown_method(tmp_path):
    assert main(["bench", "--dir", str(tmp_path), "--methods", "magic"]) == 2


def test_read_relational_fixture():
    rnet, domain, targets = read_relational(HOLMES_REL)
    assert targets == [("alarm", ("G",)), ("alarm", ("H",))]
    assert domain.facts[("lives-in", ("G", "LA"))] is True
