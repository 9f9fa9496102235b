import json

from skewprod import cli, fixture_path


def fx(name: str) -> str:
    return str(fixture_path(name))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_verify_direct_iso_fixture(capsys):
    code, out = run(
        capsys, "verify", "direct-iso", "-g", fx("e1"), "-G", fx("z2"), "--json"
    )
    assert code == 0
    body = json.loads(out)
    assert body["passed"]
    cert = body["certificate"]
    assert cert["lhs"]["dim"] == cert["rhs"]["dim"] == 16
    assert cert["signatures"] == {"lhs": [4], "rhs": [4]}


def test_verify_eqvt_iso_fixture(capsys):
    code, out = run(capsys, "verify", "eqvt-iso", "-g", fx("e1"), "-G", fx("z2"))
    assert code == 0
    assert "passed: True" in out


def test_graph_skew_trivial_group_isomorphic(capsys, tmp_path, e1):
    # With the trivial group every labeling is constant; drop the labels.
    plain = tmp_path / "plain.json"
    plain.write_text(e1.to_json())
    code, out = run(
        capsys, "graph", "skew", "-g", str(plain), "-G", fx("trivial"), "--json"
    )
    assert code == 0
    body = json.loads(out)
    from skewprod.graphs import DirectedGraph, find_graph_isomorphism

    skew = DirectedGraph.from_json(json.dumps(body["skew_product"]))
    assert find_graph_isomorphism(skew, e1) is not None


def test_graph_quotient_round_trip(capsys, tmp_path):
    code, out = run(
        capsys, "graph", "skew", "-g", fx("e1"), "-G", fx("z2"), "--json"
    )
    skew_file = tmp_path / "skew.json"
    skew_file.write_text(json.dumps(json.loads(out)["skew_product"]))
    code, out = run(
        capsys, "graph", "gross-tucker", "-g", str(skew_file), "-G", fx("z2"), "--json"
    )
    assert code == 0
    body = json.loads(out)
    assert len(body["quotient"]["vertices"]) == 2
    assert body["vertex_map"]


def test_algebra_ck(capsys):
    code, out = run(capsys, "algebra", "ck", "-g", fx("chain2"), "--json")
    assert code == 0
    body = json.loads(out)
    assert body["ambient_dim"] == 3
    assert body["dim"] == body["generated_dim"] == 9
    assert body["signature"] == [3]


def test_gpd_skew_and_semidirect(capsys):
    code, out = run(
        capsys, "gpd", "skew", "-q", fx("pair-groupoid"), "-G", fx("z2"), "--json"
    )
    assert code == 0
    assert len(json.loads(out)["skew_product"]["arrows"]) == 8
    code, out = run(
        capsys, "gpd", "semidirect", "-q", fx("pair-groupoid"), "-G", fx("z2"), "--json"
    )
    assert code == 0
    assert len(json.loads(out)["semidirect"]["arrows"]) == 16


def test_verify_groupoid_family(capsys):
    for sub in ("gpd-iso", "semi-cross", "equivalence"):
        code, out = run(
            capsys, "verify", sub, "-q", fx("pair-groupoid"), "-G", fx("z2")
        )
        assert code == 0, sub


def test_verify_bimodule(capsys):
    code, out = run(
        capsys,
        "verify", "bimodule", "-q", fx("pair-groupoid"), "-G", fx("z2"),
        "--cases", "25", "--json",
    )
    assert code == 0
    body = json.loads(out)
    assert body["inner_product_max_error"] <= 1e-9


def test_convert_round_trip_identity(capsys):
    code, out = run(
        capsys, "convert", "-g", fx("e1"), "-G", fx("z2"), "--to", "group-first",
        "--json",
    )
    assert code == 0
    body = json.loads(out)
    vmap = body["vertex_map"]
    # The isomorphism is a bijection on cells; inverting it is the identity.
    assert len(set(map(tuple, (tuple(v) for v in vmap.values())))) == len(vmap)


def test_suite_run_exit_zero(capsys):
    code, out = run(
        capsys, "suite", "run", "--seed", "42", "--cases", "3", "--json"
    )
    assert code == 0
    body = json.loads(out)
    assert body["passed"] and body["n_cases"] == 3


def test_json_reports_are_deterministic(capsys):
    argv = ["verify", "gpd-iso", "-q", fx("pair-groupoid"), "-G", fx("z2"),
            "--seed", "7", "--json"]
    _, out1 = run(capsys, *argv)
    _, out2 = run(capsys, *argv)
    b1, b2 = json.loads(out1), json.loads(out2)
    b1.pop("wall_time_s"), b2.pop("wall_time_s")
    assert json.dumps(b1, sort_keys=True) == json.dumps(b2, sort_keys=True)


def test_exit_code_2_on_missing_file(capsys):
    code = cli.main(["verify", "eqvt-iso", "-g", "missing.json", "-G", fx("z2")])
    assert code == 2


def test_exit_code_2_on_bad_input(capsys, tmp_path):
    bad = tmp_path / "cyclic.json"
    bad.write_text(json.dumps({
        "vertices": ["v"], "edges": [{"id": "f", "src": "v", "rng": "v"}]
    }))
    code = cli.main(["algebra", "ck", "-g", str(bad)])
    assert code == 2


def test_exit_code_2_on_unknown_label(capsys):
    # e1.json labels an edge by 'g', which the trivial group lacks.
    code = cli.main(["graph", "skew", "-g", fx("e1"), "-G", fx("trivial")])
    assert code == 2


def test_exit_code_1_on_failed_report(capsys):
    # _emit maps a failed report to exit status 1.
    import argparse, time

    args = argparse.Namespace(json=True)
    assert cli._emit(args, {"theorem": "x"}, False, time.perf_counter()) == 1
    capsys.readouterr()
