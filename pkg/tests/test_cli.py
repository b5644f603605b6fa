import json

import pytest

from qho.cli import main
from qho.core import core_formula


def run(argv, capsys):
    code = main([str(x) for x in argv])
    return code, capsys.readouterr().out.strip()


@pytest.fixture
def frag(tmp_path, capsys):
    path = tmp_path / "frag.json"
    assert run(["build", "--N", 2, "--seeds", "0", "--depth", 3, "-o", path], capsys)[0] == 0
    return path


def test_build_check_spectrum(frag, capsys):
    code, out = run(["check-axioms", frag], capsys)
    assert code == 0 and out
    assert run(["spectrum", frag], capsys) == (0, "1/2, 3/2, 5/2, 7/2")


def test_check_axioms_fails_on_perturbed_witness(frag, tmp_path, capsys):
    data = json.loads(frag.read_text())
    data["witnesses"][1]["b"] = "3"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out = run(["check-axioms", bad], capsys)
    assert code == 1 and out


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["build", "--N", "2"]) == 2
    assert main(["spectrum", str(tmp_path / "missing.json")]) == 2
    assert main(["parse", "--formula", "x = = 1"]) == 2


def test_build_is_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        p = tmp_path / f"f{k}.json"
        run(["build", "--N", 4, "--seeds", "0,t", "--depth", 2, "--sqrt-policy", "random:7", "-o", p], capsys)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_sqrt_policy_file(tmp_path, capsys):
    pol = tmp_path / "pol.json"
    pol.write_text("[1, -1]")
    p = tmp_path / "f.json"
    assert run(["build", "--N", 1, "--seeds", "1/2", "--depth", 2, "--sqrt-policy", f"file:{pol}", "-o", p], capsys)[0] == 0
    assert run(["check-axioms", p], capsys)[0] == 0


def test_isomorphism_verb(tmp_path, capsys):
    paths = []
    for k in range(2):
        p = tmp_path / f"f{k}.json"
        run(["build", "--N", 2, "--seeds", "0", "--depth", 3, "--sqrt-policy", f"random:{k}", "-o", p], capsys)
        paths.append(p)
    code, out = run(["isomorphism", *paths], capsys)
    assert code == 0 and "offsets" in json.loads(out)
    odd = []
    for k, pol in enumerate(("[1, 1]", "[1, -1]")):
        (tmp_path / f"p{k}.json").write_text(pol)
        p = tmp_path / f"o{k}.json"
        run(["build", "--N", 1, "--seeds", "1/2", "--depth", 2, "--sqrt-policy", f"file:{tmp_path / f'p{k}.json'}", "-o", p], capsys)
        odd.append(p)
    code, out = run(["isomorphism", *odd], capsys)
    assert code == 1 and "obstruction" in json.loads(out)


def test_ladder_verb(frag, capsys):
    # a raises the base, a-dagger lowers it
    code, out = run(["ladder", frag, "--vector", "1:1"], capsys)
    assert code == 0 and json.loads(out)["base"] == "2"
    code, out = run(["ladder", frag, "--vector", "1:1", "--down"], capsys)
    assert code == 0 and json.loads(out)["base"] == "0"


def test_formula_verbs(capsys):
    code, out = run(["parse", "--formula", "exists f_1 (e_1 = lambda*f_1)"], capsys)
    assert code == 0 and json.loads(out)["free"] == ["e_1", "lambda"]
    code, out = run(["normalize", "--formula", "~~(x=1)"], capsys)
    assert code == 0 and run(["normalize", "--formula", out], capsys)[1] == out


def test_core_verbs(frag, tmp_path, capsys):
    g = core_formula(2, [(0,)], "lambda_1_1 = 2")
    gp = tmp_path / "g.json"
    gp.write_text(g.dumps())
    code, out = run(["invariant-closure", "--formula", gp], capsys)
    assert code == 0
    cp = tmp_path / "c.json"
    cp.write_text(out)
    assert run(["delta-action", "--formula", cp, "--delta", "-1"], capsys)[0] == 0
    assert run(["merge", cp, cp], capsys)[0] == 0
    code, out = run(["project", "--formula", gp, "--k", 1, "--members", "1"], capsys)
    assert code == 0 and json.loads(out)["case"] in (3, 4)
    assert run(["dim", "--formula", cp], capsys) == (0, "1")
    assert run(["oracle-eval", "--formula", gp, frag, "--vectors", "0:2"], capsys) == (0, "true")
    assert run(["oracle-eval", "--formula", gp, frag, "--vectors", "0:1"], capsys) == (0, "false")
    code, out = run(["substitute-params", "--formula", gp, frag, "--positions", "0", "--values", "1:1"], capsys)
    assert code == 0 and isinstance(json.loads(out), list)
    hp = tmp_path / "h.json"
    hp.write_text(core_formula(4, [(0,)], "true").dumps())
    assert run(["merge", cp, hp], capsys)[0] == 2


def test_chain_check_verb(tmp_path, capsys):
    paths = []
    for k, text in enumerate(["true", "alpha_1 = 0", "alpha_1^2 = 0"]):
        p = tmp_path / f"c{k}.json"
        p.write_text(core_formula(2, [(0,)], text).dumps())
        paths.append(p)
    assert run(["chain-check", *paths], capsys) == (0, "1")
    code, out = run(["chain-check", paths[1], paths[0]], capsys)
    assert code == 1 and out.startswith("not descending")
