import json

import pytest

from qmiddle.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def params_file(tmp_path, capsys):
    code, out, _ = run(capsys, "params", "--seed", "2")
    assert code == 0
    path = tmp_path / "p.json"
    path.write_text(out)
    return path


def test_params_output(capsys, params_file):
    data = json.loads(params_file.read_text())
    assert data["schemaVersion"] and data["constraintResidual"] < 1e-14
    assert len(data["params"]["q"]) == 2


def test_mc(capsys, params_file):
    code, out, _ = run(capsys, "mc", "-i", str(params_file))
    data = json.loads(out)
    assert code == 0 and "reducedSystem" in data and "newParams" in data
    code, out, _ = run(capsys, "mc", "-i", str(params_file), "--branch", "chi1", "--d-tilde", "1.2-0.3j",
                       "--c-tilde", "[0.5, 0.1]")
    assert code == 0 and json.loads(out)["dTilde"] == [1.2, -0.3]


def test_mc_inline_json(capsys, params_file):
    inline = json.dumps(json.loads(params_file.read_text())["params"])
    code, out, _ = run(capsys, "mc", "-i", inline)
    assert code == 0


def test_chi1_without_d_tilde_is_usage_error(capsys, params_file):
    code, out, err = run(capsys, "mc", "-i", str(params_file), "--branch", "chi1")
    assert code == 64 and out == "" and "--d-tilde" in err


def test_constraint_violation_exit_2(capsys, params_file, tmp_path):
    data = json.loads(params_file.read_text())["params"]
    data["a3"] = [5.0, 0.0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, err = run(capsys, "mc", "-i", str(bad))
    assert code == 2 and "theta1*theta2" in err and out == ""


def test_malformed_input_exit_2(capsys):
    assert run(capsys, "mc", "-i", '{"q": [0.5, 0]}')[0] == 2
    assert run(capsys, "mc", "-i", "/no/such/file.json")[0] == 2


def test_map_singularity_exit_3(capsys, params_file, tmp_path):
    from qmiddle.qpvi import QPVIParams

    p = QPVIParams.from_json(json.loads(params_file.read_text())["params"])
    ta12 = p.t * p.a1 * p.a2
    z = p.theta1 * (p.y - p.t * p.a1) * (p.y - p.t * p.a2) / (p.q * p.chi1 * p.chi2 * ta12 * (p.y - p.a3) * (p.y - p.a4))
    sing = tmp_path / "sing.json"
    sing.write_text(json.dumps(p.replace(z=z).to_json()))
    code, _, err = run(capsys, "mc", "-i", str(sing))
    assert code == 3 and "singular" in err


def test_transform_scalar(capsys):
    code, out, _ = run(capsys, "transform", "--kind", "scalar", "--seed", "1")
    data = json.loads(out)
    assert code == 0 and data["report"]["residual"] < 1e-6 and len(data["values"]) == 5
    code, out2, _ = run(capsys, "transform", "--kind", "scalar", "--seed", "1", "--N", "120")
    assert json.loads(out2)["report"]["tailMass"] < data["report"]["tailMass"]


@pytest.mark.parametrize("kind", ["vector", "rows", "kny", "heun"])
def test_transform_kinds(capsys, kind):
    code, out, _ = run(capsys, "transform", "--kind", kind, "--seed", "3")
    assert code == 0 and json.loads(out)["report"]["residual"] < 1e-6


def test_transform_probe_collision_exit_3(capsys):
    code, _, err = run(capsys, "transform", "--kind", "scalar", "--xi", "1.1", "--probe", "1.1")
    assert code == 3 and "lattice index n=0" in err


def test_transform_dump_lattice(capsys):
    code, out, _ = run(capsys, "transform", "--kind", "scalar", "--N", "20", "--dump-lattice")
    assert code == 0 and len(json.loads(out)["lattice"]["values"]) == 41


def test_weyl_and_heun(capsys):
    code, out, _ = run(capsys, "weyl", "--word", "s1s1")
    data = json.loads(out)
    assert code == 0 and data["image"] == data["input"]
    code, out, _ = run(capsys, "heun", "--seed", "4")
    data = json.loads(out)
    assert code == 0 and data["roundtripDeviation"] < 1e-12


def test_campaign_out_and_exit(capsys, tmp_path):
    path = tmp_path / "w.json"
    code, out, _ = run(capsys, "campaign", "--which", "weyl", "--trials", "3", "--seed", "7", "--out", str(path))
    assert code == 0 and out == "" and json.loads(path.read_text())["passed"]
    code, out, _ = run(capsys, "campaign", "--which", "weyl", "--trials", "3", "--seed", "7", "--out", "-")
    assert code == 0 and out.strip() == path.read_text().strip()
    code, out, err = run(capsys, "campaign", "--which", "heun", "--trials", "2")
    assert code == 1 and "heun.primed_constraint" in err and json.loads(out)["passed"] is False


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["transform", "--xi", "notanumber"])
    assert info.value.code == 64


def test_help_documents_json_conventions(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "[re, im]" in capsys.readouterr().out
