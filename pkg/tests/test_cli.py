import csv
import io
import json

import numpy as np
import pytest

from smearing.cli import main

BASE = ["--q", "53", "--n", "2", "--sigma", "6", "--gamma", "2"]


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    return config, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_prob_small(capsys):
    code, out, _ = run(["prob", "--q", "3", "--m-max", "4"], capsys)
    assert code == 0
    config, rows = parse_csv(out)
    assert config["seed"] == 0 and config["q"] == 3
    got = {int(r["m"]): float(r["p_exact"]) for r in rows}
    assert got[3] == pytest.approx(2 / 9) and got[4] == pytest.approx(4 / 9)


def test_prob_q1_all_ones(capsys):
    _, out, _ = run(["prob", "--q", "1", "--m-max", "2"], capsys)
    assert [float(r["p_exact"]) for r in parse_csv(out)[1]] == [1.0, 1.0]


def test_prob_q53_curve_with_extras(capsys):
    code, out, _ = run(["prob", "--q", "53", "--m-max", "400", "--approx", "--mc-trials", "200", "--seed", "5"], capsys)
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 400
    vals = [float(r["p_exact"]) for r in rows]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert {"p_approx", "p_mc"} <= set(rows[0])


def test_prob_grid_and_json(capsys):
    code, out, _ = run(["prob", "--q-max", "5", "--m-max", "10", "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and len(data["rows"]) == 50
    assert data["config"]["q_max"] == 5


def test_prob_nonuniform(capsys):
    _, out, _ = run(["prob", *BASE, "--m-max", "300"], capsys)
    config, rows = parse_csv(out)
    assert config["sigma"] == 6.0 and config["f"] == [49, 0, 1]
    assert float(rows[-1]["p_exact"]) < 1e-10


@pytest.mark.parametrize(
    "args",
    [
        ["prob", "--m-max", "4"],
        ["prob", "--q", "3", "--m-min", "5", "--m-max", "4"],
        ["prob", "--q", "0", "--m-max", "4"],
        ["prob", "--q", "3"],
        ["prob", "--q", "3", "--m-max", "x"],
    ],
)
def test_prob_usage_errors(args, capsys):
    code, _, err = run(args, capsys) if args[-1] != "x" else (None, None, None)
    if args[-1] == "x":
        with pytest.raises(SystemExit) as exc:
            main(args)
        assert exc.value.code == 1
    else:
        assert code == 1 and "error" in err


def test_curves(capsys):
    code, out, _ = run(["curves", *BASE, "--m-max", "400"], capsys)
    _, rows = parse_csv(out)
    assert code == 0 and len(rows) == 400
    best = max(rows, key=lambda r: float(r["p_correct"]))
    assert float(best["p_uniform"]) > 0.5 > float(best["p_chi"])


def test_mapdist_q607_with_histogram(tmp_path, capsys):
    hist = tmp_path / "hist.csv"
    code, out, _ = run(
        ["mapdist", "--q", "607", "--n", "3", "--beta", "0.01", "--gamma", "396", "--json", "--mc-samples", "20000", "--mc-out", str(hist)],
        capsys,
    )
    assert code == 0
    data = json.loads(out)
    assert len(data["mapped_dist"]) == 607 and len(data["coefficient_dist"]) == 607
    assert abs(sum(data["mapped_dist"]) - 1) < 1e-9
    _, rows = parse_csv(hist.read_text())
    assert len(rows) == 607


def test_mapdist_n1_echoes_base(capsys):
    _, out, _ = run(["mapdist", "--q", "11", "--n", "1", "--gamma", "3", "--sigma", "2"], capsys)
    _, rows = parse_csv(out)
    assert all(r["p_coefficient"] == r["p_mapped"] for r in rows)


def test_mapdist_uniform_base(capsys):
    _, out, _ = run(["mapdist", "--q", "11", "--n", "3", "--gamma", "3", "--uniform-base"], capsys)
    _, rows = parse_csv(out)
    assert np.allclose([float(r["p_mapped"]) for r in rows], 1 / 11)


def test_mapdist_gamma_not_root(capsys):
    code, _, err = run(["mapdist", "--q", "5", "--f", "1,0,1", "--gamma", "1", "--sigma", "1"], capsys)
    assert code == 1 and "roots found: [2, 3]" in err


def test_params_direct(capsys):
    code, out, _ = run(["params", "--p-u", "0.75", "--p-chi", "0.25", "--alpha", "0.05", "--beta-err", "0.05", "--json"], capsys)
    assert code == 0 and json.loads(out)["result"]["n_trials"] == 61


def test_params_auto_plan(capsys):
    code, out, _ = run(["params", *BASE, "--json"], capsys)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["p_uniform"] > 0.5 > res["p_chi"]
    assert res["m_smallest"] <= res["m"]
    assert res["n_trials"] % 2 == 1
    assert 0 < res["predicted_success_uniform"] <= 1


def test_params_uniform_chi_fails(capsys):
    code, _, err = run(["params", "--q", "11", "--uniform-chi"], capsys)
    assert code == 1 and "too close to uniform" in err


def test_params_chi_file(tmp_path, capsys):
    path = tmp_path / "chi.json"
    path.write_text(json.dumps([0.4, 0.3, 0.2, 0.1]))
    code, out, _ = run(["params", "--chi-file", str(path), "--alpha", "0.05", "--beta-err", "0.05", "--json"], capsys)
    assert code == 0 and json.loads(out)["result"]["m"] >= 4


def test_attack_plwe(capsys):
    code, out, _ = run(["attack", "--mode", "plwe", *BASE, "--auto-params", "--seed", "3"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "PLWE"
    assert rep["recovered_s_gamma"] == rep["true_s_gamma"]
    assert rep["config"]["seed"] == 3


def test_attack_uniform(capsys):
    code, out, _ = run(["attack", "--mode", "uniform", *BASE, "--m", "700", "--trials", "3", "--seed", "1"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "Uniform"


def test_attack_inconclusive_exit_code(capsys):
    # m=q: almost nothing smears, so every guess looks non-uniform
    code, out, _ = run(["attack", "--mode", "uniform", *BASE, "--m", "53", "--trials", "1"], capsys)
    assert code == 2 and json.loads(out)["verdict"] == "Inconclusive"


def test_attack_needs_params(capsys):
    code, _, err = run(["attack", "--mode", "uniform", *BASE], capsys)
    assert code == 1 and "--auto-params" in err


def test_attack_from_sample_file(tmp_path, capsys):
    path = tmp_path / "samples.csv"
    ring = ["--q", "11", "--n", "2", "--gamma", "2"]
    code, _, _ = run(["samples", "--mode", "plwe", *ring, "--sigma", "0.5", "--count", "3000", "--seed", "4", "--out", str(path)], capsys)
    assert code == 0
    header = json.loads(path.read_text().splitlines()[0][len("# config: "):])
    code, out, _ = run(["attack", "--mode", "file", "--samples", str(path), *ring, "--m", "50", "--trials", "3"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "PLWE"
    s = header["secret"]
    assert rep["recovered_s_gamma"] == (s[0] + 2 * s[1]) % 11


def test_attack_sample_file_exhausted(tmp_path, capsys):
    path = tmp_path / "samples.csv"
    ring = ["--q", "11", "--n", "2", "--gamma", "2"]
    run(["samples", "--mode", "uniform", *ring, "--count", "100", "--out", str(path)], capsys)
    code, _, err = run(["attack", "--mode", "file", "--samples", str(path), *ring, "--m", "50", "--trials", "3"], capsys)
    assert code == 1 and "exhausted" in err


@pytest.mark.parametrize(
    "body,line,msg",
    [
        ("1,2,3,4\n1,2,x,4\n", 2, "non-integer"),
        ("# c\n1,2,3\n", 2, "expected 4 fields"),
        ("1,2,3,4\n\n1,2,3,11\n", 3, "outside"),
    ],
)
def test_sample_file_parse_errors(tmp_path, capsys, body, line, msg):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    code, _, err = run(["attack", "--mode", "file", "--samples", str(path), "--q", "11", "--n", "2", "--gamma", "2", "--m", "1", "--trials", "1"], capsys)
    assert code == 1
    assert f"bad.csv:{line}:" in err and msg in err


def test_config_replay_reproduces_artifact(tmp_path, capsys):
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    run(["attack", "--mode", "plwe", *BASE, "--auto-params", "--seed", "8", "--out", str(first)], capsys)
    run(["attack", "--config", str(first), "--out", str(second)], capsys)
    assert first.read_bytes() == second.read_bytes()
    csv1, csv2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
    run(["prob", "--q", "7", "--m-max", "30", "--mc-trials", "50", "--seed", "2", "--out", str(csv1)], capsys)
    run(["prob", "--config", str(csv1), "--out", str(csv2)], capsys)
    assert csv1.read_bytes() == csv2.read_bytes()
