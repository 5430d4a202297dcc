import csv
import io
import json

import pytest

from hgsoliton import __version__
from hgsoliton.cli import main
from hgsoliton.dhm import DHMeasure
from hgsoliton.quad import PiecewisePoly
from hgsoliton.rankone import Profile


@pytest.fixture
def files(tmp_path):
    def put(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    wdir = tmp_path / "weights"
    wdir.mkdir()
    (wdir / "a_exp.json").write_text(json.dumps({"type": "exp"}))
    (wdir / "b_mix.json").write_text(
        json.dumps({"type": "exp_mix", "terms": [{"c": "1", "a": "1"}, {"c": "1", "a": "1/2"}]})
    )
    profile = Profile(DHMeasure(PiecewisePoly.uniform(0, 4)), 1, "uniform")
    return {
        "blp2": put("blp2.json", {"vertices": [[-1, 0], [0, -1], [2, -1], [-1, 2]]}),
        "square": put("square.json", {"vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}),
        "seg": put("seg.json", {"vertices": [[-1], [1]]}),
        "off": put("off.json", {"vertices": [[1, 0], [2, 0], [1, 1]]}),
        "exp": put("exp.json", {"type": "exp"}),
        "bad_weight": put("bad.json", {"type": "exp_mix", "terms": [{"c": "1", "a": "0"}]}),
        "garbled": str(tmp_path / "garbled.json"),
        "profile": put("profile.json", profile.to_json()),
        "weights": str(wdir),
        "out": str(tmp_path / "report.json"),
        "tmp": tmp_path,
    }


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def test_report_schema(files, capsys):
    code, rep = run(["eval", "--polytope", files["seg"], "--weight", files["exp"], "--xi", "1"], capsys)
    assert code == 0
    assert set(rep) == {"command", "version", "inputs", "inputs_digest", "results", "quadrature_error", "wall_time"}
    assert rep["version"] == __version__
    assert rep["results"]["value"] == "0.16143936157119557"
    assert len(rep["inputs_digest"]) == 64


def test_self_contained_inputs(files, capsys, tmp_path):
    _, rep = run(["soliton", "--polytope", files["blp2"], "--weight", files["exp"]], capsys)
    p = tmp_path / "echo_p.json"
    w = tmp_path / "echo_w.json"
    p.write_text(json.dumps(rep["inputs"]["polytope"]))
    w.write_text(json.dumps(rep["inputs"]["weight"]))
    _, rep2 = run(["soliton", "--polytope", str(p), "--weight", str(w)], capsys)
    assert rep2["results"] == rep["results"]
    assert rep2["inputs_digest"] == rep["inputs_digest"]


def test_soliton_blp2(files, capsys):
    code, rep = run(["soliton", "--polytope", files["blp2"], "--weight", files["exp"]], capsys)
    assert code == 0
    assert [float(x) for x in rep["results"]["xi0"]] == pytest.approx([0.52761951989696, 0.52761951989696])


def test_exit_codes(files, capsys, monkeypatch):
    assert run(["soliton", "--polytope", files["off"], "--weight", files["exp"]], capsys)[0] == 3
    assert run(["eval", "--polytope", files["blp2"], "--weight", files["exp"], "--xi", "0,0,0"], capsys)[0] == 2
    assert run(["eval", "--polytope", files["blp2"], "--weight", files["exp"]], capsys)[0] == 2
    assert run(["eval", "--polytope", str(files["tmp"] / "missing.json"), "--weight", files["exp"], "--xi", "0,0"], capsys)[0] == 2
    assert run(["check", "--polytope", files["blp2"], "--weight", files["bad_weight"]], capsys)[0] == 2
    assert run(["eval", "--polytope", files["blp2"], "--weight", files["exp"], "--xi", "a,b"], capsys)[0] == 2
    monkeypatch.setenv("HGSOLITON_MAX_EVALS", "10")
    assert run(["eval", "--polytope", files["blp2"], "--weight", files["exp"], "--xi", "1,1"], capsys)[0] == 4


def test_garbled_json(files, capsys):
    with open(files["garbled"], "w") as fh:
        fh.write("{not json")
    code, rep = run(["dh", "--polytope", files["garbled"], "--xi", "1,0"], capsys)
    assert code == 2 and rep["error"]["type"] == "InvalidInput"


def test_dh_and_d1(files, capsys):
    _, rep = run(["dh", "--polytope", files["blp2"], "--xi", "1,1"], capsys)
    assert rep["results"]["mass"] == "1"
    assert rep["results"]["kind"] == "continuous"
    _, rep = run(["dh", "--polytope", files["seg"], "--xi", "1", "--m", "2"], capsys)
    assert rep["results"]["atoms"][0] == {"t": "-1", "m": "1/5"}
    _, rep = run(["dh", "--polytope", files["blp2"], "--xi", "1,1", "--normalization", "lebesgue"], capsys)
    assert rep["results"]["mass"] == "4"
    _, rep = run(["d1", "--polytope", files["square"], "--xi", "1,1", "--eta", "0,0"], capsys)
    assert rep["results"]["d1"] == "2/3"


def test_delta_ding_geodesic(files, capsys):
    _, rep = run(["delta", "--polytope", files["blp2"]], capsys)
    assert rep["results"]["delta_toric"] == "6/7"
    _, rep = run(["ding", "--polytope", files["seg"], "--weight", files["exp"], "--xi", "1", "--eta", "1"], capsys)
    assert float(rep["results"]["ding"]) == pytest.approx(0.313035, abs=1e-6)
    _, rep = run(
        ["geodesic", "--polytope", files["seg"], "--weight", files["exp"], "--xi", "1", "--eta", "-1", "--samples", "5"],
        capsys,
    )
    assert rep["results"]["passed"] and rep["results"]["strict"]


def test_rankone(files, capsys):
    _, rep = run(["rankone", "--profile", files["profile"], "--weight", files["exp"], "--minimize"], capsys)
    assert float(rep["results"]["a_star"]) == pytest.approx(0.8983779923618563, abs=1e-10)
    _, rep = run(["rankone", "--profile", files["profile"], "--weight", files["exp"], "--eval", "1"], capsys)
    assert "beta_tilde" in rep["results"]


def test_sweep_writes_csv(files, capsys):
    code = main(["sweep", "--polytope", files["blp2"], "--weights", files["weights"], "--out", files["out"]])
    assert code == 0
    rep = json.loads(open(files["out"]).read())
    assert [r["weight_id"] for r in rep["results"]["rows"]] == ["a_exp", "b_mix"]
    rows = list(csv.DictReader(io.StringIO(open(files["out"][:-5] + ".csv").read())))
    assert rows[0]["weight_id"] == "a_exp"
    assert float(rows[0]["xi0_0"]) == pytest.approx(0.5276195198969607, abs=1e-9)


def test_check(files, capsys):
    code, rep = run(["check", "--polytope", files["blp2"], "--weight", files["exp"]], capsys)
    assert code == 0 and rep["results"]["passed"]


def test_deterministic_bytes(files, capsys):
    outs = []
    for _ in range(2):
        main(["soliton", "--polytope", files["blp2"], "--weight", files["exp"], "--out", files["out"]])
        rep = json.loads(open(files["out"]).read())
        rep.pop("wall_time")
        outs.append(json.dumps(rep, sort_keys=True))
    assert outs[0] == outs[1]
