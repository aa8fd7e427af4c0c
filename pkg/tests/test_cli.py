import json

import numpy as np
import pytest

from rbfrepro.cli import main
from rbfrepro.fields import load_scattered
from rbfrepro.fit import load_model


@pytest.fixture
def sinc_csv(tmp_path):
    path = tmp_path / "data.csv"
    assert main(["gen-data", "--field", "sinc2d", "--n", "400", "--out", str(path)]) == 0
    return path


def test_gen_data(sinc_csv, tmp_path):
    data = load_scattered(sinc_csv)
    assert len(data) == 400
    assert data.points.bounding_domain().x_max <= 1000
    pts = tmp_path / "c.csv"
    assert main(["gen-data", "--points", "epsilon", "--n", "81", "--seed", "3",
                 "--domain", "0,10,0,5", "--out", str(pts)]) == 0
    assert pts.read_text().splitlines()[0] == "x,y"
    assert len(pts.read_text().splitlines()) == 82


def test_fit_eval_roundtrip(sinc_csv, tmp_path, capsys):
    model_path = tmp_path / "m.json"
    dump = tmp_path / "B.txt"
    rc = main(["fit", "--data", str(sinc_csv), "--centers", "grid", "--m", "25",
               "--kernel", "IQ", "--alpha", "0.004", "--method", "original",
               "--dump-system", str(dump), "--out", str(model_path)])
    assert rc == 0
    diag = json.loads(capsys.readouterr().out)
    assert diag["solver_path"] == "normal"
    model = load_model(model_path)
    assert model.kernel.name == "iq" and model.method.value == "original"
    table = np.loadtxt(dump)
    assert table.shape == (28, 29)
    np.testing.assert_array_equal(table[:, :28], table[:, :28].T)

    assert main(["eval", "--model", str(model_path), "--data", str(sinc_csv)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["count"] == 400
    assert out["residual_norm"] == pytest.approx(diag["residual_norm"], rel=1e-12)

    assert main(["eval", "--model", str(model_path), "--field", "sinc2d", "--grid", "11", "6"]) == 0
    assert json.loads(capsys.readouterr().out)["report"]["eval_set"] == "grid(11x6)"

    vals = tmp_path / "v.csv"
    assert main(["eval", "--model", str(model_path), "--points", str(sinc_csv), "--out", str(vals)]) == 0
    lines = vals.read_text().splitlines()
    assert lines[0] == "x,y,value" and len(lines) == 401


def test_compare_flags(capsys, tmp_path):
    out = tmp_path / "r.json"
    rc = main(["compare", "--n", "300", "--m", "25", "--kernel", "iq", "--alpha", "0.004",
               "--grid", "21", "11", "--out", str(out)])
    assert rc == 0
    res = json.loads(capsys.readouterr().out)
    assert res["methods"] == ["original", "proposed"]
    assert res["mean_error_ratio"] == pytest.approx(
        res["reports"][0]["mean_abs"] / res["reports"][1]["mean_abs"], rel=1e-15)
    assert json.loads(out.read_text())["config"]["alphas"] == {"iq": [0.004]}


def test_sweep_and_manifest(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc = main(["sweep", "--n", "300", "--m", "25", "--centers", "halton,grid", "--kernel", "tps",
               "--alpha-range", "1e-4,1e-2,3", "--grid", "21", "11", "--out", str(out)])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 7
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["rows"] == 6 and manifest["config"]["kernels"] == ["tps"]
    assert json.loads(capsys.readouterr().out)["rows"] == 6


def test_sweep_from_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "data": {"kind": "halton", "n": 200},
        "centers": [{"kind": "grid", "nx": 4, "ny": 4}],
        "kernels": ["gauss"],
        "alphas": {"gauss": [0.002, 0.004]},
        "eval_grid": [11, 6],
    }))
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_error_grid_both_methods(tmp_path):
    out = tmp_path / "g.csv"
    rc = main(["error-grid", "--n", "300", "--m", "25", "--kernel", "gauss", "--alpha", "0.002",
               "--nx", "6", "--ny", "4", "--out", str(out)])
    assert rc == 0
    for method in ("original", "proposed"):
        lines = (tmp_path / f"g_{method}.csv").read_text().splitlines()
        assert lines[0] == "x,y,true,approx,abs_error" and len(lines) == 25


def test_error_grid_from_model(sinc_csv, tmp_path):
    model_path = tmp_path / "m.json"
    assert main(["fit", "--data", str(sinc_csv), "--m", "16", "--kernel", "gauss",
                 "--alpha", "0.003", "--out", str(model_path)]) == 0
    out = tmp_path / "g.csv"
    assert main(["error-grid", "--model", str(model_path), "--field", "sinc2d",
                 "--nx", "3", "--ny", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 7


def test_exit_code_parse_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,h\n1.0,2.0,abc\n")
    assert main(["fit", "--data", str(bad), "--kernel", "gauss", "--alpha", "1", "--out",
                 str(tmp_path / "m.json")]) == 1


def test_exit_code_contract_error(sinc_csv, tmp_path):
    assert main(["fit", "--data", str(sinc_csv), "--kernel", "gauss", "--alpha", "-1",
                 "--out", str(tmp_path / "m.json")]) == 1


def test_exit_code_bad_flags():
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--kernel", "mq"])
    assert exc.value.code == 1


def test_exit_code_solver_failure(sinc_csv, tmp_path):
    rc = main(["fit", "--data", str(sinc_csv), "--m", "16", "--kernel", "gauss", "--alpha", "0.003",
               "--tolerance", "1e-300", "--out", str(tmp_path / "m.json")])
    assert rc == 2
