import csv
import json

import numpy as np
import pytest

from mch2.cli import run


def _cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


SOLITON = [{"zeta": [np.cos(np.pi / 4), np.sin(np.pi / 4)], "c": [-np.sin(np.pi / 4), np.cos(np.pi / 4)],
            "kind": "circle"}]


def test_scatter_background(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"state": {"preset": "background", "grid": {"x0": -20, "x1": 20, "count": 512}},
                          "kgrid": {"n": 32, "kmax": 4}})
    assert run(["scatter", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "r.csv")
    assert len(rows) == 32
    assert max(float(r["abs_r"]) for r in rows) < 1e-12
    meta = json.loads((tmp_path / "o" / "r.meta.json").read_text())
    assert meta["config"]["kgrid"]["kmax"] == 4
    assert json.loads(capsys.readouterr().out)["command"] == "scatter"


def test_solitons_and_determinism(tmp_path):
    cfg = _cfg(tmp_path, {"spectrum": SOLITON, "y": {"lo": -5, "hi": 5, "count": 41}})
    outs = []
    for tag in ("a", "b"):
        assert run(["solitons", "--config", str(cfg), "--t", "0,1.5", "--out", str(tmp_path / tag)]) == 0
        outs.append([(tmp_path / tag / f"soliton_{i:03d}.csv").read_bytes() for i in range(2)])
    assert outs[0] == outs[1]
    rows = _rows(tmp_path / "a" / "soliton_000.csv")
    assert len(rows) == 41 and max(float(r["p"]) for r in rows) > 1.5


def test_compare_one_soliton(tmp_path):
    cfg = _cfg(tmp_path, {"spectrum": SOLITON, "grid": {"x0": -30, "x1": 30, "count": 2048},
                          "t": [1.0, 2.0], "threshold": 1e-3})
    assert run(["compare", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "compare.csv")
    assert [r["pass"] for r in rows] == ["1", "1"]
    assert all(float(r["linf"]) < 1e-3 for r in rows)


def test_phase_atlas(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"atlas": {"re": [-3, 3, 61], "im": [-2, 2, 41]}})
    assert run(["phase-atlas", "--config", str(cfg), "--xi", "1.0", "--out", str(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["region"] == "II" and summary["stationary_points"] == 4
    assert (tmp_path / "atlas.csv").exists() and (tmp_path / "atlas.meta.json").exists()


def test_spectrum_of_background(tmp_path):
    cfg = _cfg(tmp_path, {"state": {"preset": "background", "grid": {"x0": -20, "x1": 20, "count": 512}}})
    assert run(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "spectrum.json").read_text())["count"] == 0


@pytest.mark.parametrize("argv,code", [
    (["asymptotics"], "invalid_config"),
    (["phase-atlas", "--config", "missing.json"], "invalid_config"),
    (["scatter", "--kmax", "0.5"], "invalid_config"),
])
def test_errors(tmp_path, capsys, argv, code):
    assert run(argv + ["--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == code and err["message"]


def test_bad_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(["scatter", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "invalid_config"
