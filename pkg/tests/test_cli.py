from __future__ import annotations

import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from conftest import example58
from friedrichs.cli import load_schema, main, model_document
from friedrichs.core import FriedrichsModel
from friedrichs.oracle import mult_symbol
from friedrichs.rational import RationalFn

MODELS = Path(__file__).parent.parent / "demos" / "models"


def write_model(tmp_path, model, name="m.json", **extra):
    doc = model_document(model) | extra
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_demo_models_validate():
    schema = load_schema("model")
    for path in MODELS.glob("*.json"):
        jsonschema.validate(json.loads(path.read_text()), schema)


def test_mfun_free_model(capsys, tmp_path):
    path = write_model(tmp_path, FriedrichsModel(phi=RationalFn.simple(-1j), psi=RationalFn()))
    code, doc = run_json(capsys, "mfun", path, "--lambda", "0,1")
    assert code == 0
    jsonschema.validate(doc, load_schema("mfun"))
    re, im = doc["records"][0]["M"]
    assert abs(complex(re, im) - (-1j / math.pi)) < 1e-15


def test_mfun_keeps_lambda_order(capsys):
    lams = ["0.5,2", "-1,-1", "3,0.25"]
    argv = ["mfun", MODELS / "example58.json"]
    for lam in lams:
        # the = form keeps argparse from reading a leading minus as a flag
        argv.append(f"--lambda={lam}")
    code, doc = run_json(capsys, *argv)
    assert code == 0
    assert [r["lambda"] for r in doc["records"]] == [[0.5, 2.0], [-1.0, -1.0], [3.0, 0.25]]


def test_mfun_real_lambda_is_usage_error(capsys):
    code, _, err = run(capsys, "mfun", MODELS / "example58.json", "--lambda", "0.5,0")
    assert code == 64
    assert "real axis" in err


def test_mfun_at_eigenvalue_is_refused(capsys):
    code, doc = run_json(capsys, "mfun", MODELS / "example58.json", "--lambda", "0,1")
    assert code == 2
    jsonschema.validate(doc, load_schema("mfun"))
    assert doc["error"]["reason"]


def test_defect_with_sperp(capsys):
    code, doc = run_json(capsys, "defect", MODELS / "example58.json", "--sperp")
    assert code == 0
    jsonschema.validate(doc, load_schema("defect"))
    assert doc["defect"] == 1
    assert len(doc["sperp"]) == 1


def test_defect_mixed_infinite(capsys, tmp_path):
    m = FriedrichsModel(phi=RationalFn.simple(1j), psi=RationalFn.simple(-1j), B=-1j * math.pi)
    code, doc = run_json(capsys, "defect", write_model(tmp_path, m))
    assert code == 0
    jsonschema.validate(doc, load_schema("defect"))
    assert doc["defect"] == "infinite"


def test_oracle_agrees(capsys):
    code, doc = run_json(capsys, "oracle", MODELS / "example58.json")
    assert code == 0
    jsonschema.validate(doc, load_schema("oracle"))
    assert doc["analytic_defect"] == doc["oracle_nullity"] == 1
    assert doc["agree"] is True


def test_oracle_near_essential_range(capsys, tmp_path):
    m = example58(1.0)
    mu = complex(mult_symbol(m)(0.7))
    path = write_model(tmp_path, m.with_(alpha=1 / (2j * math.pi * mu)))
    code, doc = run_json(capsys, "oracle", path)
    assert code == 2
    jsonschema.validate(doc, load_schema("oracle"))


@pytest.mark.parametrize("name", ["example58.json", "free.json"])
def test_reconstruct(capsys, name):
    code, doc = run_json(capsys, "reconstruct", MODELS / name)
    assert code == 0
    jsonschema.validate(doc, load_schema("reconstruct"))
    assert doc["B_error"] < 1e-4


def test_petal_json(capsys, tmp_path):
    out = tmp_path / "atlas.json"
    code, doc = run_json(capsys, "petal", MODELS / "example516b.json", "--out", out, "--grid", 200)
    assert code == 0
    jsonschema.validate(doc, load_schema("petal"))
    jsonschema.validate(json.loads(out.read_text()), load_schema("atlas"))
    assert {r["defect"] for r in doc["regions"]} == {0, 2}


def test_petal_builtin_svg(capsys, tmp_path):
    out = tmp_path / "fig.svg"
    code, doc = run_json(capsys, "petal", "--builtin", "figure2", "--out", out, "--grid", 300)
    assert code == 0
    assert out.read_text().startswith("<?xml")
    assert all(r["defect"] == 4 - r["nu_minus"] for r in doc["regions"])


def test_petal_alpha_plane_needs_bounds(capsys, tmp_path):
    code, _, _ = run(capsys, "petal", MODELS / "example58.json", "--plane", "alpha", "--out", tmp_path / "a.csv")
    assert code == 64


def test_petal_unknown_format(capsys, tmp_path):
    code, _, _ = run(capsys, "petal", MODELS / "example516b.json", "--out", tmp_path / "a.png")
    assert code == 64


def test_petal_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "petal", MODELS / "example516b.json", "--grid", 100,
                       "--out", tmp_path / "no" / "such" / "dir.svg")
    assert code == 74
    assert "I/O" in err


def test_unknown_key_rejected(capsys, tmp_path):
    path = write_model(tmp_path, example58(1.0), colour="red")
    code, _, err = run(capsys, "defect", path)
    assert code == 64
    assert "colour" in err


def test_unknown_sweep_key_rejected(capsys, tmp_path):
    path = write_model(tmp_path, example58(1.0), alpha_sweep={"plane": "mu", "step": 3})
    assert run(capsys, "defect", path)[0] == 64


def test_empty_bounds_rejected(capsys, tmp_path):
    path = write_model(tmp_path, example58(1.0), alpha_sweep={"plane": "mu", "bounds": [1, 1, 0, 2]})
    assert run(capsys, "petal", path, "--out", tmp_path / "a.svg")[0] == 64


def test_malformed_json(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    assert run(capsys, "defect", path)[0] == 64


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "defect", tmp_path / "absent.json")[0] == 74


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["mfun", str(MODELS / "example58.json"), "--lambda", "abc"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 64


def test_human_output_matches_json(capsys):
    argv = ["defect", MODELS / "example58.json", "--sperp"]
    _, human, _ = run(capsys, *argv)
    _, doc = run_json(capsys, *argv)
    parsed = dict(line.split(" = ", 1) for line in human.strip().splitlines())
    assert json.loads(parsed["defect"]) == doc["defect"]
    assert json.loads(parsed["sperp"]) == doc["sperp"]


def test_output_is_deterministic(capsys):
    first = run(capsys, "oracle", MODELS / "example58.json", "--json")[1]
    assert run(capsys, "oracle", MODELS / "example58.json", "--json")[1] == first


@pytest.mark.skipif(shutil.which("friedrichs") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["friedrichs", "defect", str(MODELS / "example58.json"), "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["defect"] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "friedrichs.cli", "defect", str(MODELS / "free.json"), "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["defect"] == 0
