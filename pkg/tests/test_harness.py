import csv
import io
import json
import math

import jsonschema
import pytest

from qpcocycle.harness.cli import main
from qpcocycle.harness.config import ConfigError, ExperimentConfig, load_schema
from qpcocycle.harness.export import ExportError, csv_columns, dumps, export, fmt_float
from qpcocycle.harness.manifest import RunManifest
from qpcocycle.harness.runs import OUTPUTS, construct_run
from qpcocycle.harness.suites import run_suite


# -- config ----------------------------------------------------------------------

def test_config_round_trip():
    cfg = ExperimentConfig()
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.to_json() == cfg.to_json()
    assert back.digest() == cfg.digest()
    assert json.loads(cfg.to_json())["class"] == "Cl"


def test_config_rejects_bad_input():
    d = ExperimentConfig().to_dict()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**d, "surprise": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**d, "N": 5, "n_max": 2})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**d, "schema_version": 99})


def test_config_fills_tolerances():
    d = ExperimentConfig().to_dict()
    d["tolerances"] = {"angle": 1e-3}
    cfg = ExperimentConfig.from_dict(d)
    assert cfg.tolerances == {"angle": 1e-3, "resonance": 1e-8, "eps_hyp": 0.1}


def test_config_digest_changes():
    a = ExperimentConfig()
    b = ExperimentConfig(lam=50.0)
    assert a.digest() != b.digest()


# -- export helpers ------------------------------------------------------------------

def test_dumps_is_stable():
    doc = {"b": [1.0, 0.1, math.pi], "a": {"x": None, "y": True}}
    assert dumps(doc) == dumps(json.loads(dumps(doc)))
    assert json.loads(dumps(doc)) == doc
    assert float(fmt_float(0.1)) == 0.1


# -- construct run / export ----------------------------------------------------------

@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code, man = construct_run(ExperimentConfig(), out, workers=1)
    return out, code, man


def test_run_outputs(run_dir):
    out, code, man = run_dir
    # the desk gap stays below its 10% threshold, so the run reports failure
    assert code == 1
    for name in OUTPUTS + ("manifest.json",):
        assert (out / name).exists()
    ver = json.loads((out / "verification.json").read_text())
    assert ver["passed"] is False
    assert ver["config_digest"] == ExperimentConfig().digest()
    assert all(s["accepted"] for s in man.steps) and len(man.steps) == 4


def test_manifest_digests(run_dir):
    out, _, _ = run_dir
    man = RunManifest.read(out)
    assert set(man.digests) == set(OUTPUTS)
    assert all(man.verify(out).values())
    (out / "scratch.txt").write_text("x")
    assert all(RunManifest.read(out).verify(out).values())


def test_le_gap_csv_header(run_dir):
    out, _, _ = run_dir
    rows = list(csv.reader(io.StringIO((out / "le_gap.csv").read_text())))
    assert rows[0] == csv_columns("le_gap.csv")
    assert len(rows) == 1 + 2 * 3


def test_export_json_and_csv_idempotent(run_dir):
    out, _, _ = run_dir
    (p,) = export(out, "json")
    first = p.read_bytes()
    jsonschema.validate(json.loads(first), load_schema("export.schema.json"))
    assert export(out, "json")[0].read_bytes() == first
    paths = export(out, "csv")
    texts = [q.read_bytes() for q in paths]
    assert [q.read_bytes() for q in export(out, "csv")] == texts
    steps = list(csv.reader(io.StringIO(paths[0].read_text())))
    assert steps[0] == csv_columns("steps.csv")
    with pytest.raises(ValueError):
        export(out, "xml")


def test_export_missing_artifacts(tmp_path):
    with pytest.raises(ExportError):
        export(tmp_path, "json")


# -- suites ----------------------------------------------------------------------

def test_report_schema_and_determinism():
    cfg = ExperimentConfig(trials=200)
    code, rep = run_suite("sl2-lemmas", cfg)
    jsonschema.validate(json.loads(dumps(rep)), load_schema("report.schema.json"))
    assert code == 0 and rep["passed"]
    assert dumps(run_suite("sl2-lemmas", cfg)[1]) == dumps(rep)
    with pytest.raises(ValueError):
        run_suite("nope", cfg)


# -- CLI -----------------------------------------------------------------------------

def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_cli_freq(capsys):
    code, cap = _run(capsys, "freq", "expand", "--rational", "7/10", "--depth", "3")
    assert code == 0
    assert [r["q"] for r in json.loads(cap.out)] == [1, 1, 3, 10]
    code, cap = _run(capsys, "freq", "synth", "--rule", "golden", "--depth", "5")
    assert [r["q"] for r in json.loads(cap.out)] == [1, 1, 2, 3, 5, 8]
    code, cap = _run(capsys, "freq", "classify", "--freq", "golden", "--depth", "20",
                     "--gamma", "0.5", "--tau", "2")
    assert code == 0 and all(json.loads(cap.out)["dc_pass"])
    code, cap = _run(capsys, "freq", "expand", "--rational", "1/2", "--depth", "3")
    assert code == 2 and "error" in cap.err


def test_cli_orbit(capsys):
    code, cap = _run(capsys, "orbit", "gaps", "--freq", "golden", "--n", "4", "--depth", "16")
    assert code == 0 and json.loads(cap.out)["ok"]
    code, cap = _run(capsys, "orbit", "return", "--freq", "golden", "--n", "3", "--depth", "16",
                     "--samples", "5", "--brute")
    rows = list(csv.DictReader(io.StringIO(cap.out)))
    assert code == 0 and rows and all(r["match"] == "1" for r in rows)


def test_cli_sl2(capsys):
    code, cap = _run(capsys, "sl2", "verify", "--lemma", "basic", "--trials", "100")
    assert code == 0 and json.loads(cap.out)["violations"] == 0


def test_cli_cocycle(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"freq": "golden", "depth": 20,
                                "generator": {"kind": "constant", "matrix": [30, 0, 0, 1 / 30]}}))
    code, cap = _run(capsys, "cocycle", "le", "--spec", str(spec), "--N", "100", "--grid", "8")
    assert code == 0 and abs(json.loads(cap.out)["value"] - math.log(30)) < 1e-12
    code, cap = _run(capsys, "cocycle", "frames", "--spec", str(spec), "--level", "4",
                     "--samples", "5")
    rows = list(csv.DictReader(io.StringIO(cap.out)))
    assert code == 0 and len(rows) == 5 and all(r["flags"] == "ok" for r in rows)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"generator": {"kind": "mystery"}}))
    assert _run(capsys, "cocycle", "le", "--spec", str(bad), "--N", "5", "--grid", "2")[0] == 2


def test_cli_verify_and_export(capsys, tmp_path, run_dir):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(ExperimentConfig(trials=100).to_json())
    out = tmp_path / "rep.json"
    code, cap = _run(capsys, "verify", "--suite", "sl2-lemmas", "--config", str(cfg),
                     "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["passed"]
    assert "PASS [" in cap.err
    code, cap = _run(capsys, "export", "--run", str(run_dir[0]), "--format", "json")
    assert code == 0 and cap.out.strip().endswith("run.json")
    code, cap = _run(capsys, "export", "--run", str(tmp_path), "--format", "csv")
    assert code == 2


def test_cli_construct(capsys, tmp_path, run_dir):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(ExperimentConfig().to_json())
    out = tmp_path / "run"
    code, cap = _run(capsys, "construct", "run", "--config", str(cfg), "--out", str(out))
    assert code == 1 and json.loads(cap.out)["passed"] is False
    # same config, same outputs
    for name in OUTPUTS:
        assert (out / name).read_bytes() == (run_dir[0] / name).read_bytes()
    bad = tmp_path / "bad.json"
    bad.write_text("{\"lambda\": -1}")
    assert _run(capsys, "construct", "run", "--config", str(bad), "--out", str(out))[0] == 2
