import json
import os
from importlib import resources

import jsonschema
import pytest

from congcount.cli import COMMANDS, run

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SMALL = {
    "schema_version": 1,
    "spec": {"setting": "cf", "alphabet": [1, 2]},
    "seed": 3,
    "budget": 1_000_000,
    "count": {"q": 2, "R0": 50, "checkpoints": 5},
    "spectral": {"q": [2], "k_max": 10, "trials": 2},
    "expander": {"q": [2, 3], "p": [1], "y": 0, "z": 0},
    "zaremba": {"alphabet": [1, 2, 3], "N": [100, 200]},
    "verify": {"q": [2], "renewal_instances": 5, "periodic_max_length": 3},
    "lnic": {"m": [1], "samples": 50},
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(p)


def _schema():
    with resources.files("congcount").joinpath("schemas/output.schema.json").open() as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    cfg = _write(base, SMALL)
    outs = []
    for k in range(2):
        out = base / f"run{k}"
        for cmd in COMMANDS:
            assert run([cmd, "--config", cfg, "--out", str(out)]) == 0, cmd
        outs.append(out)
    return outs


def test_every_command_writes_valid_json(small_runs):
    schema = _schema()
    for cmd in COMMANDS:
        doc = json.loads((small_runs[0] / f"{cmd}.json").read_text())
        jsonschema.validate(doc, schema)
        assert doc["command"] == cmd and doc["status"] == "ok"


def test_outputs_byte_identical(small_runs):
    a, b = small_runs
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    assert any(n.endswith(".csv") for n in names)
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n


def test_malformed_config_exit_2(tmp_path):
    assert run(["delta", "--config", _write(tmp_path, "{not json")]) == 2
    bad = dict(SMALL, schema_version=2)
    assert run(["delta", "--config", _write(tmp_path, bad, "b.json")]) == 2
    extra = dict(SMALL, unknown_key=1)
    assert run(["delta", "--config", _write(tmp_path, extra, "c.json")]) == 2


def test_missing_seed_exit_2(tmp_path):
    cfg = {k: v for k, v in SMALL.items() if k != "seed"}
    path = _write(tmp_path, cfg)
    assert run(["spectral", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert run(["spectral", "--config", path, "--seed", "1", "--out", str(tmp_path / "o")]) == 0


def test_overlapping_schottky_exit_1(tmp_path, capsys):
    out = tmp_path / "ov"
    assert run(["validate", "--config", os.path.join(ROOT, "configs", "overlap.json"), "--out", str(out)]) == 1
    assert "disks 0 and 1 intersect" in capsys.readouterr().out
    assert json.loads((out / "validate.json").read_text())["status"] == "failed"


def test_count_over_budget_partial(tmp_path, capsys):
    out = tmp_path / "o"
    rc = run(["count", "--config", _write(tmp_path, SMALL), "--budget", "10", "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "count.json").read_text())
    assert doc["status"] == "partial" and doc["warnings"]
    assert "warning" in capsys.readouterr().err


def test_verify_gaussian_alphabet(tmp_path):
    out = tmp_path / "g"
    assert run(["verify", "--config", os.path.join(ROOT, "configs", "gauss.json"), "--out", str(out)]) == 0
    doc = json.loads((out / "verify.json").read_text())
    assert doc["status"] == "ok"


def test_schottky_config_runs(tmp_path):
    out = tmp_path / "s"
    path = os.path.join(ROOT, "configs", "schottky.json")
    assert run(["validate", "--config", path, "--out", str(out)]) == 0
    assert run(["delta", "--config", path, "--out", str(out)]) == 0
