import json
import subprocess
import sys
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def _registry():
    res = []
    for f in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(f.read_text())
        res.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(res)


REGISTRY = _registry()


def validate(obj, name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    Draft202012Validator(schema, registry=REGISTRY).validate(obj)


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "diogame", *args], capture_output=True, text=True, cwd=cwd)


def test_schemas_are_valid_documents():
    for f in SCHEMAS.glob("*.schema.json"):
        Draft202012Validator.check_schema(json.loads(f.read_text()))


def test_derive_constants_output():
    r = run("derive-constants")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    validate(out, "constants")
    assert out["R"] == "9/1" and out["violations"] == []
    r = run("derive-constants", "--mode", "custom", "--R", "3", "--c", "1/10")
    out = json.loads(r.stdout)
    validate(out, "constants")
    assert out["violations"]


def test_attach_batch_and_schema(tmp_path):
    batch = tmp_path / "pts.txt"
    batch.write_text("1/3,2/5\n0,0\n5/7,3/11\n")
    r = run("attach", "--weights", "2/3,1/3", "--batch", str(batch))
    assert r.returncode == 0, r.stderr
    rows = [json.loads(line) for line in r.stdout.splitlines()]
    assert len(rows) == 3
    for row in rows:
        validate(row, "certificates")
        assert row["dual_violations"] == [] and row["line_ok"]


def test_malformed_batch_line_is_usage_error(tmp_path):
    batch = tmp_path / "pts.txt"
    batch.write_text("1/3,2/5\n1/3,banana\n")
    r = run("attach", "--weights", "1/2,1/2", "--batch", str(batch))
    assert r.returncode == 2
    assert "banana" in r.stderr or "line 2" in r.stderr


def test_bad_weights_and_budget_exit_codes():
    assert run("attach", "--weights", "1/2", "--point", "1/3,2/5").returncode == 2
    r = run("attach", "--weights", "1/2,1/2", "--point", "123456789/987654323,1/3", "--budget", "1")
    assert r.returncode == 3 and "budget" in r.stderr


def test_run_game_is_reproducible_and_replays(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for f in (a, b):
        assert run("run-game", "--rounds", "12", "--seed", "5", "--out", str(f)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    lines = [json.loads(line) for line in a.read_text().splitlines()]
    for line in lines:
        validate(line, "transcript")
    r = run("replay", "--transcript", str(a))
    assert r.returncode == 0 and json.loads(r.stdout)["verdict"] == "Legal"
    assert run("run-game", "--rounds", "12", "--seed", "6", "--out", str(b)).returncode == 0
    assert a.read_bytes() != b.read_bytes()


def test_tampered_transcript_fails_replay(tmp_path):
    f = tmp_path / "t.jsonl"
    run("run-game", "--rounds", "4", "--seed", "1", "--out", str(f))
    lines = f.read_text().splitlines()
    row = json.loads(lines[2])
    row["bob"]["radius"] = "3/4"
    lines[2] = json.dumps(row)
    f.write_text("\n".join(lines) + "\n")
    r = run("replay", "--transcript", str(f))
    assert r.returncode == 1
    assert json.loads(r.stdout)["verdict"] != "Legal"


@pytest.mark.parametrize("ruleset,extra", [("AB", ["--alice", "haw-reduction", "--alpha", "1/2"]), ("HAW", ["--alice", "empty", "--beta", "1/5"])])
def test_run_game_other_rulesets(tmp_path, ruleset, extra):
    f = tmp_path / "t.jsonl"
    r = run("run-game", "--ruleset", ruleset, "--rounds", "6", "--out", str(f), *extra)
    assert r.returncode == 0, r.stderr
    for line in f.read_text().splitlines():
        validate(json.loads(line), "transcript")


def test_certify_and_orbit_schemas():
    r = run("certify", "--x", "sqrt(2)-1,sqrt(3)-1", "--weights", "1/2,1/2", "--Q", "30", "--eps", "1/10")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    validate(out, "profile")
    assert out["verdict"].startswith(("InBad", "ExcludedAt"))
    r = run("orbit", "--x", "1/3,1/5", "--weights", "1/2,1/2", "--et-grid", "2,4,8")
    assert r.returncode == 0
    validate(json.loads(r.stdout), "orbit")
    assert run("orbit", "--x", "1/3,1/5", "--weights", "1/2,1/2").returncode == 2


def test_config_file_supplies_defaults(tmp_path):
    cfg = {"weights": "1/2,1/2", "point": ["1/3,2/5"], "no-line": True}
    validate(cfg, "config")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    r = run("attach", "--config", str(path))
    assert r.returncode == 0, r.stderr
    assert "line" not in json.loads(r.stdout)
    path.write_text("[1, 2]")
    assert run("attach", "--config", str(path)).returncode == 2


def test_verify_quick(tmp_path):
    out = tmp_path / "v.json"
    meta = tmp_path / "m.json"
    r = run("verify", "--profile", "quick", "--out", str(out), "--meta", str(meta))
    assert r.returncode == 0, r.stdout
    assert all(line.startswith("PASS ") for line in r.stdout.splitlines())
    payload = json.loads(out.read_text())
    validate(payload, "verify")
    assert json.loads(meta.read_text())["command"] == "verify"


def test_decompose_and_critical_outputs():
    r = run("decompose", "--weights", "1/2,1/2", "--point", "1/3,2/5", "--mode", "custom", "--R", "3", "--c", "1/10")
    assert r.returncode == 0
    assert json.loads(r.stdout)["class"] == {"n": 4, "k": 1}
    r = run("critical", "--weights", "1/2,1/2", "--center", "1/3,1/3", "--radius", "1/3",
            "--mode", "custom", "--R", "3", "--c", "1/10", "--k-max", "2")
    assert r.returncode == 0
    assert json.loads(r.stdout)["classes"]
