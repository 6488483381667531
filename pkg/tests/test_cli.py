"""vortexctl: exit codes, artifacts, manifests, determinism."""

import hashlib
import json

import pytest

from hvortex.cli import main


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path_factory, monkeypatch):
    cache = tmp_path_factory.mktemp("cache")
    monkeypatch.setenv("VORTEXCTL_CACHE", str(cache))


def test_profile_command(tmp_path):
    out = tmp_path / "prof"
    code = main(["profile", "--m", "1", "--rmax", "12", "--n", "600",
                 "--out", str(out)])
    assert code == 0
    for name in ("profile.csv", "asymptotics.json", "profile.svg",
                 "manifest.json"):
        assert (out / name).exists()
    csv = (out / "profile.csv").read_bytes()
    assert b"\r" not in csv
    # 18 significant digits per float field
    first = csv.decode().splitlines()[1].split(",")[1]
    mantissa = first.split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) == 18


def test_manifest_hashes(tmp_path):
    out = tmp_path / "prof"
    assert main(["profile", "--m", "1", "--rmax", "12", "--n", "600",
                 "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for name, digest in manifest["outputs_sha256"].items():
        actual = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert actual == digest
    assert manifest["inputs"]["vortex"]["m"] == 1
    assert manifest["wall_seconds"] > 0.0


def test_invalid_config_exits_2(tmp_path):
    assert main(["profile", "--m", "9",
                 "--out", str(tmp_path / "x")]) == 2
    assert main(["profile", "--rmax", "2.0",
                 "--out", str(tmp_path / "y")]) == 2


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[grid]\nrmax = 12\nwidth = 3\n")
    assert main(["profile", "--config", str(cfg),
                 "--out", str(tmp_path / "z")]) == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "ok.cfg"
    cfg.write_text("[grid]\nrmax = 12\nn = 600\n[vortex]\nm = 2\n")
    out = tmp_path / "prof2"
    assert main(["profile", "--config", str(cfg), "--m", "1",
                 "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["inputs"]["vortex"]["m"] == 1  # flag wins
    assert manifest["inputs"]["grid"]["rmax"] == 12.0


def test_evolve_command(tmp_path):
    out = tmp_path / "ev"
    code = main(["evolve", "--m", "1", "--rmax", "12", "--n", "600",
                 "--dt", "0.05", "--T", "1", "--out", str(out)])
    assert code == 0
    assert (out / "trace.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["blew_up"] is False


def test_determinism(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(["lemmas", "--m", "1", "--rmax", "12", "--n", "600",
                     "--seed", "3", "--out", str(out)]) == 0
        blobs = {p.name: p.read_bytes() for p in sorted(out.iterdir())
                 if p.suffix == ".json" and p.name != "manifest.json"}
        outs.append(blobs)
    assert outs[0] == outs[1]
