import json
import subprocess
import sys

import pytest

from freelunch import cli
from freelunch.config import ExperimentConfig, load_config
from freelunch.errors import QuadratureFailure


def write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


FBM = {"kernel": {"type": "fbm_ma", "H": 0.95}, "grid": {"n": 1, "t0": 0.5, "steps": 20}}
BM = {"kernel": {"type": "brownian"}, "grid": {"n": [1, 2, 4, 8], "t0": 0.5, "steps": 50}}
OU = {"kernel": {"type": "ou", "kappa0": 1.0, "v": 1.0}, "grid": {"n": 4, "t0": 0.5, "steps": 200}}


def run(tmp_path, cmd, cfg, out="out", *extra):
    path = write(tmp_path, f"{cmd}.json", cfg)
    return cli.main([cmd, "--config", str(path), "--out", str(tmp_path / out), *extra])


def load(tmp_path, name, out="out"):
    return json.loads((tmp_path / out / name).read_text())


def test_scan_fbm_exit_three(tmp_path):
    assert run(tmp_path, "scan", FBM) == cli.EXIT_FREE_LUNCH
    cert = load(tmp_path, "certificate.json")["certificate"]
    assert cert["sell_step"] == cert["j0"] + 5
    assert cert["kernel"] == {"type": "fbm_ma", "H": 0.95}
    assert cert["verdict"] == "arbitrage_strict"
    meta = load(tmp_path, "certificate.json")["metadata"]
    assert set(meta) == {"config_hash", "seed", "prng", "version"}


def test_scan_brownian_exit_zero(tmp_path):
    assert run(tmp_path, "scan", BM) == cli.EXIT_OK
    doc = load(tmp_path, "certificate.json")
    assert doc["certificate"] is None and not doc["found"] and not doc["flvr_hint"]
    lines = (tmp_path / "out" / "scan.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[4] == "n,j,lambda_bar,esssup_xy,essinf_z,verdict"
    assert len(lines) == 5 + 4 * 51


def test_scan_ou_flvr_hint(tmp_path):
    assert run(tmp_path, "scan", OU) == cli.EXIT_OK
    assert load(tmp_path, "certificate.json")["flvr_hint"] is True


def test_flvr_commands(tmp_path):
    assert run(tmp_path, "flvr", OU) == cli.EXIT_FREE_LUNCH
    summary = load(tmp_path, "flvr.json")["per_n"][0]
    assert summary["all_met"] and [t["delta"] for t in summary["targets"]] == [0.5, 0.1, 0.02]
    assert run(tmp_path, "flvr", BM, "bm") == cli.EXIT_CONFIG


def test_converge_brownian(tmp_path, capsys):
    cfg = {**BM, "options": {"pairs": [[1.0, 1.5]], "mc_paths": 2000}}
    assert run(tmp_path, "converge", cfg) == cli.EXIT_OK
    doc = load(tmp_path, "converge.json")
    assert doc["pairs"][0]["slope"] is None  # errors are exactly zero
    assert len(doc["moments"]) == 4
    assert "log-log slope" in capsys.readouterr().out


def test_simulate_deterministic(tmp_path):
    cfg = {**OU, "options": {"paths": 3, "decompose_j": 4}}
    assert run(tmp_path, "simulate", cfg, "a") == 0
    assert run(tmp_path, "simulate", cfg, "b", "--threads", "4") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "path_n4_p2.csv" in files and "y_coeffs_n4.csv" in files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert run(tmp_path, "simulate", cfg, "c", "--seed", "99") == 0
    assert (tmp_path / "a" / "path_n4_p0.csv").read_bytes() != (tmp_path / "c" / "path_n4_p0.csv").read_bytes()
    assert "# seed=99" in (tmp_path / "c" / "path_n4_p0.csv").read_text()


def test_oracle_matrix(tmp_path):
    cfg = {**FBM, "options": {"matrix": True, "max_offset": 4}}
    assert run(tmp_path, "oracle", cfg) == cli.EXIT_OK
    doc = load(tmp_path, "oracle.json")
    assert doc["mismatches"] == 0 and doc["cases"] == len(cli.builtin_kernels()) * 2 * 3 * 5


def test_oracle_mismatch_exit_two(tmp_path, monkeypatch):
    real = cli.lambda_bar
    monkeypatch.setattr(cli, "lambda_bar", lambda m, g, j: real(m, g, j) + 1e-9)
    assert run(tmp_path, "oracle", FBM) == cli.EXIT_NUMERICAL


def test_numerical_failure_exit_two(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise QuadratureFailure("forced")

    monkeypatch.setattr(cli, "convergence_table", boom)
    assert run(tmp_path, "converge", BM) == cli.EXIT_NUMERICAL


@pytest.mark.parametrize(
    "cfg",
    [
        {"kernel": {"type": "nope"}, "grid": {"n": 1, "t0": 0.5, "steps": 3}},
        {"kernel": {"type": "ou"}, "grid": {"n": 1, "t0": 0.5}},
        {"kernel": {"type": "ou"}, "grid": {"n": 0, "t0": 0.5, "steps": 3}},
        {"kernel": {"type": "ou"}, "grid": {"n": 1, "t0": 0.5, "steps": 3}, "extra": 1},
        {"kernel": {"type": "fbm_ma", "H": 1.5}, "grid": {"n": 1, "t0": 0.5, "steps": 3}},
        {"kernel": {"type": "ou"}, "law": {"type": "two_point", "down": 1, "up": 2}, "grid": {"n": 1, "t0": 0.5, "steps": 3}},
        {"kernel": {"type": "ou"}, "grid": {"n": 1, "t0": 0.5, "steps": 3}, "seed": -4},
    ],
)
def test_config_errors_exit_one(tmp_path, cfg):
    assert run(tmp_path, "scan", cfg) == cli.EXIT_CONFIG


def test_missing_and_malformed_config(tmp_path):
    assert cli.main(["scan", "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["scan", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["scan", "--config", str(tmp_path / "absent.json")]) == cli.EXIT_CONFIG


def test_config_round_trip(tmp_path):
    cfg = load_config(write(tmp_path, "c.json", {**OU, "price_map": "exponential", "drift": {"type": "constant", "value": 0.1}}))
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.to_dict() == cfg.to_dict() and again.hash == cfg.hash
    assert cfg.j_max(4) == cfg.grid(4).j0 + 200


def test_tabulated_kernel_path_relative_to_config(tmp_path):
    (tmp_path / "k.csv").write_text("theta,kappa\n0,0.2\n0.5,0.6\n1,0.1\n")
    cfg = {"kernel": {"type": "tabulated", "path": "k.csv"}, "grid": {"n": 16, "t0": 0.5, "T": 5.0}}
    assert run(tmp_path, "scan", cfg) == cli.EXIT_FREE_LUNCH


def test_kernels_listing(tmp_path, capsys):
    assert cli.main(["kernels", "--out", str(tmp_path)]) == 0
    listing = json.loads(capsys.readouterr().out)["kernels"]
    assert {k["type"] for k in listing} == {"brownian", "fbm_ma", "fbm_sottinen", "ou", "rogers", "mixed_bm", "tabulated"}
    assert (tmp_path / "kernels.json").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "freelunch", "kernels"], capture_output=True, text=True)
    assert proc.returncode == 0 and '"kernels"' in proc.stdout
