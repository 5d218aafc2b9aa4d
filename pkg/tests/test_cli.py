"""End-to-end command tests: artifacts, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from nonlocal_nls import cli
from nonlocal_nls.runconfig import ConfigError, parse_config

BOX_CFG = """
[profile]
kind = box
H_re = 0.2
H_im = 0.0
L = 1.0
sigma = 1

[kgrid]
kmax = 12.0
n = 401

[rays]
xi_list = 0.25, 0.5

[run]
outdir = {out}
seed = 5
"""

GATE_FAIL_CFG = """
[profile]
kind = box
H_re = 1.5
H_im = 0.0
L = 1.0
sigma = 1

[rays]
xi_list = 0.25

[run]
outdir = {out}
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_scatter_writes_csv_and_passes_properties(tmp_path, capsys):
    cfg = _write(tmp_path, BOX_CFG.format(out=tmp_path / "out"))
    rc = cli.main(["scatter", "--config", str(cfg)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "properties: pass" in out
    body = (tmp_path / "out" / "spectral.csv").read_text()
    assert body.startswith("# config_sha256=")
    assert body.splitlines()[1] == "k,Re a1,Im a1,Re a2,Im a2,Re b,Im b"
    sidecar = json.loads((tmp_path / "out" / "spectral.json").read_text())
    assert sidecar["command"] == "scatter"
    assert "created_unix" in sidecar


def test_scatter_zero_profile_identity(tmp_path):
    sample = tmp_path / "zero.csv"
    x = np.linspace(-8, 8, 257)
    with open(sample, "w") as fh:
        fh.write("x,Re q,Im q\n")
        for xv in x:
            fh.write(f"{float(xv)!r},0.0,0.0\n")
    cfgtext = f"""
[profile]
kind = sampled
path = {sample}
sigma = 1

[kgrid]
kmax = 4.0
n = 41

[run]
outdir = {tmp_path / 'out'}
"""
    rc = cli.main(["scatter", "--config", str(_write(tmp_path, cfgtext))])
    assert rc == 0
    rows = [l for l in (tmp_path / "out" / "spectral.csv").read_text()
            .splitlines() if not l.startswith("#")][1:]
    a1_col = np.array([float(r.split(",")[1]) for r in rows])
    b_col = np.array([float(r.split(",")[5]) for r in rows])
    assert np.allclose(a1_col, 1.0, atol=1e-12)
    assert np.allclose(b_col, 0.0, atol=1e-12)


def test_malformed_sample_file_is_input_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,Re q,Im q\n0.0,zero,0.0\n")
    cfgtext = f"""
[profile]
kind = sampled
path = {bad}
sigma = 1

[run]
outdir = {tmp_path / 'out'}
"""
    rc = cli.main(["scatter", "--config", str(_write(tmp_path, cfgtext))])
    assert rc == 2


def test_unknown_key_is_input_error(tmp_path):
    cfgtext = BOX_CFG.format(out=tmp_path / "out") + "\n[kgrid]\n"
    rc = cli.main(["scatter", "--config",
                   str(_write(tmp_path, cfgtext))])
    assert rc == 2   # duplicate section


def test_rays_gate_refusal_and_override(tmp_path):
    cfg = _write(tmp_path, GATE_FAIL_CFG.format(out=tmp_path / "out"))
    rc = cli.main(["rays", "--config", str(cfg)])
    assert rc == 3
    assert not (tmp_path / "out" / "rays.csv").exists()
    rc = cli.main(["rays", "--config", str(cfg), "--override-gates"])
    assert rc == 0
    body = (tmp_path / "out" / "rays.csv").read_text()
    assert "# gates_overridden=true" in body
    sidecar = json.loads((tmp_path / "out" / "rays.json").read_text())
    assert sidecar["gates_overridden"] is True


def test_rays_outputs_im_nu_column(tmp_path):
    cfg = _write(tmp_path, BOX_CFG.format(out=tmp_path / "out"))
    assert cli.main(["rays", "--config", str(cfg)]) == 0
    lines = [l for l in (tmp_path / "out" / "rays.csv").read_text()
             .splitlines() if not l.startswith("#")]
    assert lines[0].split(",")[:5] == ["xi", "Re nu", "Im nu", "Re chi",
                                       "Im chi"]
    # box with a2 = 1: Im nu(-xi) = arg a1(-xi) / (2 pi)
    from nonlocal_nls import scattering as sc
    for row in lines[1:]:
        vals = row.split(",")
        xi, im_nu = float(vals[0]), float(vals[2])
        a1 = sc.box_spectral(0.2, 1.0, 1, -xi)[0]
        assert abs(im_nu - np.angle(a1) / (2 * np.pi)) < 1e-9


def test_gates_command_reports(tmp_path, capsys):
    cfg = _write(tmp_path, BOX_CFG.format(out=tmp_path / "out"))
    assert cli.main(["gates", "--config", str(cfg)]) == 0
    assert "gates: pass" in capsys.readouterr().out
    rep = json.loads((tmp_path / "out" / "gates.json").read_text())
    assert rep["gates"]["zeros_a1"] == 0
    assert rep["gates"]["arg_ok"] is True


def test_reruns_byte_identical(tmp_path):
    cfg = _write(tmp_path, BOX_CFG.format(out=tmp_path / "out1"))
    assert cli.main(["rays", "--config", str(cfg)]) == 0
    first = (tmp_path / "out1" / "rays.csv").read_bytes()
    assert cli.main(["rays", "--config", str(cfg),
                     "--out", str(tmp_path / "out2")]) == 0
    second = (tmp_path / "out2" / "rays.csv").read_bytes()
    assert first == second


def test_evolve_manifest(tmp_path):
    cfgtext = """
[profile]
kind = box
H_re = 0.2
H_im = 0.0
L = 1.0
sigma = 1

[evolve]
dt = 0.001
T = 0.05
X = 64.0
N = 1024
boundary_tol = 0.001
snapshot_times = 0.025

[run]
outdir = {out}
""".format(out=tmp_path / "out")
    rc = cli.main(["evolve", "--config", str(_write(tmp_path, cfgtext))])
    assert rc == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert len(manifest["snapshots"]) == 3     # 0, 0.025, 0.05
    snap = manifest["snapshots"][1]
    assert (tmp_path / "out" / snap["csv"]).exists()
    side = json.loads((tmp_path / "out" / snap["sidecar"]).read_text())
    assert side["t"] == 0.025
    assert side["config"]["N"] == 1024


def test_model_verify_command(tmp_path):
    cfg = _write(tmp_path, BOX_CFG.format(out=tmp_path / "out"))
    assert cli.main(["model-verify", "--config", str(cfg),
                     "--threads", "2"]) == 0
    rep = json.loads((tmp_path / "out" / "model_verify.json").read_text())
    for _, r in rep["reports"].items():
        assert r["jump_residual_max"] <= 1e-8
        assert r["beta_gamma_product_error"] <= 1e-10


def test_compare_numerical_failure_exit_code(tmp_path):
    # an undersized cell trips the boundary detector -> exit 4
    cfgtext = """
[profile]
kind = box
H_re = 0.2
H_im = 0.0
L = 1.0
sigma = 1

[rays]
xi_list = 0.25

[evolve]
dt = 0.001
T = 10.0
X = 24.0
N = 512
boundary_tol = 1e-6

[compare]
t_min = 2.0
t_max = 10.0
n_probe = 5

[run]
outdir = {out}
""".format(out=tmp_path / "out")
    rc = cli.main(["compare", "--config", str(_write(tmp_path, cfgtext))])
    assert rc == 4


def test_parse_config_strictness():
    with pytest.raises(ConfigError):
        parse_config("[nosuch]\nx = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[profile]\nkind = torus\nsigma = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[profile]\nkind = box\nH_re = 1\nL = 1\nsigma = 3\n")
    cfg = parse_config(
        "[profile]\nkind = box\nH_re = 1\nL = 1\nsigma = 1\n")
    assert cfg.config_hash
    assert cfg.kn == 2001 and cfg.kmax == 12.0
