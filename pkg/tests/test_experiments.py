import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from schwinger_qlm.cli import main
from schwinger_qlm.experiments import (
    ConfigError,
    EXPERIMENTS,
    ExperimentConfig,
    expand_named_state,
    parse_config_text,
    run_experiment,
)


BASE_8 = """
# small-chain smoke configuration
experiment = {exp}
L = 8
tau = 0.1
T = 1
M = 6
K = 3
seed = 7
initial_state = vacuum
output_dir = {out}
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_manifest(outdir):
    with open(os.path.join(outdir, "manifest.json")) as fh:
        return json.load(fh)


def test_parse_defaults_and_comments():
    cfg = parse_config_text("experiment = basis-report  # trailing comment\n\n# blank\nL = 8\n")
    assert cfg.experiment == "basis-report"
    assert cfg.length == 8
    assert cfg.tau == 0.1
    assert cfg.total_time == 10.0
    assert cfg.n_runs == 1000
    assert cfg.group_size == 100
    assert cfg.n_steps == 100
    assert cfg.magnetization_site == 5


def test_parse_rejects_bad_input():
    with pytest.raises(ConfigError, match="experiment"):
        parse_config_text("L = 8\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("experiment = basis-report\nfoo = 1\n")
    with pytest.raises(ConfigError, match="integer"):
        parse_config_text("experiment = basis-report\nL = eight\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("experiment basis-report\n")


def test_validation_errors():
    with pytest.raises(ConfigError, match="unknown experiment"):
        parse_config_text("experiment = spectral-flow\n")
    with pytest.raises(ConfigError, match="even"):
        parse_config_text("experiment = basis-report\nL = 9\n")
    with pytest.raises(ConfigError, match="integer step count"):
        parse_config_text("experiment = sequential-vs-exact\ntau = 0.3\nT = 1\n")
    with pytest.raises(ConfigError, match="does not divide"):
        parse_config_text("experiment = random-ensemble\nM = 10\nK = 3\n")
    with pytest.raises(ConfigError, match="odd matter site"):
        parse_config_text("experiment = scar-spectrum\nsite = 22\n")
    with pytest.raises(ConfigError, match="gate_order"):
        parse_config_text("experiment = basis-report\ngate_order = reversed\n")
    with pytest.raises(ConfigError, match="L = 40"):
        parse_config_text("experiment = sequential-vs-exact\nL = 8\ninitial_state = phi1\n")
    with pytest.raises(ConfigError, match="odd"):
        parse_config_text("experiment = sequential-vs-exact\nL = 8\ninitial_state = 2,4\n")
    with pytest.raises(ConfigError, match="neither a known name"):
        parse_config_text("experiment = sequential-vs-exact\ninitial_state = bogus\n")


def test_expand_named_state():
    assert expand_named_state("vacuum", 8) == frozenset()
    assert expand_named_state("fully-filled", 8) == frozenset({1, 3, 5, 7})
    assert expand_named_state("phi1", 40) == frozenset({1, 3})
    assert expand_named_state("phi2", 40) == frozenset({1, 19})
    assert expand_named_state("phi3", 40) == frozenset({1, 3, 5, 7})
    phi4 = expand_named_state("phi4", 40)
    assert len(phi4) == 18 and 1 not in phi4 and 3 not in phi4
    with pytest.raises(ConfigError):
        expand_named_state("phi2", 8)


def test_basis_report(tmp_path):
    out = tmp_path / "out"
    cfg = ExperimentConfig(experiment="basis-report", length=8, output_dir=str(out))
    manifest = run_experiment(cfg)
    assert manifest["dim_full"] == 7
    assert manifest["dim_zero_momentum"] == 3
    assert manifest["dim_formula"] == 7
    text = (out / "basis.txt").read_text().splitlines()
    assert text[0] == "# L=8 dim=7"
    assert len(text) == 8
    for entry in manifest["outputs"]:
        digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]


def test_reruns_are_byte_identical(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        cfg = ExperimentConfig(experiment="scar-spectrum", length=8, output_dir=str(out))
        run_experiment(cfg, config_text="x")
    for name in ("spectrum.csv", "scars.csv", "thermal.csv", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_scar_spectrum_small(tmp_path):
    out = tmp_path / "out"
    cfg = ExperimentConfig(experiment="scar-spectrum", length=12, output_dir=str(out))
    manifest = run_experiment(cfg)
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "n,energy,entropy_nats,vacuum_overlap,sigma_z_21"
    assert len(lines) == 1 + 5  # header + sector dimension at L=12
    scars = (out / "scars.csv").read_text().splitlines()
    assert scars[0] == "n,energy,overlap,entropy,is_scar,runnerup_overlap"
    thermal = (out / "thermal.csv").read_text().splitlines()
    assert thermal[0] == "ensemble,state,beta,sigma_z_thermal"
    assert len(thermal) == 5
    assert "thermal" in manifest and "vacuum" in manifest["thermal"]


def test_sequential_vs_exact_small(tmp_path):
    out = tmp_path / "out"
    cfg = ExperimentConfig(experiment="sequential-vs-exact", length=8, total_time=1.0,
                           output_dir=str(out))
    manifest = run_experiment(cfg)
    stats = (out / "statistics.csv").read_text().splitlines()
    assert stats[0] == "group,delta_sigma_z,delta_loschmidt"
    assert len(stats) == 2
    row = stats[1].split(",")
    assert row[0] == "0"
    assert float(row[1]) >= 0.0 and float(row[2]) >= 0.0
    assert manifest["delta_sigma_z"] == float(row[1])
    for name in ("trajectory_sequential.csv", "trajectory_exact.csv"):
        lines = (out / name).read_text().splitlines()
        assert lines[0] == "step,time,loschmidt,sigma_z_21,entropy_nats,norm"
        assert len(lines) == 12  # header + 11 steps
        first = lines[1].split(",")
        assert float(first[2]) == pytest.approx(1.0, abs=1e-12)
        assert float(first[5]) == pytest.approx(1.0, abs=1e-12)


def test_random_ensemble_small(tmp_path):
    out = tmp_path / "out"
    cfg = ExperimentConfig(experiment="random-ensemble", length=8, total_time=0.5,
                           n_runs=6, group_size=3, seed=11, output_dir=str(out))
    manifest = run_experiment(cfg)
    stats = (out / "statistics.csv").read_text().splitlines()
    assert len(stats) == 3  # header + M/K rows
    dev = (out / "deviation_evolution.csv").read_text().splitlines()
    assert dev[0] == "step,time,delta_loschmidt,delta_sigma_z"
    assert len(dev) == 1 + 5 * 4 + 1
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("state,scar_projection,delta_loschmidt_mean")
    assert summary[1].split(",")[0] == "vacuum"
    assert manifest["n_groups"] == 2
    assert 0.0 <= manifest["scar_projection"] <= 1.0
    assert manifest["params"]["M"] == 6
    assert manifest["schedule_kind"] == "random"


@pytest.mark.parametrize("experiment", ["entropy-evolution", "magnetization-evolution",
                                        "loschmidt-evolution"])
def test_trajectory_experiments(tmp_path, experiment):
    out = tmp_path / experiment
    cfg = ExperimentConfig(experiment=experiment, length=8, total_time=1.0,
                           output_dir=str(out))
    run_experiment(cfg)
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "step,time,loschmidt,sigma_z_21,entropy_nats,norm"
    assert len(lines) == 12


def test_impossible_occupation_fails_before_output(tmp_path):
    out = tmp_path / "out"
    cfg = ExperimentConfig(experiment="sequential-vs-exact", length=8, total_time=1.0,
                           initial_state="1", output_dir=str(out))
    from schwinger_qlm.experiments import ExperimentError
    with pytest.raises(ExperimentError, match="site 8"):
        run_experiment(cfg)
    assert not (out / "statistics.csv").exists()
    assert not (out / "manifest.json").exists()


def test_cli_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    printed = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in printed


def test_cli_validate(tmp_path, capsys):
    path = write_config(tmp_path, BASE_8.format(exp="basis-report", out=tmp_path / "o"))
    assert main(["validate", str(path)]) == 0
    assert "OK: basis-report" in capsys.readouterr().out
    bad = write_config(tmp_path, "experiment = nope\n", name="bad.cfg")
    assert main(["validate", str(bad)]) == 1
    assert "unknown experiment" in capsys.readouterr().err


def test_cli_run_and_malformed_config(tmp_path, capsys):
    out = tmp_path / "o"
    path = write_config(tmp_path, BASE_8.format(exp="basis-report", out=out))
    assert main(["run", str(path)]) == 0
    assert (out / "manifest.json").exists()
    capsys.readouterr()

    broken_out = tmp_path / "never"
    broken = write_config(
        tmp_path, f"experiment = sequential-vs-exact\ntau = 0.3\nT = 1\noutput_dir = {broken_out}\n",
        name="broken.cfg")
    assert main(["run", str(broken)]) == 1
    assert "integer step count" in capsys.readouterr().err
    assert not broken_out.exists()

    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_cli_manifest_digest_of_config(tmp_path):
    out = tmp_path / "o"
    path = write_config(tmp_path, BASE_8.format(exp="basis-report", out=out))
    assert main(["run", str(path)]) == 0
    manifest = read_manifest(out)
    assert manifest["config_sha256"] == hashlib.sha256(path.read_bytes()).hexdigest()
    assert manifest["version"]
    assert manifest["numpy_version"] == np.__version__


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "schwinger_qlm.cli", "list-experiments"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "basis-report" in proc.stdout


def test_worker_env_override_is_deterministic(tmp_path, monkeypatch):
    from schwinger_qlm.experiments import WORKERS_ENV

    outputs = {}
    for label, workers in (("serial", "1"), ("parallel", "2")):
        monkeypatch.setenv(WORKERS_ENV, workers)
        out = tmp_path / label
        cfg = ExperimentConfig(experiment="random-ensemble", length=8, total_time=0.5,
                               n_runs=4, group_size=2, seed=21, output_dir=str(out))
        run_experiment(cfg)
        outputs[label] = (out / "statistics.csv").read_bytes()
    assert outputs["serial"] == outputs["parallel"]


def test_worker_env_rejects_garbage(tmp_path, monkeypatch):
    from schwinger_qlm.experiments import WORKERS_ENV, ExperimentError

    monkeypatch.setenv(WORKERS_ENV, "two")
    cfg = ExperimentConfig(experiment="random-ensemble", length=8, total_time=0.5,
                           n_runs=4, group_size=2, output_dir=str(tmp_path / "x"))
    with pytest.raises(ExperimentError, match=WORKERS_ENV):
        run_experiment(cfg)
