import json
from pathlib import Path

import numpy as np
import pytest

from centralspin.cli import main
from centralspin.experiments import SCHEMA_VERSION, SCHEMAS, read_csv

GOLDEN = Path(__file__).parent / "golden"
TINY = [
    "--omega0", "2.5", "--omega", "2", "--epsilon", "0.7", "--n-spins", "3", "--temperature", "1.5",
    "--t-max", "4", "--n-samples", "5", "--beta-min", "0.1", "--beta-max", "10",
    "--initial-state", "superposition", "--c0", "0.6", "--c1", "0.8j",
]


@pytest.mark.parametrize("command", ["dynamics", "thermo", "hmf", "canonical", "ergotropy"])
def test_golden_tables(command, tmp_path):
    assert main([command, *TINY, "-o", str(tmp_path)]) == 0
    out = tmp_path / f"{command}.csv"
    gold = GOLDEN / f"{command}.csv"
    assert out.read_text().splitlines()[0] == gold.read_text().splitlines()[0]
    assert list(read_csv(out)) == SCHEMAS[command]
    got, ref = read_csv(out), read_csv(gold)
    for name in ref:
        np.testing.assert_allclose(got[name], ref[name], rtol=1e-11, atol=1e-13, equal_nan=True, err_msg=name)
    meta = json.loads((tmp_path / f"{command}.json").read_text())
    assert meta["schema_version"] == SCHEMA_VERSION
    assert meta["files"][f"{command}.csv"] == SCHEMAS[command]
    assert meta["config"]["params"]["n_spins"] == 3
    assert meta["wall_time_s"] >= 0 and "version" in meta


def test_output_is_bit_identical_across_runs_and_workers(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["thermo", *TINY, "-o", str(a)]) == 0
    assert main(["thermo", *TINY, "-o", str(b), "--workers", "3"]) == 0
    assert (a / "thermo.csv").read_bytes() == (b / "thermo.csv").read_bytes()


def test_csv_has_full_precision(tmp_path):
    main(["dynamics", *TINY, "-o", str(tmp_path)])
    row = (tmp_path / "dynamics.csv").read_text().splitlines()[2].split(",")
    assert float(row[0]) == 1.0
    assert any(len(v.replace("-", "").replace(".", "").split("e")[0]) >= 16 for v in row[1:])


def test_run_fig3_columns(tmp_path):
    assert main(["run", "fig3", "--n-samples", "21", "-o", str(tmp_path)]) == 0
    cols = read_csv(tmp_path / "fig3.csv")
    assert list(cols)[:4] == ["t", "Sigma", "Sigma_finite", "T_fit"]
    assert np.all(cols["Sigma_finite"] <= cols["Sigma"] + 1e-10)


def test_run_fig2_writes_four_tables(tmp_path):
    assert main(["run", "fig2", "--n-spins", "6", "--n-samples", "11", "-o", str(tmp_path)]) == 0
    for q in ("dU_S", "Q_B", "W", "Sigma"):
        cols = read_csv(tmp_path / f"fig2_{q}.csv")
        assert list(cols) == ["t", "eps_0.0975", "eps_0.1", "eps_0.5", "eps_1"]


@pytest.mark.parametrize("preset", ["fig1", "fig4", "fig5", "fig7"])
def test_small_presets(preset, tmp_path):
    args = ["run", preset, "--n-samples", "11", "-o", str(tmp_path)]
    if preset == "fig1":
        args += ["--n-spins-list", "10", "20"]
    assert main(args) == 0
    meta = json.loads((tmp_path / f"run_{preset}.json").read_text())
    assert meta["files"]


def test_fig6_records_gaps(tmp_path):
    assert main(["run", "fig6", "--n-spins", "8", "--t-max", "6", "--n-samples", "13", "-o", str(tmp_path)]) == 0
    notes = json.loads((tmp_path / "run_fig6.json").read_text())["notes"]
    assert notes["fig6_heisenberg_ground_picture_gap"] < 1e-10
    assert notes["fig6_heisenberg_ground_canonical_gap"] > 1e-9


def test_custom_reduced_only_large_n(tmp_path):
    args = ["run", "custom", "--omega0", "2.5", "--omega", "2", "--epsilon", "0.2", "--n-spins", "100000",
            "--temperature", "1", "--n-samples", "50", "--reduced-only", "-o", str(tmp_path)]
    assert main(args) == 0
    cols = read_csv(tmp_path / "dynamics.csv")
    assert np.all(np.isnan(cols["delta_re"]))
    assert not (tmp_path / "thermo.csv").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('preset = "fig3"\n[params]\nn_spins = 4\n[grid]\nn_samples = 7\n')
    assert main(["run", "fig3", "--config", str(cfg), "--n-samples", "9", "-o", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "run_fig3.json").read_text())
    assert meta["config"]["params"]["n_spins"] == 4
    assert meta["config"]["grid"]["n_samples"] == 9


@pytest.mark.parametrize(
    "args",
    [
        ["thermo", "--omega0", "1"],
        ["run", "fig2", "--t-max", "-1"],
        ["run", "custom"],
        ["dynamics", *TINY[:-2], "--c1", "0.3"],
    ],
)
def test_config_errors_exit_2(args, tmp_path, capsys):
    assert main([*args, "-o", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_config_file_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[params]\nomega0 = 1\nomga = 2\n")
    assert main(["run", "fig2", "--config", str(cfg)]) == 2
    assert "bad.toml:3" in capsys.readouterr().err


def test_preset_mismatch_exit_2(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('preset = "fig4"\n')
    assert main(["run", "fig2", "--config", str(cfg)]) == 2


def test_numerical_guard_exit_3(tmp_path, capsys):
    args = ["thermo", *TINY, "--n-spins", "500", "--max-spins", "100", "-o", str(tmp_path)]
    assert main(args) == 3
    assert "DimensionTooLarge" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "fig9"])
    assert exc.value.code == 2


def test_verify_subset(capsys):
    assert main(["verify", "--only", "2", "6"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] criterion  2" in out and "[PASS] criterion  6" in out
