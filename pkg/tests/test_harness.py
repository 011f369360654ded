import json
import math

import pytest
from hypothesis import given, strategies as st

from entangle_ks.harness import PRESETS, ConfigError, ExperimentConfig, apply_overrides, preset, run
from entangle_ks.harness.analysis import agreement_time, cloud_diameter, ehrenfest_time, occupied_fraction
from entangle_ks.harness.cli import main
from entangle_ks.harness.run import build_id

SMALL = ["n_traj=2000", "n_centers=2", "grid=[200, 200]", "lyapunov_steps=2000", "lyapunov_transient=10"]


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return meta, body[0].split(","), [list(map(float, r.split(","))) for r in body[1:]]


@given(
    st.sampled_from(["poincare", "quantum", "classical", "gaussian", "lyapunov", "compare"]),
    st.floats(0, 10), st.floats(0, 10),
    st.lists(st.sampled_from([0.5, 2, 25, 50.5]), min_size=1, max_size=3),
    st.one_of(st.none(), st.floats(1e-6, 1)),
    st.integers(1, 100), st.integers(0, 2**32),
)
def test_config_round_trip(mode, a, c, j, hbar_c, n_steps, seed):
    cfg = ExperimentConfig(mode=mode, a=a, c=c, j=j, hbar_c=hbar_c, n_steps=n_steps, seed=seed).validate()
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("override", [
    "mode=fly", "a=NaN", "j=[0.3]", "j=[]", "hbar_c=-1", "n_steps=0", "n_traj=10", "grid=[10]",
    "average_mode=median", "fit_kind=cubic", "fit_window=[5, 1]", "initial=[1, 2]", "seed=-1", "section_tol=0",
])
def test_invalid_configs_rejected(override):
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), [override]).validate()


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"alpha": 1})
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), ["nope=1"])
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), ["missing-equals"])


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_validate(name):
    cfg = preset(name).validate()
    assert cfg.preset == name
    with pytest.raises(ConfigError):
        preset("fig9")


def test_presets_are_not_shared():
    a = preset("fig2a")
    a.j.append(400)
    assert preset("fig2a").j == [50, 100]


def test_scalar_j_is_promoted():
    assert apply_overrides(ExperimentConfig(), ["j=25"]).j == [25]


def test_hbar_defaults_to_inverse_spin():
    assert ExperimentConfig(j=[25]).hbar_for(25) == 1 / 25
    assert ExperimentConfig(hbar_c=1e-3).hbar_for(25) == 1e-3


def test_cli_poincare_and_self_describing_output(tmp_path, capsys):
    assert main(["poincare", "--preset", "fig1b", "--set", "n_steps=2000", "--out", str(tmp_path)]) == 0
    meta, cols, rows = read_csv(tmp_path / "section.csv")
    cfg = json.loads(meta[0].removeprefix("# config: "))
    assert cfg["c"] == 0.5 and cfg["n_steps"] == 2000 and cfg["mode"] == "poincare"
    assert meta[1] == f"# build: {build_id()}"
    assert cols == ["theta1", "phi1", "theta2"] and len(rows) > 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["n_points"] == len(rows) and summary["config"] == cfg
    assert json.loads(capsys.readouterr().out)["files"] == ["section.csv", "summary.json"]


def test_empty_section_gives_valid_csv(tmp_path):
    assert main(["poincare", "--set", "n_steps=5", "--set", "section_tol=1e-12",
                 "--set", "initial=[1.0, 0.0, 1.0, 1.0]", "--out", str(tmp_path)]) == 0
    meta, cols, rows = read_csv(tmp_path / "section.csv")
    assert len(meta) == 2 and cols == ["theta1", "phi1", "theta2"] and rows == []


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "lyapunov", "c": 5.0, "lyapunov_steps": 3000}))
    out = tmp_path / "o"
    assert main(["lyapunov", "--config", str(cfg), "--set", "lyapunov_transient=0", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["c"] == 5.0 and summary["config"]["lyapunov_transient"] == 0
    _, cols, rows = read_csv(out / "lyapunov.csv")
    assert cols == ["block", "l1", "l2", "l3", "l4"] and len(rows) == 20


def test_mode_conflict_is_reported(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "lyapunov"}))
    assert main(["quantum", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and "conflicts" in err["message"]


def test_compare_mode_columns(tmp_path):
    args = ["compare", "--set", "j=[6, 12]", "--set", "n_steps=5", "--out", str(tmp_path)]
    for s in SMALL:
        args += ["--set", s]
    assert main(args) == 0
    for j in (6, 12):
        meta, cols, rows = read_csv(tmp_path / f"compare_j{j}.csv")
        assert cols == ["t", "S_q", "S_cl", "ks_line", "lambda1_line"]
        assert len(rows) == 6 and rows[0][1] == 0.0 and rows[0][2] == 0.0
    summary = json.loads((tmp_path / "summary.json").read_text())
    s6 = summary["series"]["6"]
    assert {"fit_quantum", "fit_classical", "ehrenfest_time", "agreement_time", "max_difference"} <= set(s6)
    assert summary["lyapunov"]["ks_entropy"] > 0


@pytest.mark.parametrize("mode,files", [("quantum", ["quantum_j8.csv"]), ("classical", ["classical_j8.csv"]),
                                        ("gaussian", ["gaussian.csv"])])
def test_other_modes_write_files(tmp_path, mode, files):
    args = [mode, "--set", "j=[8]", "--set", "n_steps=4", "--out", str(tmp_path)] + sum((["--set", s] for s in SMALL), [])
    assert main(args) == 0
    for f in files:
        _, cols, rows = read_csv(tmp_path / f)
        assert len(rows) == 5


def test_runs_are_deterministic(tmp_path):
    cfg = apply_overrides(preset("fig2a"), ["j=[6]", "n_steps=4"] + SMALL)
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    for name in ("compare_j6.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes().replace(b"/a", b"") == (tmp_path / "b" / name).read_bytes().replace(b"/b", b"")


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["quantum", "--set", "j=0.3", "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and "j" in err["message"]
    assert main(["quantum", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["quantum", "--config", str(tmp_path / "bad.json")]) == 2


def test_unwritable_output_reports_path(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["poincare", "--set", "n_steps=10", "--out", str(blocker / "sub")]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "io" and str(blocker) in err["message"]


def test_analysis_helpers():
    assert math.isinf(ehrenfest_time(0.01, 0.0))
    assert math.isclose(ehrenfest_time(0.01, 0.5), math.log(100) / 0.5)
    t = [0, 1, 2, 3, 4]
    assert agreement_time(t, [0, 1, 2, 3, 4], [0, 1.1, 2.2, 3.5, 4]) == 2
    assert agreement_time(t, [0, 1, 2, 3, 4], [0, 1, 2, 3, 4]) == 4
    assert occupied_fraction([]) == 0.0
    assert occupied_fraction([[0.1, 0.1, 0.1], [0.1, 0.1, 0.1], [3.0, 6.0, 3.0]], bins=10) == 2 / 1000


def test_cloud_diameter_of_a_point_cloud():
    import numpy as np
    from entangle_ks.ensemble import Ensemble

    S = np.tile([0.0, 0.0, 1.0], (100, 1))
    L = np.tile([1.0, 0.0, 0.0], (100, 1))
    center = np.r_[S[0], L[0]]
    assert cloud_diameter(Ensemble(S, L), center) == 0.0
    S2 = S.copy()
    S2[:, 0] = 0.1
    assert np.isclose(cloud_diameter(Ensemble(S2, L), center), 0.2)
