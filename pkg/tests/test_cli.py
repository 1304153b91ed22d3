import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from cavityteleport import analytic, cli


def run(tmp_path, *args, name="out"):
    """Run the CLI in-process with JSON output; returns (status, columns, config)."""
    out = tmp_path / f"{name}.json"
    status = cli.main([*args, "--format", "json", "--out", str(out)])
    if not out.exists():
        return status, None, None
    doc = json.loads(out.read_text())
    return status, {k: np.asarray(v) for k, v in doc["columns"].items()}, doc["config"]


def cell(cols, **match):
    mask = np.ones(len(next(iter(cols.values()))), dtype=bool)
    for key, val in match.items():
        mask &= np.isclose(cols[key], val, atol=1e-12)
    assert mask.sum() == 1, match
    return int(np.flatnonzero(mask)[0])


@pytest.mark.parametrize("args", [
    ["fig2", "--grid", "5"],
    ["fig3", "--grid", "7", "--k", "0", "--k", "2"],
    ["fig5", "--grid", "6"],
    ["fig6", "--grid", "6"],
    ["sweep", "--grid", "4"],
])
def test_output_is_deterministic(tmp_path, args):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main([*args, "--out", str(a)]) == 0
    assert cli.main([*args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("args", [
    ["fig2", "--grid", "5"],
    ["fig3", "--grid", "9", "--k", "0", "--k", "1"],
    ["fig5", "--grid", "9"],
    ["fig6", "--grid", "9"],
    ["sweep", "--grid", "5"],
    ["threshold", "--k", "0", "--k", "2"],
])
def test_oracle_mode_agrees_per_cell(tmp_path, args):
    _, exact, _ = run(tmp_path, *args, name="exact")
    _, rk4, cfg = run(tmp_path, *args, "--oracle", name="rk4")
    assert cfg["oracle"] is True
    for key in exact:
        np.testing.assert_allclose(rk4[key], exact[key], atol=1e-6, rtol=0, err_msg=key)


def test_csv_layout(tmp_path):
    out = tmp_path / "f.csv"
    assert cli.main(["fig6", "--grid", "3", "--gamma-ratio", "0.2", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().split("\n")
    assert lines[0].startswith("# config: ")
    assert json.loads(lines[0][len("# config: "):])["gamma_ratio"] == [0.2]
    rows = list(csv.reader(lines[1:-1]))
    assert rows[0] == ["gamma_over_omega", "omega_t", "concurrence"]
    assert rows[1][0] == "0.20000000000000001"
    _, cols, _ = run(tmp_path, "fig6", "--grid", "3", "--gamma-ratio", "0.2")
    # 17 significant digits round-trip exactly
    assert [float(r[2]) for r in rows[1:]] == list(cols["concurrence"])


def test_fig2_probabilities(tmp_path):
    _, cols, cfg = run(tmp_path, "fig2", "--grid", "7")
    assert cfg["t_max"] == pytest.approx(3 * np.pi)
    lossy = cols["gamma_over_lambda"] == 0.1
    np.testing.assert_allclose(cols["p_gg"][lossy], 0.848164, atol=1e-6)
    np.testing.assert_array_equal(cols["p_gg"][cols["gamma_over_lambda"] == 0.0], 0.0)
    # 3 pi (lambda / delta) = pi / 4: equal detection probabilities
    _, cols, _ = run(tmp_path, "fig2", "--grid", "1", "--ld-min", str(1 / 12), "--ld-max", str(1 / 12),
                     "--gamma-ratio", "0", name="cross")
    assert cols["p_eg"][0] == pytest.approx(0.5, abs=1e-12)
    assert cols["p_ge"][0] == pytest.approx(0.5, abs=1e-12)


def test_fig2_full_model_close_to_effective(tmp_path):
    args = ["fig2", "--grid", "2", "--ld-min", "0.05", "--ld-max", "0.1", "--gamma-ratio", "0"]
    _, eff, _ = run(tmp_path, *args, name="eff")
    _, full, cfg = run(tmp_path, *args, "--full-model", name="full")
    assert cfg["full_model"] is True and cfg["dt"] == cli.FULL_MODEL_DT
    np.testing.assert_allclose(full["p_eg"], eff["p_eg"], atol=0.05)


def test_fig3_amplitudes(tmp_path):
    _, cols, _ = run(tmp_path, "fig3", "--grid", "5")
    for g, amp in [(0.0, 1.0), (0.2, 0.7304027), (0.4, 0.533488)]:
        beta = cols["beta"][cols["gamma_over_omega"] == g]
        assert np.max(np.abs(beta)) == pytest.approx(amp, abs=1e-6)


def test_fig5_values(tmp_path):
    g = analytic.gamma_max(0, 1.0)
    _, cols, _ = run(tmp_path, "fig5", "--grid", "5", "--t-max", str(np.pi), "--gamma-ratio", "0",
                     "--gamma-ratio", str(g), "--gamma-ratio", "0.3")
    assert cols["fmax"][cell(cols, omega_t=np.pi / 4, gamma_over_omega=0.0)] == pytest.approx(1.0)
    assert cols["fmax"][cell(cols, omega_t=np.pi / 4, gamma_over_omega=g)] == pytest.approx(2 / 3, abs=1e-6)
    for gg in (0.0, g, 0.3):
        assert cols["fmax"][cell(cols, omega_t=0.0, gamma_over_omega=gg)] == pytest.approx(2 / 3, abs=1e-12)


def _peaks(cols):
    f, t = cols["fmax"], cols["omega_t"]
    return t[1:-1][(f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:])]


def test_fig5_local_maxima_at_interaction_times(tmp_path):
    step = 2 * np.pi / 800
    _, cols, _ = run(tmp_path, "fig5", "--grid", "801", "--t-max", str(2 * np.pi), "--gamma-ratio", "0")
    np.testing.assert_allclose(_peaks(cols), (2 * np.arange(4) + 1) * np.pi / 4, atol=step)
    # once less than half the population survives the peaks sit exactly at t_k
    _, cols, _ = run(tmp_path, "fig5", "--grid", "801", "--t-max", str(2 * np.pi), "--gamma-ratio", "0.5",
                     name="late")
    peaks = _peaks(cols)
    late = peaks[peaks > np.log(2) / (2 * 0.5)]
    np.testing.assert_allclose(late, (2 * np.arange(4) + 1) * np.pi / 4, atol=step)


def test_fig5_early_maxima_shift_with_decay(tmp_path):
    # while more than half survives, dF/dt = 0 where sgn(s) cos(2wt) = (g/w)(1 + |s|), s = sin(2wt)
    from scipy.optimize import brentq
    g = 0.05
    step = 2 * np.pi / 800
    _, cols, _ = run(tmp_path, "fig5", "--grid", "801", "--t-max", str(2 * np.pi), "--gamma-ratio", str(g))
    for k, peak in enumerate(_peaks(cols)):
        tk = (2 * k + 1) * np.pi / 4
        root = brentq(lambda t: np.sign(np.sin(2 * t)) * np.cos(2 * t) - g * (1 + abs(np.sin(2 * t))), tk - 0.3, tk)
        assert peak == pytest.approx(root, abs=step)
        assert tk - peak > 0.03


def test_fig6_values_and_bound_entanglement_region(tmp_path):
    _, cols, _ = run(tmp_path, "fig6", "--grid", "5", "--t-max", str(np.pi), "--gamma-ratio", "0",
                     "--gamma-ratio", "0.2")
    assert cols["concurrence"][cell(cols, omega_t=np.pi / 4, gamma_over_omega=0.0)] == pytest.approx(1.0)
    assert cols["concurrence"][cell(cols, omega_t=np.pi / 4, gamma_over_omega=0.2)] == pytest.approx(
        0.7304027, abs=1e-6)
    grid = ["--grid", "41", "--gamma-max", "1.0"]
    _, conc, _ = run(tmp_path, "fig6", *grid, name="c")
    _, fid, _ = run(tmp_path, "fig5", *grid, name="f")
    region = (conc["concurrence"] > 1e-6) & (fid["fmax"] <= 2 / 3 + 1e-9)
    assert region.any()


def test_threshold_rows(tmp_path):
    _, cols, _ = run(tmp_path, "threshold")
    np.testing.assert_array_equal(cols["k"], [0, 1, 2, 3, 4])
    np.testing.assert_allclose(cols["gamma_max_over_omega"][:2], [0.441271, 0.147090], atol=1e-6)
    np.testing.assert_allclose(cols["omega_t_k"], (2 * np.arange(5) + 1) * np.pi / 4)
    assert np.all(cols["relative_error"] < 1e-6)


def test_sweep_has_every_report_field(tmp_path):
    _, cols, _ = run(tmp_path, "sweep", "--grid", "3", "--gamma-ratio", "0.1")
    for key in ("p_eg", "p_ge", "p_gg", "p_ee", "bell_amplitude", "bell_phase", "concurrence", "fmax",
                "epr_fidelity", "purity", "average_fidelity"):
        assert len(cols[key]) == 3


def test_config_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"grid": 3, "gamma_ratio": [0.4], "t_max": 1.0}))
    _, cols, cfg = run(tmp_path, "fig5", "--config", str(conf), "--grid", "4")
    assert cfg["grid"] == 4
    assert cfg["gamma_ratio"] == [0.4]
    assert cfg["t_max"] == 1.0
    assert len(cols["fmax"]) == 4
    _, _, cfg = run(tmp_path, "fig5", "--grid", "2", name="plain")
    assert cfg["gamma_ratio"] is None and cfg["gamma_max"] == 1.0


@pytest.mark.parametrize("content", ['{"grids": 3}', "not json", "[1, 2]", '{"grid": 0}', '{"gamma_ratio": []}'])
def test_bad_config_file_exits_2(tmp_path, content):
    conf = tmp_path / "c.json"
    conf.write_text(content)
    status, cols, _ = run(tmp_path, "fig5", "--config", str(conf))
    assert status == 2 and cols is None


@pytest.mark.parametrize("args", [
    ["fig2", "--ld-max", "0.5"],
    ["fig3", "--gamma-ratio", "-0.1"],
    ["fig5", "--grid", "0"],
    ["threshold", "--k", "-1"],
    ["fig5", "--dt", "0"],
])
def test_invalid_values_exit_2(tmp_path, args):
    assert run(tmp_path, *args)[0] == 2


def test_missing_output_directory_exits_2(tmp_path):
    assert cli.main(["fig3", "--out", str(tmp_path / "nowhere" / "x.csv")]) == 2


def test_verify_only_dispersive(tmp_path):
    status, cols, cfg = run(tmp_path, "verify", "--only", "dispersive")
    assert cfg == {"command": "verify", "only": ["dispersive"]}
    assert set(cols["group"]) == {"dispersive"}
    assert status == (0 if cols["passed"].all() else 1)


def test_verify_report_lists_value_expected_tolerance(tmp_path):
    status, cols, _ = run(tmp_path, "verify", "--only", "probabilities", "--only", "bell")
    assert status == 0
    assert {"name", "value", "expected", "tolerance", "passed"} <= set(cols)
    assert cols["passed"].all()


def test_verify_default_run_passes(tmp_path):
    status, cols, _ = run(tmp_path, "verify")
    failed = list(cols["name"][~cols["passed"]])
    assert status == 0, f"failing checks: {failed}"


def test_verify_catches_gamma_convention_bug(tmp_path, monkeypatch):
    original = analytic.evolved_state
    # gamma/2 in place of 2 gamma in the decay exponent
    monkeypatch.setattr(analytic, "evolved_state", lambda t, g, om: original(t, g / 4, om))
    status, cols, _ = run(tmp_path, "verify", "--only", "oracle")
    assert status == 1
    assert not cols["passed"][cols["name"] == "rk4_vs_exact[gamma/omega=0.2]"].any()


def test_entry_point_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "cavityteleport.cli", "fig3", "--grid", "2"],
                        capture_output=True, text=True)
    assert ok.returncode == 0
    assert ok.stdout.startswith("# config: ")
    bad = subprocess.run([sys.executable, "-m", "cavityteleport.cli", "fig3", "--gamma-ratio", "-1"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert "config error" in bad.stderr
    usage = subprocess.run([sys.executable, "-m", "cavityteleport.cli", "fig9"], capture_output=True, text=True)
    assert usage.returncode == 2
