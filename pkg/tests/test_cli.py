"""End-to-end command-line runs against small, fast parameter points."""

import csv
import json
import math

import pytest

from rabi_dpt import cli


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def iso_flags(eta, lam, out, kr=0.5):
    return ["--eta", str(eta), "--lam-m", str(lam), "--lam-p", str(lam),
            "--kappa-ratio", str(kr), "--out", str(out)]


def test_steady_reference_point(tmp_path):
    rc = cli.main(["steady"] + iso_flags(100, 0.618, tmp_path))
    assert rc == 0
    obs = json.loads((tmp_path / "observables.json").read_text())
    assert obs["sigma_z"] == pytest.approx(-0.020884312231707686, abs=1e-9)
    assert obs["p_up"] == pytest.approx(0.5 * (1.0 + obs["sigma_z"]), abs=1e-12)
    assert obs["cutoff_used"] == 32
    assert obs["prediction_phase"] == "NP"
    assert obs["prediction_sigma_z"] == 0.0
    assert (tmp_path / "manifest.json").exists()

    header, rows = read_csv(tmp_path / "photon_dist.csv")
    assert header == ["n", "P", "P_up", "P_down"]
    assert len(rows) == 32
    total = sum(float(r[1]) for r in rows)
    assert total == pytest.approx(1.0, abs=1e-10)
    # P_up / P_down columns are conditional on the spin branch; the joint
    # distribution is their p_up-weighted mixture (12 significant digits)
    w = obs["p_up"]
    for r in rows[:5]:
        mix = w * float(r[2]) + (1.0 - w) * float(r[3])
        assert float(r[1]) == pytest.approx(mix, abs=1e-12)


def test_steady_layer_gating(tmp_path):
    d1 = tmp_path / "exact_only"
    rc = cli.main(["steady"] + iso_flags(100, 0.618, d1) + ["--layers", "exact"])
    assert rc == 0
    obs = json.loads((d1 / "observables.json").read_text())
    assert "prediction_phase" not in obs
    assert "cumulant_sigma_z" not in obs
    assert "n_photon" in obs

    d2 = tmp_path / "no_exact"
    rc = cli.main(["steady"] + iso_flags(100, 0.618, d2)
                  + ["--layers", "effective,cumulant,meanfield"])
    assert rc == 0
    obs = json.loads((d2 / "observables.json").read_text())
    assert "n_photon" not in obs
    assert "cutoff_used" not in obs
    assert not (d2 / "photon_dist.csv").exists()
    assert obs["mf_region"] == "NP"
    assert obs["mf_n_stable"] == 2
    assert obs["prediction_phase"] == "NP"
    assert obs["cumulant_sigma_z"] == pytest.approx(-0.02, rel=1e-12)
    assert obs["cumulant_sigma_z_numeric"] == pytest.approx(-0.02, abs=1e-4)


def test_usage_errors(tmp_path, capsys):
    assert cli.main(["steady", "--out", str(tmp_path)]) == 2
    assert "missing required flags" in capsys.readouterr().err

    rc = cli.main(["steady"] + iso_flags(100, 0.618, tmp_path)
                  + ["--layers", "exact,bogus"])
    assert rc == 2
    assert "unknown layers" in capsys.readouterr().err

    rc = cli.main(["phase-diagram", "--eta", "100", "--kappa-ratio", "0.5",
                   "--lam-m-range", "0.4:1.6", "--lam-p-range", "0.4:1.6:3",
                   "--out", str(tmp_path)])
    assert rc == 2
    assert "bad range" in capsys.readouterr().err

    with pytest.raises(SystemExit):
        cli.main([])


def test_solver_error_exit_code(tmp_path, capsys):
    rc = cli.main(["steady"] + iso_flags(100, 0.0, tmp_path) + ["--layers", "exact"])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_evolve_trajectory(tmp_path):
    rc = cli.main(["evolve"] + iso_flags(10, 0.618, tmp_path)
                  + ["--tau-final", "5", "--n-samples", "11", "--initial", "down"])
    assert rc == 0
    header, rows = read_csv(tmp_path / "trajectory.csv")
    assert header == ["tau", "n_photon", "sigma_z", "x2", "re_a", "im_a", "p_up"]
    assert len(rows) == 11
    taus = [float(r[0]) for r in rows]
    assert taus[0] == 0.0 and taus[-1] == 5.0
    assert all(b > a for a, b in zip(taus, taus[1:]))
    assert float(rows[0][2]) == -1.0
    assert float(rows[0][1]) == 0.0
    assert all(0.0 <= float(r[6]) <= 1.0 for r in rows)


def test_phase_diagram_grid(tmp_path):
    args = ["phase-diagram", "--eta", "100", "--kappa-ratio", "0.5",
            "--lam-m-range", "0.4:1.6:3", "--lam-p-range", "0.4:1.6:3"]
    d1 = tmp_path / "run1"
    assert cli.main(args + ["--out", str(d1)]) == 0

    header, rows = read_csv(d1 / "meanfield_grid.csv")
    assert header == ["lam_m", "lam_p", "region", "n_stable", "abs_c_sq_SP",
                      "cos_theta_SP", "error"]
    assert len(rows) == 9
    regions = [r[2] for r in rows]
    assert "NP" in regions and "SP" in regions
    assert all(r[6] == "" for r in rows)
    first = rows[0]  # (0.4, 0.4) sits deep in the normal region
    assert float(first[0]) == 0.4 and float(first[1]) == 0.4
    assert first[2] == "NP" and first[4] == "nan"

    header, rows = read_csv(d1 / "effective_grid.csv")
    assert header == ["lam_m", "lam_p", "phase", "P_NP_up", "P_NP_down",
                      "P_SP_down", "n_over_eta", "sigma_z", "error"]
    assert len(rows) == 9
    assert set(r[2] for r in rows) <= {"NP", "SP"}
    assert all(r[8] == "" for r in rows)

    man = json.loads((d1 / "manifest.json").read_text())
    assert len(man["points"]) == 9
    assert all(p["status"] == "ok" for p in man["points"])

    d2 = tmp_path / "run2"
    assert cli.main(args + ["--out", str(d2)]) == 0
    for name in ("meanfield_grid.csv", "effective_grid.csv"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_phase_diagram_single_point(tmp_path):
    rc = cli.main(["phase-diagram", "--eta", "100", "--kappa-ratio", "0.5",
                   "--lam-m-range", "0.618:0.618:1",
                   "--lam-p-range", "0.618:0.618:1", "--out", str(tmp_path)])
    assert rc == 0
    _, rows = read_csv(tmp_path / "meanfield_grid.csv")
    assert len(rows) == 1
    assert rows[0][2] == "NP"


def test_scan_without_exact_layer(tmp_path):
    rc = cli.main(["scan-order-parameter", "--r", "1", "--eta-list", "20",
                   "--lam-m-range", "0.8:1.2:3", "--kappa-ratio", "0.5",
                   "--layers", "effective,meanfield", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = read_csv(tmp_path / "order_parameter.csv")
    assert header == ["lam_m", "eta", "n_exact_over_eta", "n_effective_over_eta",
                      "n_meanfield_over_eta", "sigma_z_exact", "lam_p",
                      "cutoff_used", "error"]
    assert len(rows) == 3
    assert all(r[2] == "" and r[7] == "" and r[8] == "" for r in rows)
    assert float(rows[0][3]) == 0.0         # normal side
    assert float(rows[2][3]) > 0.0          # superradiant side
    _, infl = read_csv(tmp_path / "inflection_points.csv")
    assert infl == [["2.000000000000e+01", ""]]


def test_scan_isolates_bad_points(tmp_path):
    rc = cli.main(["scan-order-parameter", "--r", "1", "--eta-list", "100",
                   "--lam-m-range=-0.2:0.2:3", "--kappa-ratio", "0.5",
                   "--layers", "meanfield", "--out", str(tmp_path)])
    assert rc == 0
    _, rows = read_csv(tmp_path / "order_parameter.csv")
    assert len(rows) == 3
    assert float(rows[0][0]) == -0.2
    assert rows[0][8].startswith("ParameterError")
    assert rows[0][4] == ""
    for r in rows[1:]:
        assert r[8] == ""
        assert r[4] != ""


def test_scaling_theory_only(tmp_path):
    rc = cli.main(["scaling", "--r-list", "1", "--eta-list", "100",
                   "--dlam-list", "0.001,0.002", "--kappa-ratio", "0.5",
                   "--layers", "meanfield", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = read_csv(tmp_path / "scaling.csv")
    assert header == ["r", "eta", "dlam", "x_scaled", "y_scaled", "F_analytic",
                      "lam_m", "lam_p", "x2_exact", "x2_theory", "x2_form",
                      "x2_dicke_ref", "y_theory", "cutoff_used", "error"]
    assert len(rows) == 2
    for r in rows:
        assert r[4] == r[12]                        # y_scaled falls back to theory
        assert abs(float(r[4]) - float(r[5])) < 1e-10
        assert float(r[11]) == pytest.approx(2.0 * float(r[9]), rel=1e-12)
        assert r[8] == "nan"
        assert r[13] == "0"
        assert r[14] == ""


def test_scaling_accepts_negative_offsets(tmp_path):
    rc = cli.main(["scaling", "--r-list", "1", "--eta-list", "100",
                   "--dlam-list=-0.001,0.001", "--kappa-ratio", "0.5",
                   "--layers", "meanfield", "--out", str(tmp_path)])
    assert rc == 0
    _, rows = read_csv(tmp_path / "scaling.csv")
    assert len(rows) == 2
    assert all(r[14] == "" for r in rows)
    assert float(rows[0][2]) == -0.001
    # X = c1^2 eta dlam^2 is even in the offset
    assert float(rows[0][3]) == pytest.approx(float(rows[1][3]), rel=1e-15)
    assert float(rows[0][4]) < float(rows[1][4])


def test_cumulant_command(tmp_path):
    rc = cli.main(["cumulant"] + iso_flags(100, 0.618, tmp_path)
                  + ["--tau-final", "50", "--n-samples", "21"])
    assert rc == 0
    header, rows = read_csv(tmp_path / "cumulant_trajectory.csv")
    assert header == ["tau", "sz", "n", "re_a_sp", "im_a_sp", "re_a", "im_a",
                      "re_sp", "im_sp", "re_a2", "im_a2", "re_a_sm", "im_a_sm",
                      "re_a_sz", "im_a_sz"]
    assert len(rows) == 21
    assert len(rows[0]) == 15
    assert float(rows[0][1]) == 1.0            # default initial state is spin up
    assert float(rows[0][2]) == 0.0
    st = json.loads((tmp_path / "cumulant_stationary.json").read_text())
    assert st["sigma_z_closed_form"] == pytest.approx(-0.02, rel=1e-12)
    assert st["sigma_z_numeric"] == pytest.approx(-0.02, abs=1e-4)
    assert st["n_numeric"] > 0.0
    assert st["params"]["eta"] == 100.0


def test_config_file_equivalent_to_flags(tmp_path):
    cfg = tmp_path / "params.json"
    cfg.write_text(json.dumps({"eta": 100, "lam_m": 0.618, "lam_p": 0.618,
                               "kappa_ratio": 0.5}))
    d1, d2 = tmp_path / "from_config", tmp_path / "from_flags"
    assert cli.main(["steady", "--config", str(cfg), "--out", str(d1)]) == 0
    assert cli.main(["steady"] + iso_flags(100, 0.618, d2)) == 0
    assert (d1 / "observables.json").read_bytes() == \
           (d2 / "observables.json").read_bytes()


def test_meanfield_command(tmp_path):
    rc = cli.main(["meanfield"] + iso_flags(100, 1.5, tmp_path))
    assert rc == 0
    doc = json.loads((tmp_path / "meanfield.json").read_text())
    assert doc["region"] == "SP"
    assert doc["n_stable"] == 3
    kinds = {f["kind"] for f in doc["fixed_points"]}
    assert {"NP_up", "NP_down", "SP_down_plus", "SP_down_minus"} <= kinds
    by_kind = {f["kind"]: f for f in doc["fixed_points"]}
    assert by_kind["NP_up"]["stable"] is True
    assert by_kind["NP_down"]["stable"] is False
    for f in doc["fixed_points"]:
        assert all(len(pair) == 2 for pair in f["jacobian_eigs"])
        assert all(math.isfinite(v) for pair in f["jacobian_eigs"] for v in pair)


@pytest.mark.slow
def test_scan_exact_tracks_meanfield(tmp_path):
    rc = cli.main(["scan-order-parameter", "--r", "1", "--eta-list", "50",
                   "--lam-m-range", "0.9:1.3:3", "--kappa-ratio", "0.5",
                   "--layers", "exact,meanfield", "--out", str(tmp_path)])
    assert rc == 0
    _, rows = read_csv(tmp_path / "order_parameter.csv")
    assert len(rows) == 3
    for r in rows:
        assert r[8] == ""
        n_exact, n_mf = float(r[2]), float(r[4])
        assert n_exact <= n_mf + 0.02
    # finite-size smoothing keeps the exact order parameter below mean field
    last = rows[-1]
    assert float(last[4]) - float(last[2]) >= 0.02
