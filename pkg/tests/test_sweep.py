"""Grid sweeps: point generation, crash isolation, CSV/manifest output."""

import json
import os
import time

import numpy as np
import pytest

from rabi_dpt.sweep import (AxisSpec, SweepSpec, config_hash, effective_workers,
                            format_cell, grid_points, memory_estimate_gb,
                            run_points, second_difference_inflection, write_csv,
                            write_manifest)


def spec_2d():
    return SweepSpec(axis1=AxisSpec("lam_m", 0.5, 1.5, 3),
                     axis2=AxisSpec("lam_p", 0.2, 0.4, 2),
                     fixed={"eta": 100.0, "kappa_ratio": 0.5},
                     layers=("meanfield",), out_dir="out")


def test_axis_validation():
    with pytest.raises(ValueError):
        AxisSpec("x", 0.0, 1.0, 0)
    with pytest.raises(ValueError):
        AxisSpec("x", 1.0, 0.5, 3)
    with pytest.raises(ValueError):
        AxisSpec("x", 1.0, 1.0, 2)
    assert AxisSpec("x", 0.7, 0.7, 1).values().tolist() == [0.7]
    assert AxisSpec("x", 0.0, 1.0, 5).values().tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_grid_points_axis1_major():
    pts = grid_points(spec_2d())
    assert len(pts) == 6
    assert pts[0] == {"eta": 100.0, "kappa_ratio": 0.5, "lam_m": 0.5, "lam_p": 0.2}
    assert pts[1]["lam_p"] == 0.4 and pts[1]["lam_m"] == 0.5
    assert pts[2]["lam_m"] == 1.0 and pts[2]["lam_p"] == 0.2
    assert [p["lam_m"] for p in pts] == [0.5, 0.5, 1.0, 1.0, 1.5, 1.5]


def test_grid_points_one_axis():
    spec = spec_2d()
    spec.axis2 = None
    pts = grid_points(spec)
    assert len(pts) == 3
    assert all("lam_p" not in p for p in pts)


def test_config_hash_canonical():
    a = {"x": 1.0, "y": [1, 2], "z": "s"}
    b = {"z": "s", "y": [1, 2], "x": 1.0}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "x": 1.5})
    assert len(config_hash(a)) == 40


def eval_point(pt):
    if pt["lam_m"] < 0:
        raise ValueError(f"negative coupling {pt['lam_m']}")
    return {"n": 2.0 * pt["lam_m"], "cutoff_used": 16}


def slow_point(pt):
    time.sleep(0.2)
    return {"n": 1.0}


def test_run_points_isolates_crashes():
    pts = [{"lam_m": v} for v in (-0.2, 0.0, 0.2)]
    results = run_points(eval_point, pts)
    assert [r.index for r in results] == [0, 1, 2]
    assert results[0].status == "error"
    assert results[0].values is None
    assert results[0].error == "ValueError: negative coupling -0.2"
    for r in results[1:]:
        assert r.status == "ok" and r.error == ""
        assert r.values["n"] == pytest.approx(2.0 * r.params["lam_m"])
        assert r.wall_time >= 0.0


def test_run_points_worker_count_does_not_change_results():
    pts = [{"lam_m": v} for v in (-0.2, 0.1, 0.5, 0.9)]
    serial = run_points(eval_point, pts, workers=1)
    parallel = run_points(eval_point, pts, workers=2)
    for a, b in zip(serial, parallel):
        assert (a.index, a.params, a.values, a.status, a.error) == \
               (b.index, b.params, b.values, b.status, b.error)


def test_effective_workers_memory_cap():
    assert effective_workers(4) == 4
    assert effective_workers(0) == 1
    assert effective_workers(8, est_gb=2.0, max_mem_gb=5.0) == 2
    assert effective_workers(8, est_gb=2.0, max_mem_gb=1.0) == 1
    assert effective_workers(8, est_gb=None, max_mem_gb=5.0) == 8
    assert effective_workers(8, est_gb=2.0, max_mem_gb=None) == 8


def test_memory_estimate():
    assert memory_estimate_gb(32) == pytest.approx(16.0 * 64 ** 2 * 120.0 / 1e9)
    assert memory_estimate_gb(64) > memory_estimate_gb(32)


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(0.5) == "5.000000000000e-01"
    assert format_cell(float("nan")) == "nan"
    assert format_cell(3) == "3"
    assert format_cell(np.int64(5)) == "5"
    assert format_cell("SP") == "SP"


def test_write_csv_bytes(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b", "c"], [[1.0, None, "NP"], [2, 0.25, "SP"]])
    expect = (b"a,b,c\r\n"
              b"1.000000000000e+00,,NP\r\n"
              b"2,2.500000000000e-01,SP\r\n")
    assert path.read_bytes() == expect


def test_manifest_schema(tmp_path):
    path = tmp_path / "manifest.json"
    pts = [{"lam_m": v} for v in (-0.2, 0.2)]
    results = run_points(eval_point, pts)
    config = {"eta": 100.0}
    write_manifest(path, "scan", config, {"tail": 1e-8},
                   ["scan.csv"], results=results, extra={"note": "run"})
    man = json.loads(path.read_text())
    assert man["schema_version"] == 1
    assert man["command"] == "scan"
    assert man["config"] == config
    assert man["config_hash"] == config_hash(config)
    assert man["tolerances"] == {"tail": 1e-8}
    assert man["outputs"] == ["scan.csv"]
    assert man["note"] == "run"
    assert len(man["points"]) == 2
    assert man["points"][0]["status"] == "error"
    assert man["points"][0]["cutoff"] is None
    assert man["points"][1]["status"] == "ok"
    assert man["points"][1]["cutoff"] == 16
    assert man["points"][1]["wall_time_s"] >= 0.0


def test_inflection_of_sigmoid_drop():
    xs = np.linspace(2.0, 4.0, 11)
    ys = 1.0 / (1.0 + np.exp((xs - 3.0) / 0.15))
    x_star = second_difference_inflection(xs, ys)
    assert x_star is not None
    assert abs(x_star - 3.0) < 0.25


def test_inflection_degenerate_cases():
    assert second_difference_inflection([1.0, 2.0, 3.0], [1.0, 0.5, 0.2]) is None
    xs = np.linspace(0.0, 1.0, 8)
    assert second_difference_inflection(xs, xs ** 2) is None  # pure convex


@pytest.mark.skipif((os.cpu_count() or 1) < 4, reason="needs >= 4 cpus")
def test_parallel_speedup():
    pts = [{"i": i} for i in range(8)]
    t0 = time.perf_counter()
    run_points(slow_point, pts, workers=1)
    serial = time.perf_counter() - t0
    t0 = time.perf_counter()
    run_points(slow_point, pts, workers=4)
    parallel = time.perf_counter() - t0
    assert serial / parallel > 1.8
