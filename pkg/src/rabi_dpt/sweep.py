"""Parameter-sweep engine: deterministic grids, crash isolation, manifests.

Grid order is axis1-major (axis2 fastest) and results are gathered in
submission order regardless of worker count, so output files are reproducible
row for row.  Every numeric CSV cell is written with the same %.12e format.
A failed point never aborts a sweep; its error string lands in the manifest
and the CSV row carries the error marker.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

FLOAT_FMT = "%.12e"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"axis {self.name}: steps must be >= 1")
        # steps == 1 is the blessed degenerate grid (single point); otherwise
        # the axis must span a real interval
        if self.steps >= 2 and not self.min < self.max:
            raise ValueError(f"axis {self.name}: min < max required")

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.steps)


@dataclass
class SweepSpec:
    axis1: AxisSpec
    axis2: AxisSpec | None
    fixed: dict
    layers: tuple
    out_dir: str

    def to_dict(self) -> dict:
        d = {"axis1": asdict(self.axis1),
             "axis2": asdict(self.axis2) if self.axis2 else None,
             "fixed": dict(self.fixed), "layers": list(self.layers),
             "out_dir": str(self.out_dir)}
        return d


def grid_points(spec: SweepSpec) -> list:
    """Axis1-major list of parameter dicts (fixed values merged in)."""
    pts = []
    v1 = spec.axis1.values()
    v2 = spec.axis2.values() if spec.axis2 else [None]
    for a in v1:
        for b in v2:
            pt = dict(spec.fixed)
            pt[spec.axis1.name] = float(a)
            if spec.axis2 is not None:
                pt[spec.axis2.name] = float(b)
            pts.append(pt)
    return pts


def config_hash(obj) -> str:
    """sha1 of the canonical JSON dump; identical configs hash identically."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha1(blob.encode()).hexdigest()


@dataclass
class PointResult:
    index: int
    params: dict
    values: dict | None
    status: str            # 'ok' or 'error'
    error: str = ""
    wall_time: float = 0.0


def _call_guarded(payload):
    fn, index, point = payload
    t0 = time.perf_counter()
    try:
        values = fn(point)
        return PointResult(index=index, params=point, values=values,
                           status="ok", wall_time=time.perf_counter() - t0)
    except Exception as e:  # crash isolation: record, keep sweeping
        return PointResult(index=index, params=point, values=None, status="error",
                           error=f"{type(e).__name__}: {e}",
                           wall_time=time.perf_counter() - t0)


def memory_estimate_gb(n_max: int) -> float:
    """Rough LU memory for one steady-state solve at the given cutoff."""
    unknowns = (2 * n_max) ** 2
    fill = 120.0  # empirical fill-in per unknown for the vectorized generator
    return 16.0 * unknowns * fill / 1e9


def effective_workers(requested: int, est_gb: float | None = None,
                      max_mem_gb: float | None = None) -> int:
    w = max(1, int(requested))
    if est_gb and max_mem_gb:
        w = min(w, max(1, int(max_mem_gb / est_gb)))
    return w


def run_points(fn, points, workers: int = 1, est_gb: float | None = None,
               max_mem_gb: float | None = None) -> list:
    """Apply fn to every point with crash isolation; deterministic order.

    fn must be picklable (module-level function or functools.partial of one)
    when workers > 1.
    """
    payloads = [(fn, i, pt) for i, pt in enumerate(points)]
    w = effective_workers(workers, est_gb, max_mem_gb)
    if w <= 1 or len(points) <= 1:
        return [_call_guarded(p) for p in payloads]
    with concurrent.futures.ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(_call_guarded, payloads, chunksize=1))


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return FLOAT_FMT % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([format_cell(v) for v in row])


def write_manifest(path, command: str, config: dict, tolerances: dict,
                   outputs: list, results: list | None = None,
                   extra: dict | None = None) -> None:
    from . import __version__
    man = {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "tolerances": tolerances,
        "outputs": outputs,
    }
    if results is not None:
        man["points"] = [
            {"index": r.index, "params": r.params, "status": r.status,
             "error": r.error, "wall_time_s": round(r.wall_time, 6),
             "cutoff": (r.values or {}).get("cutoff_used")}
            for r in results
        ]
    if extra:
        man.update(extra)
    with open(path, "w") as f:
        json.dump(man, f, indent=2, sort_keys=True)
        f.write("\n")


def second_difference_inflection(xs, ys):
    """Root of the discrete second difference nearest the steepest descent.

    Returns the interpolated x* where y'' crosses zero, or None when the grid
    has no sign change (fewer than 4 points or no drop).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 4:
        return None
    d1 = np.diff(ys) / np.diff(xs)
    d2 = ys[2:] - 2.0 * ys[1:-1] + ys[:-2]  # curvature at interior nodes xs[1:-1]
    k = int(np.argmin(d1))                   # steepest drop between xs[k] and xs[k+1]
    cand = []
    for i in range(len(d2) - 1):
        if d2[i] == 0.0:
            cand.append((abs(i + 1 - (k + 0.5)), float(xs[i + 1])))
        elif d2[i] * d2[i + 1] < 0:
            x0, x1 = xs[i + 1], xs[i + 2]
            xr = x0 + (x1 - x0) * d2[i] / (d2[i] - d2[i + 1])
            cand.append((abs(i + 1.5 - (k + 0.5)), float(xr)))
    if not cand:
        return None
    return min(cand)[1]
