"""End-to-end acceptance checks.

Each test records one line through the ``criterion`` fixture; the terminal
summary lists them as [PASS]/[FAIL] after the run.
"""
import math
import time

import numpy as np
import pytest

from oracles import brute_normal_system, central_difference_gradient, r_squared
from rbfrepro import bench
from rbfrepro.assembly import assemble, build_design, residual_and_gradient
from rbfrepro.cli import main
from rbfrepro.fields import ScatteredData, sample_field, sinc_field
from rbfrepro.fit import FitOptions, SolverPath, fit
from rbfrepro.kernels import KernelSpec, eval_kernel
from rbfrepro.pointgen import PointSet, halton_points, regular_grid

KERNELS = ("gauss", "iq", "tps")


def _random_instance(rng, n, m):
    pts = PointSet(rng.uniform(0, 1, (n, 2)))
    centers = PointSet(rng.uniform(0, 1, (m, 2)))
    return ScatteredData(pts, rng.normal(size=n)), centers


def test_linear_reproduction(criterion):
    pts = halton_points(200)
    h = 2 * pts.x + 3 * pts.y + 1
    data = ScatteredData(pts, h)
    centers = halton_points(25, start_index=300)
    tol = 1e-7 * (1 + np.max(np.abs(h)))
    t0 = time.perf_counter()
    worst = {}
    for name in KERNELS:
        model = fit(data, centers, KernelSpec(name, 1.0), "proposed")
        worst[name] = float(np.max(np.abs(model.evaluate(pts) - h)))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= tol and elapsed < 1.0
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    criterion("linear reproduction", ok, f"max error {detail} (tol {tol:.1e}), {elapsed:.2f} s")
    assert ok


def test_gradient_oracle(criterion, rng):
    t0 = time.perf_counter()
    worst = 0.0
    for trial in range(50):
        n, m = int(rng.integers(4, 11)), int(rng.integers(1, 4))
        data, centers = _random_instance(rng, n, m)
        kernel = KernelSpec(KERNELS[trial % 3], float(rng.uniform(0.5, 3.0)))
        d = build_design(data, centers, kernel)
        c, k = rng.normal(size=m), rng.normal(size=3)
        _, gc, gk = residual_and_gradient(d, c, k)
        xs, ys, hs = data.points.x.tolist(), data.points.y.tolist(), data.values.tolist()
        cx, cy = centers.x.tolist(), centers.y.tolist()
        phi = kernel.__call__

        def r2(v):
            return r_squared(xs, ys, hs, cx, cy, phi, v[:m], v[m:])

        v0 = np.concatenate([c, k]).tolist()
        fd = np.array(central_difference_gradient(r2, v0, [1e-5 * max(1.0, abs(t)) for t in v0]))
        g = np.concatenate([gc, gk])
        worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-300)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 5.0
    criterion("gradient oracle", ok, f"worst relative deviation {worst:.1e} over 50 instances, {elapsed:.2f} s")
    assert ok


def test_normal_system_oracle(criterion, rng):
    worst = 0.0
    structure_ok = True
    for trial in range(30):
        n, m = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        data, centers = _random_instance(rng, n, m)
        kernel = KernelSpec(KERNELS[trial % 3], float(rng.uniform(0.5, 3.0)))
        d = build_design(data, centers, kernel)
        args = (data.points.x.tolist(), data.points.y.tolist(), data.values.tolist(),
                centers.x.tolist(), centers.y.tolist(), kernel.__call__)
        for method, original in (("proposed", False), ("original", True)):
            sys_ = assemble(d, method)
            B_ref, f_ref = brute_normal_system(*args, original=original)
            scale = max(np.max(np.abs(B_ref)), 1e-300)
            worst = max(worst, float(np.max(np.abs(sys_.B - np.array(B_ref))) / scale))
            fscale = max(np.max(np.abs(f_ref)), 1e-300)
            worst = max(worst, float(np.max(np.abs(sys_.f - np.array(f_ref))) / fscale))
        diff = assemble(d, "original").B - assemble(d, "proposed").B
        outside = diff.copy()
        outside[:m, :m] = 0.0
        xtx = d.Xi.T @ d.Xi
        structure_ok &= bool(np.all(outside == 0.0))
        structure_ok &= bool(np.allclose(diff[:m, :m], xtx, rtol=1e-12, atol=1e-12 * np.max(xtx)))
    ok = worst <= 1e-12 and structure_ok
    criterion("normal-system oracle", ok,
              f"worst relative deviation {worst:.1e}; XiT Xi block structure {'ok' if structure_ok else 'broken'}")
    assert ok


def test_optimality(criterion, rng):
    pts = halton_points(120)
    data = ScatteredData(pts, np.sin(3 * pts.x) + pts.y**2)
    centers = halton_points(9, start_index=500)
    kernel = KernelSpec("gauss", 2.0)
    model = fit(data, centers, kernel, "proposed")
    d = build_design(data, centers, kernel)
    c0, k0 = np.asarray(model.c), np.array([*model.a, model.a0])
    r0 = residual_and_gradient(d, c0, k0)[0]
    worst = 0.0
    for _ in range(200):
        scale = 10.0 ** rng.uniform(-8, 0)
        r = residual_and_gradient(d, c0 + scale * rng.normal(size=9), k0 + scale * rng.normal(size=3))[0]
        worst = max(worst, (r0 - r) / r0)
    ok = worst <= 1e-12
    criterion("optimality", ok, f"largest relative decrease of R^2 under 200 perturbations {max(worst, 0.0):.1e}")
    assert ok


def _sinc_gauss_inputs():
    cfg = bench.sinc_gauss_config()
    domain = cfg.resolved_domain()
    truth = sinc_field()
    data = sample_field(truth, cfg.data.generate(domain))
    centers = cfg.centers[0].generate(domain)
    return data, centers, KernelSpec("gauss", 0.001)


def test_solver_cross_check(criterion):
    data, centers, kernel = _sinc_gauss_inputs()
    d = build_design(data, centers, kernel)
    grid = regular_grid(101, 51, sinc_field().domain)
    lines, ok = [], True
    for method in ("proposed", "original"):
        plain = fit(data, centers, kernel, method, FitOptions(solver_path=SolverPath.NORMAL_EQ))
        cond = plain.diagnostics.condition_estimate
        ridge = 0.0
        if cond > 1e10 or plain.diagnostics.ridge_used > 0:
            ridge = 1e-10 * float(np.max(np.diag(assemble(d, method).B)))
        ne = fit(data, centers, kernel, method,
                 FitOptions(solver_path=SolverPath.NORMAL_EQ, initial_ridge=ridge))
        qr = fit(data, centers, kernel, method,
                 FitOptions(solver_path=SolverPath.STACKED_QR, initial_ridge=ridge))
        vq = np.concatenate([qr.evaluate(data.points), qr.evaluate(grid)])
        vn = np.concatenate([ne.evaluate(data.points), ne.evaluate(grid)])
        rel = float(np.max(np.abs(vn - vq)) / np.max(np.abs(vq)))
        ok &= rel <= 1e-6
        lines.append(f"{method} cond {cond:.2e}, ridge {ridge:.2e}, deviation {rel:.1e}")
    criterion("solver cross-check", ok, "; ".join(lines))
    assert ok


def _ratio_line(res, elapsed):
    o, p = res.reports
    return (f"max error original {o.max_abs:.3e}, proposed {p.max_abs:.3e}, "
            f"max ratio {res.max_ratio:.2f}, mean ratio {res.ratio:.2f}, {elapsed:.2f} s")


def test_sinc_gauss_reproduction(criterion):
    t0 = time.perf_counter()
    res = bench.compare(bench.sinc_gauss_config())
    elapsed = time.perf_counter() - t0
    ok = res.max_ratio > 1.2 and elapsed < 10.0
    criterion("sinc Gauss comparison", ok, _ratio_line(res, elapsed))
    assert ok


def test_franke_iq_reproduction(criterion):
    t0 = time.perf_counter()
    res = bench.compare(bench.franke_iq_config())
    elapsed = time.perf_counter() - t0
    ok = res.max_ratio > 1.2 and elapsed < 30.0
    criterion("Franke IQ comparison", ok, _ratio_line(res, elapsed))
    assert ok


@pytest.fixture(scope="module")
def default_sweep(tmp_path_factory):
    path = tmp_path_factory.mktemp("sweep") / "first.csv"
    t0 = time.perf_counter()
    assert main(["sweep", "--preset", "shape-sweep", "--out", str(path)]) == 0
    return path, bench.read_sweep_csv(path), time.perf_counter() - t0


def _cell(rows, kernel, dist=None):
    return [r for r in rows if r.kernel == kernel and (dist is None or r.center_distribution == dist)]


def test_tps_ratio_above_one(criterion, default_sweep):
    _, rows, _ = default_sweep
    tps = _cell(rows, "tps")
    low = min(r.ratio for r in tps)
    ok = len(tps) == 60 and all(r.ratio > 1 for r in tps)
    per = ", ".join(f"{d} min {min(r.ratio for r in _cell(rows, 'tps', d)):.3f}"
                    for d in ("halton", "epsilon", "grid"))
    criterion("TPS sweep ratio > 1", ok, f"{len(tps)} points, lowest {low:.3f} ({per})")
    assert ok


def test_gauss_epsilon_ratio_above_one(criterion, default_sweep):
    _, rows, _ = default_sweep
    cell = _cell(rows, "gauss", "epsilon")
    bad = [r for r in cell if not r.ratio > 1]
    ok = len(cell) == 20 and not bad
    detail = f"{len(cell) - len(bad)}/{len(cell)} points above 1"
    if bad:
        detail += "; at or below 1: " + ", ".join(f"alpha={r.alpha:.4g} ratio={r.ratio:.3f}" for r in bad)
    criterion("Gauss epsilon sweep ratio > 1", ok, detail)
    assert ok


def test_sweep_exception_counts(note, default_sweep):
    _, rows, elapsed = default_sweep
    counts = bench.unfavorable_counts(rows)
    cells = sorted({(r.kernel, r.center_distribution) for r in rows})
    total = sum(counts.get(c, 0) for c in cells)
    text = ", ".join(f"{k}/{d} {counts.get((k, d), 0)}" for k, d in cells)
    note("sweep points with ratio <= 1", f"{total} of {len(rows)} ({text}); sweep took {elapsed:.1f} s")
    assert not any(r.error for r in rows)


def test_tps_unit_scale_range_reported(note):
    cfg = bench.shape_sweep_config(n_alphas=5, ranges={"tps": (0.1, 10.0)})
    rows = bench.sweep_alpha(cfg)
    low = min(r.ratio for r in rows)
    below = sum(r.ratio <= 1 for r in rows)
    note("TPS sweep over alpha in [0.1, 10]",
         f"ratio range {low:.4f} to {max(r.ratio for r in rows):.4f}, {below} of {len(rows)} points <= 1")
    assert all(math.isfinite(r.ratio) for r in rows)


def test_point_generator_fixtures(criterion):
    pts = halton_points(5)
    expect_x = [1 / 2, 1 / 4, 3 / 4, 1 / 8, 5 / 8]
    expect_y = [1 / 3, 2 / 3, 1 / 9, 4 / 9, 7 / 9]
    halton_ok = pts.x.tolist() == expect_x and pts.y.tolist() == expect_y
    grid = regular_grid(17, 17)
    corners = {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)}
    grid_ok = len(grid) == 289 and corners <= set(map(tuple, grid.points.tolist()))
    ok = halton_ok and grid_ok
    criterion("point generator fixtures", ok,
              f"Halton prefix {'exact' if halton_ok else 'wrong'}; 17x17 grid {len(grid)} points, "
              f"corners {'present' if grid_ok else 'missing'}")
    assert ok


def test_kernel_fixtures(criterion):
    cases = [
        (KernelSpec("gauss", 0.001), 0.0, 1.0),
        (KernelSpec("iq", 0.005), 200.0, 0.5),
        (KernelSpec("tps", 1.0), 1.0, 0.0),
        (KernelSpec("tps", 1.0), 0.0, 0.0),
        (KernelSpec("gauss", 0.001), 1000.0, 0.36787944117144232160),
    ]
    worst = 0.0
    for spec, r, expect in cases:
        got = eval_kernel(spec, r)
        worst = max(worst, abs(got - expect) / max(abs(expect), 1.0) if expect else abs(got))
    tps_zero = eval_kernel(KernelSpec("tps", 3.7), 0.0) == 0.0
    ok = worst <= 1e-15 and tps_zero
    criterion("kernel fixtures", ok, f"worst relative deviation {worst:.1e}; TPS(0) exactly zero: {tps_zero}")
    assert ok


def test_sweep_determinism(criterion, default_sweep, tmp_path):
    first, _, _ = default_sweep
    second = tmp_path / "second.csv"
    assert main(["sweep", "--preset", "shape-sweep", "--out", str(second)]) == 0
    ok = first.read_bytes() == second.read_bytes()
    criterion("sweep determinism", ok, f"two runs byte-identical: {ok} ({len(first.read_bytes())} bytes)")
    assert ok
