"""Acceptance suite; one PASS/FAIL line per criterion is printed at the end of the run."""
import itertools
import time

import numpy as np
import pytest
from scipy import stats
from skimage.metrics import structural_similarity

from priiner import fft2c, forward_model, ifft2c, make_equispaced_mask, normalize_rss, zero_filled_adjoint
from priiner.config import HashGridConfig
from priiner.metrics import psnr, ssim, wilcoxon_signed_rank
from priiner.optim import run_reconstruction
from priiner.pipeline import BenchmarkPlan, run_benchmark, simulate_case
from priiner.priors import PriorSpec, make_prior
from priiner.simulate import AcquisitionSpec, PhantomSpec, acquire, make_phantom, make_synthetic_csm

from conftest import crandn, report
from test_metrics import brute_force_wilcoxon
from test_objective import fd_check_total

pytestmark = pytest.mark.slow

# established on the first validated run (64x64 phantom, seed 0, default hash grid)
PRIOR_FIT_PSNR = 99.45
# sampled column counts for W=320, center_fraction=0.08, by direct enumeration
MASK_COUNTS_W320 = {4: 99, 6: 76, 8: 63, 10: 55}


def test_criterion_1_operators():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_unit = worst_adj = 0.0
    instances = 0
    for _, h, w in itertools.product(range(2), (4, 8, 12, 16), (4, 6, 10, 16)):
        for accel in (1, 2, 3, 4, 5, 8, 10):
            if accel > w:
                continue
            c = int(rng.integers(1, 5))
            x = crandn(rng, h, w)
            k = fft2c(x)
            worst_unit = max(worst_unit, abs(np.linalg.norm(k) - np.linalg.norm(x)) / np.linalg.norm(x),
                             np.linalg.norm(ifft2c(k) - x) / np.linalg.norm(x))
            maps = normalize_rss(crandn(rng, c, h, w))
            mask = make_equispaced_mask(w, accel, 0.08)
            y = crandn(rng, c, h, w) * mask.as_array(h)
            lhs = np.vdot(y, forward_model(x, maps, mask))
            rhs = np.vdot(zero_filled_adjoint(y, maps, mask), x)
            worst_adj = max(worst_adj, abs(lhs - rhs) / abs(lhs))
            instances += 1
    elapsed = time.perf_counter() - t0
    ok = instances >= 100 and worst_unit <= 1e-10 and worst_adj <= 1e-9 and elapsed < 5
    report(1, ok, f"{instances} instances, unitarity {worst_unit:.1e}, adjoint {worst_adj:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_gradients():
    t0 = time.perf_counter()
    worst, checked = fd_check_total(np.random.default_rng(2), size=16, coils=2, degree=2, levels=4, n_theta=60)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and checked >= 50 + 2 * 2 * 6 and elapsed < 30
    report(2, ok, f"worst relative error {worst:.2e} over {checked} entries, {elapsed:.1f}s")
    assert ok


def test_criterion_3_prior_fit():
    t0 = time.perf_counter()
    x = make_phantom(PhantomSpec(64))
    maps = make_synthetic_csm(4, 64, 64)
    y, mask = acquire(x, maps, AcquisitionSpec(4, 4, 0.08, 0.0, 0))
    res = run_reconstruction(y, mask, x.astype(np.complex128), hash_config=HashGridConfig(),
                             alpha=0.0, lambda_tv=0.0, iterations=1000, seed=0)
    value = psnr(np.abs(res.image), np.abs(x))
    elapsed = time.perf_counter() - t0
    ok = value >= 35 and abs(value - PRIOR_FIT_PSNR) <= 1 and elapsed < 60
    report(3, ok, f"PSNR {value:.2f} dB (frozen {PRIOR_FIT_PSNR} +/- 1), {elapsed:.1f}s")
    assert ok


def test_criterion_4_dual_improvement():
    t0 = time.perf_counter()
    plan = BenchmarkPlan()
    truth, maps, y, mask = simulate_case(128, 4, 4, 0.08, plan.noise_sigma, 1)
    t = np.abs(truth)
    zf = np.abs(zero_filled_adjoint(y, maps, mask))
    csm0 = normalize_rss(np.ones((4, 128, 128), dtype=np.complex128))
    prior = make_prior(PriorSpec("lowpass_oracle", keep_fraction=0.25), y, mask, csm0, truth)
    res = run_reconstruction(y, mask, prior, hash_config=HashGridConfig(), iterations=1000, seed=1)
    img = np.abs(res.intensities)
    totals = [row.total for row in res.trace]
    gain = psnr(img, t) - psnr(zf, t)
    ssim_zf, ssim_rec = ssim(zf, t), ssim(img, t)
    elapsed = time.perf_counter() - t0
    ok = (gain >= 3 and ssim_rec > ssim_zf and totals[-1] < totals[0]
          and min(totals) < 0.5 * totals[0] and elapsed < 180)
    report(4, ok, f"PSNR gain {gain:.2f} dB, SSIM {ssim_zf:.3f} -> {ssim_rec:.3f}, "
                  f"loss {totals[0]:.3g} -> {totals[-1]:.3g}, {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def ordering_run(tmp_path_factory):
    plan = BenchmarkPlan(accelerations=(4, 6))
    t0 = time.perf_counter()
    rows, summary, tests = run_benchmark(plan, tmp_path_factory.mktemp("ordering"))
    return plan, rows, summary, tests, time.perf_counter() - t0


def test_criterion_5_method_ordering(ordering_run):
    plan, rows, summary, tests, elapsed = ordering_run
    means = {(s["acceleration"], s["method"]): s["ssim_mean"] for s in summary}
    ordered = all(
        means[(r, "zero_filled")] < means[(r, "dc_only")] < means[(r, "priiner-lowpass_oracle")]
        for r in plan.accelerations
    )
    pooled = next(t for t in tests if t["scope"] == "all" and t["method_a"] == "dc_only"
                  and t["method_b"] == "priiner-lowpass_oracle")
    ok = (all(r["status"] == "ok" for r in rows) and ordered and pooled["n"] >= 10
          and pooled["p_ssim"] < 0.05 and elapsed < 1800)
    detail = ", ".join(
        f"R={r}: " + " < ".join(f"{means[(r, m)]:.3f}" for m in plan.methods) for r in plan.accelerations
    )
    report(5, ok, f"{detail}; dual vs DC-only p={pooled['p_ssim']:.4f} (n={pooled['n']}), {elapsed:.0f}s")
    assert ok


def test_criterion_6_mask_protocol():
    t0 = time.perf_counter()
    ok = True
    details = []
    for accel, count in MASK_COUNTS_W320.items():
        cols = np.asarray(make_equispaced_mask(320, accel, 0.08).columns, bool)
        center = np.zeros(320, bool)
        center[147:173] = True
        outer = np.flatnonzero(cols & ~center)
        ok &= bool(cols[center].all()) and center.sum() == 26
        ok &= bool(np.all(outer % accel == 0)) and set(range(0, 320, accel)) <= set(np.flatnonzero(cols))
        ok &= int(cols.sum()) == count
        details.append(f"R={accel}: {int(cols.sum())}/320")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1
    report(6, ok, ", ".join(details) + f", {elapsed:.3f}s")
    assert ok


def test_criterion_7_metrics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    checks = []
    truth = rng.uniform(size=(32, 32))
    checks.append(psnr(truth, truth) == 100.0)
    one = np.zeros((10, 10))
    one[0, 0] = 1.0
    checks.append(abs(psnr(one + 0.1, one) - 20.0) < 1e-9)
    noisy = truth + 0.05 * rng.normal(size=truth.shape)
    checks.append(abs(psnr(3 * noisy, 3 * truth) - psnr(noisy, truth)) < 1e-9)
    checks.append(abs(ssim(truth, truth) - 1.0) < 1e-12)
    other = truth + 0.1 * rng.normal(size=truth.shape)
    ref = structural_similarity(other, truth, data_range=float(truth.max() - truth.min()),
                                gaussian_weights=True, sigma=1.5, use_sample_covariance=False)
    checks.append(abs(ssim(other, truth) - ref) < 1e-8)
    worst = 0.0
    for n in range(5, 13):
        for _ in range(3):
            a = np.round(rng.normal(size=n), 0)
            b = np.round(rng.normal(size=n), 0)
            if np.all(a == b):
                continue
            worst = max(worst, abs(wilcoxon_signed_rank(a, b) - brute_force_wilcoxon(a, b)))
    checks.append(worst < 1e-12)
    a, b = rng.normal(size=15), rng.normal(size=15)
    checks.append(abs(wilcoxon_signed_rank(a, b) - stats.wilcoxon(a, b, method="exact").pvalue) < 1e-12)
    elapsed = time.perf_counter() - t0
    ok = all(checks) and elapsed < 10
    report(7, ok, f"{sum(checks)}/{len(checks)} checks, worst Wilcoxon gap {worst:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_8_determinism(tmp_path):
    plan = BenchmarkPlan(accelerations=(4, 6), seeds=(1, 2, 3), size=48, coils=2, iterations=40)
    run_benchmark(plan, tmp_path / "a")
    run_benchmark(plan, tmp_path / "b")
    same = {name: (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
            for name in ("results.csv", "summary.csv", "wilcoxon.csv")}
    ok = all(same.values())
    report(8, ok, ", ".join(f"{k} {'identical' if v else 'differs'}" for k, v in same.items()))
    assert ok
