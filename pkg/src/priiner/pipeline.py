"""File-level workflows behind the CLI: simulated datasets, persisted
reconstructions, evaluation tables and the benchmark harness."""

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from ._exceptions import DegenerateSampleError, DivergenceError
from .config import HashGridConfig
from .csm import normalize_rss
from .dataio import ensure_dir, read_json, read_npy, write_json, write_npy
from .inr import InrParams
from .kspace import zero_filled_adjoint
from .metrics import psnr, ssim, wilcoxon_signed_rank
from .optim import run_reconstruction
from .priors import PriorSpec, make_prior
from .simulate import AcquisitionSpec, PhantomSpec, acquire, make_phantom, make_synthetic_csm

logger = logging.getLogger(__name__)

TRACE_HEADER = ("iteration", "l_dc", "l_prior", "l_tv", "total")


def thread_limit():
    """Intra-reconstruction thread cap from ``PRIINER_THREADS`` (None = library default)."""
    value = os.environ.get("PRIINER_THREADS")
    return int(value) if value else None


# -- simulated datasets -----------------------------------------------------

def simulate_case(size=128, coils=4, acceleration=4, center_fraction=0.08, noise_sigma=0.0, seed=0):
    truth = make_phantom(PhantomSpec(size))
    maps = make_synthetic_csm(coils, size, size)
    y, mask = acquire(truth, maps, AcquisitionSpec(coils, acceleration, center_fraction, noise_sigma, seed))
    return truth, maps, y, mask


def write_simulation(out_dir, size=128, coils=4, acceleration=4, center_fraction=0.08,
                     noise_sigma=0.0, seed=0):
    """Write truth/maps/kspace/mask NPY files and ``manifest.json`` into ``out_dir``."""
    truth, maps, y, mask = simulate_case(size, coils, acceleration, center_fraction, noise_sigma, seed)
    ensure_dir(out_dir)
    write_npy(truth.astype(np.complex64), os.path.join(out_dir, "truth.npy"))
    write_npy(maps.astype(np.complex64), os.path.join(out_dir, "maps.npy"))
    write_npy(y.astype(np.complex64), os.path.join(out_dir, "kspace.npy"))
    write_npy(mask.to_uint8(), os.path.join(out_dir, "mask.npy"))
    write_json({
        "command": "simulate",
        "size": size, "coils": coils, "noise_sigma": noise_sigma, "seed": seed,
        "mask": mask.metadata(),
        "sampled_fraction": mask.sampled_fraction,
        "files": {"truth": "truth.npy", "maps": "maps.npy", "kspace": "kspace.npy", "mask": "mask.npy"},
    }, os.path.join(out_dir, "manifest.json"))
    return truth, maps, y, mask


# -- reconstruction results --------------------------------------------------

def trace_csv(trace):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for i, loss in enumerate(trace):
        writer.writerow([i] + [repr(float(v)) for v in loss.as_row()])
    return buf.getvalue()


def save_inr(theta, hash_config, out_dir):
    ensure_dir(out_dir)
    for name, arr in zip(InrParams.names(), theta.arrays()):
        write_npy(arr.astype(np.float32), os.path.join(out_dir, f"{name}.npy"))
    write_json({"hash_config": asdict(hash_config), "arrays": InrParams.names()},
               os.path.join(out_dir, "manifest.json"))


def load_inr(in_dir):
    manifest = read_json(os.path.join(in_dir, "manifest.json"))
    arrays = [read_npy(os.path.join(in_dir, f"{n}.npy")).astype(np.float64) for n in manifest["arrays"]]
    return InrParams(*arrays), HashGridConfig(**manifest["hash_config"])


def save_result(result, out_dir, manifest):
    """Persist a :class:`~priiner.optim.ReconResult` and its run manifest."""
    ensure_dir(out_dir)
    write_npy(result.image.astype(np.complex64), os.path.join(out_dir, "image.npy"))
    write_npy(result.maps.astype(np.complex64), os.path.join(out_dir, "maps.npy"))
    write_npy(result.phi.coeffs.astype(np.complex64), os.path.join(out_dir, "csm_coeffs.npy"))
    with open(os.path.join(out_dir, "trace.csv"), "w") as fh:
        fh.write(trace_csv(result.trace))
    manifest = dict(manifest, wall_time=result.wall_time, iterations_run=len(result.trace),
                    csm={"degree": result.phi.degree})
    if result.trace:
        manifest["final_loss"] = dict(zip(TRACE_HEADER[1:], result.trace[-1].as_row()))
    write_json(manifest, os.path.join(out_dir, "manifest.json"))


def write_pgm(img, path):
    """8-bit binary PGM (P5) of ``img`` clipped to [0, 1]."""
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    data = np.rint(arr * 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, w, h, maxval, data = raw.split(maxsplit=4)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    return np.frombuffer(data, dtype=np.uint8).reshape(int(h), int(w))


# -- evaluation ---------------------------------------------------------------

def evaluate_pairs(pairs):
    """SSIM/PSNR rows for ``(name, test, truth)`` triples plus a mean/std summary."""
    rows = []
    for name, test, truth in pairs:
        rows.append({"case": name, "ssim": ssim(test, truth), "psnr": psnr(test, truth)})
    ssims = np.array([r["ssim"] for r in rows])
    psnrs = np.array([r["psnr"] for r in rows])
    summary = {
        "n": len(rows),
        "ssim_mean": float(ssims.mean()), "ssim_std": float(ssims.std()),
        "psnr_mean": float(psnrs.mean()), "psnr_std": float(psnrs.std()),
    }
    return rows, summary


def _fmt(value):
    return f"{value:.6f}"


def rows_to_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) if isinstance(row[h], float) else row[h] for h in header])
    return buf.getvalue()


# -- benchmark ----------------------------------------------------------------

BASELINES = ("zero_filled", "dc_only")
PRIINER_PREFIX = "priiner-"
DEFAULT_METHODS = ("zero_filled", "dc_only", "priiner-lowpass_oracle")


def parse_method(method):
    """Split a method label into (mode, prior kind)."""
    if method in BASELINES:
        return method, None
    if method.startswith(PRIINER_PREFIX):
        kind = method[len(PRIINER_PREFIX):]
        if kind in ("zero_filled", "lowpass_oracle", "ground_truth_oracle"):
            return "dual", kind
    raise ValueError(
        f"unknown method {method!r}; use zero_filled, dc_only or priiner-<zero_filled|"
        "lowpass_oracle|ground_truth_oracle>"
    )


@dataclass(frozen=True)
class BenchmarkPlan:
    """Grid of (acceleration, method, seed) cells on the simulated phantom.

    ``zero_filled`` and ``dc_only`` are the baselines; ``priiner-<kind>``
    runs the dual-consistency reconstruction with that prior kind.
    """

    accelerations: tuple = (4, 6, 8, 10)
    methods: tuple = DEFAULT_METHODS
    seeds: tuple = (1, 2, 3, 4, 5)
    size: int = 128
    coils: int = 4
    center_fraction: float = 0.08
    noise_sigma: float = 0.015
    iterations: int = 1000
    alpha: float = 0.8
    lambda_tv: float = 1e-4
    learning_rate: float = 1e-2
    csm_degree: int = 3
    lowpass_fraction: float = 0.25
    hash_config: HashGridConfig = field(default_factory=HashGridConfig)

    def __post_init__(self):
        if not self.accelerations or not self.methods or not self.seeds:
            raise ValueError("accelerations, methods and seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if any(r < 1 for r in self.accelerations):
            raise ValueError("accelerations must be >= 1")
        for m in self.methods:
            parse_method(m)

    def cells(self):
        return [(r, m, s) for r in self.accelerations for m in self.methods for s in self.seeds]


def run_cell(plan, acceleration, method, seed):
    """Simulate one case and reconstruct it with ``method``; returns the metric row and images."""
    mode, kind = parse_method(method)
    truth, maps, y, mask = simulate_case(plan.size, plan.coils, acceleration, plan.center_fraction,
                                         plan.noise_sigma, seed)
    if mode == "zero_filled":
        image = np.abs(zero_filled_adjoint(y, maps, mask))
        iterations_run = 0
    else:
        prior = None
        if mode == "dual":
            csm0 = normalize_rss(np.ones((plan.coils, plan.size, plan.size), dtype=np.complex128))
            prior = make_prior(PriorSpec(kind, keep_fraction=plan.lowpass_fraction), y, mask, csm0, truth)
        with threadpool_limits(limits=thread_limit()):
            result = run_reconstruction(
                y, mask, prior, hash_config=plan.hash_config, csm_degree=plan.csm_degree,
                alpha=plan.alpha, lambda_tv=plan.lambda_tv, learning_rate=plan.learning_rate,
                iterations=plan.iterations, seed=seed,
            )
        image = np.abs(result.intensities)
        iterations_run = len(result.trace)
    truth_mag = np.abs(truth)
    row = {
        "acceleration": acceleration, "method": method, "seed": seed,
        "ssim": ssim(image, truth_mag), "psnr": psnr(image, truth_mag),
        "iterations": iterations_run, "status": "ok",
    }
    return row, image, truth_mag


def _run_cell_safe(args):
    plan, acceleration, method, seed = args
    try:
        row, image, truth = run_cell(plan, acceleration, method, seed)
        return row, image, truth
    except (DivergenceError, ValueError, FloatingPointError) as exc:
        logger.warning("cell R=%s %s seed=%s failed: %s", acceleration, method, seed, exc)
        row = {"acceleration": acceleration, "method": method, "seed": seed,
               "ssim": float("nan"), "psnr": float("nan"), "iterations": 0,
               "status": f"failed: {type(exc).__name__}"}
        return row, None, None


RESULT_HEADER = ("acceleration", "method", "seed", "ssim", "psnr", "iterations", "status")
SUMMARY_HEADER = ("acceleration", "method", "n", "ssim_mean", "ssim_std", "psnr_mean", "psnr_std")
WILCOXON_HEADER = ("scope", "method_a", "method_b", "n", "p_ssim", "p_psnr")


def summarize(rows, plan):
    summary = []
    for r in plan.accelerations:
        for m in plan.methods:
            ok = [x for x in rows if x["acceleration"] == r and x["method"] == m and x["status"] == "ok"]
            if not ok:
                continue
            s = np.array([x["ssim"] for x in ok])
            p = np.array([x["psnr"] for x in ok])
            summary.append({"acceleration": r, "method": m, "n": len(ok),
                            "ssim_mean": float(s.mean()), "ssim_std": float(s.std()),
                            "psnr_mean": float(p.mean()), "psnr_std": float(p.std())})
    return summary


def paired_tests(rows, plan):
    """Wilcoxon p-values for every method pair, per acceleration and pooled."""
    ok = {(x["acceleration"], x["method"], x["seed"]): x for x in rows if x["status"] == "ok"}
    scopes = [(str(r), [r]) for r in plan.accelerations]
    if len(plan.accelerations) > 1:
        scopes.append(("all", list(plan.accelerations)))
    out = []
    methods = list(plan.methods)
    for scope, accs in scopes:
        for i, ma in enumerate(methods):
            for mb in methods[i + 1:]:
                keys = [(r, s) for r in accs for s in plan.seeds
                        if (r, ma, s) in ok and (r, mb, s) in ok]
                entry = {"scope": scope, "method_a": ma, "method_b": mb, "n": len(keys)}
                for metric in ("ssim", "psnr"):
                    a = [ok[(r, ma, s)][metric] for r, s in keys]
                    b = [ok[(r, mb, s)][metric] for r, s in keys]
                    try:
                        entry[f"p_{metric}"] = wilcoxon_signed_rank(a, b)
                    except DegenerateSampleError:
                        entry[f"p_{metric}"] = "NA"
                out.append(entry)
    return out


def run_benchmark(plan, out_dir, jobs=1):
    """Run every cell of ``plan`` and write the report files into ``out_dir``.

    Returns ``(rows, summary, tests)``. Cells run in up to ``jobs`` worker
    processes; results are ordered by cell, so reports do not depend on
    scheduling.
    """
    ensure_dir(out_dir)
    img_dir = ensure_dir(os.path.join(out_dir, "images"))
    cells = [(plan,) + c for c in plan.cells()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_cell_safe, cells))
    else:
        outputs = [_run_cell_safe(c) for c in cells]
    rows = []
    for row, image, truth in outputs:
        rows.append(row)
        if image is None:
            continue
        stem = f"R{row['acceleration']:02d}_{row['method']}_seed{row['seed']}"
        write_pgm(image, os.path.join(img_dir, f"{stem}_recon.pgm"))
        write_pgm(np.abs(image - truth), os.path.join(img_dir, f"{stem}_diff.pgm"))
    summary = summarize(rows, plan)
    tests = paired_tests(rows, plan)
    with open(os.path.join(out_dir, "results.csv"), "w") as fh:
        fh.write(rows_to_csv(RESULT_HEADER, rows))
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        fh.write(rows_to_csv(SUMMARY_HEADER, summary))
    with open(os.path.join(out_dir, "wilcoxon.csv"), "w") as fh:
        fh.write(rows_to_csv(WILCOXON_HEADER, tests))
    plan_dict = asdict(plan)
    write_json({"command": "benchmark", "plan": plan_dict, "jobs": jobs,
                "files": ["results.csv", "summary.csv", "wilcoxon.csv", "images/"]},
               os.path.join(out_dir, "manifest.json"))
    return rows, summary, tests
