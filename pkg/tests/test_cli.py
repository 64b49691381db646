import csv
import json
import os

import numpy as np
import pytest

from priiner import read_npy
from priiner.cli import main
from priiner.pipeline import BenchmarkPlan, read_pgm, run_benchmark

SIM_FILES = {"truth.npy", "maps.npy", "kspace.npy", "mask.npy", "manifest.json"}
FAST_HASH = {"levels": 4, "table_size": 256, "base_resolution": 4}


def _simulate(tmp_path, *extra):
    out = tmp_path / "sim"
    code = main(["simulate", "--size", "32", "--coils", "2", "--acceleration", "4", "--seed", "7",
                 "--out", str(out), *extra])
    return code, out


def test_simulate_writes_file_set(tmp_path):
    code, out = _simulate(tmp_path)
    assert code == 0
    assert set(os.listdir(out)) == SIM_FILES
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mask"] == {"acceleration": 4, "center_fraction": 0.08}
    assert read_npy(out / "kspace.npy").shape == (2, 32, 32)
    assert read_npy(out / "mask.npy").dtype == np.uint8


def test_simulate_default_size_contract(tmp_path):
    out = tmp_path / "d"
    assert main(["simulate", "--size", "128", "--coils", "4", "--acceleration", "4", "--seed", "7",
                 "--out", str(out)]) == 0
    assert len(os.listdir(out)) == 5


def test_simulate_rejects_zero_acceleration(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--acceleration", "0", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    assert "acceleration" in capsys.readouterr().err


def test_simulate_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        main(["simulate", "--size", "32", "--noise", "0.05", "--seed", "3", "--out", str(out)])
    for name in SIM_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def _config(tmp_path, sim, **kw):
    cfg = {"acceleration": 4, "iterations": 5, "hash_config": FAST_HASH,
           "kspace_path": str(sim / "kspace.npy"), "mask_path": str(sim / "mask.npy"),
           "truth_path": str(sim / "truth.npy"), "prior_kind": "lowpass_oracle",
           "output_dir": str(tmp_path / "rec")}
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_reconstruct_contract(tmp_path, capsys):
    _, sim = _simulate(tmp_path)
    cfg = _config(tmp_path, sim)
    assert main(["reconstruct", "--config", str(cfg)]) == 0
    out = tmp_path / "rec"
    assert {"image.npy", "maps.npy", "csm_coeffs.npy", "trace.csv", "manifest.json", "inr"} <= set(os.listdir(out))
    rows = list(csv.reader(open(out / "trace.csv")))
    assert rows[0] == ["iteration", "l_dc", "l_prior", "l_tv", "total"]
    assert len(rows) == 1 + 5
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["prior"]["kind"] == "lowpass_oracle"
    assert manifest["csm"] == {"degree": 3}
    assert "SSIM" in capsys.readouterr().out
    assert read_npy(out / "inr" / "tables.npy").dtype == np.float32


def test_reconstruct_prior_kind_override(tmp_path):
    _, sim = _simulate(tmp_path)
    cfg = _config(tmp_path, sim)
    kinds = {}
    for kind in ("zero_filled", "lowpass_oracle"):
        out = tmp_path / kind
        assert main(["reconstruct", "--config", str(cfg), "--prior-kind", kind, "--out", str(out)]) == 0
        kinds[kind] = json.loads((out / "manifest.json").read_text())["prior"]["kind"]
    assert kinds == {"zero_filled": "zero_filled", "lowpass_oracle": "lowpass_oracle"}


def test_reconstruct_single_iteration(tmp_path):
    _, sim = _simulate(tmp_path)
    cfg = _config(tmp_path, sim, iterations=1)
    assert main(["reconstruct", "--config", str(cfg)]) == 0
    assert len((tmp_path / "rec" / "trace.csv").read_text().splitlines()) == 2


def test_reconstruct_dc_only_and_file_prior(tmp_path):
    _, sim = _simulate(tmp_path)
    cfg = _config(tmp_path, sim, prior_kind="file", prior_path=str(sim / "truth.npy"))
    assert main(["reconstruct", "--config", str(cfg)]) == 0
    assert main(["reconstruct", "--config", str(cfg), "--dc-only", "--out", str(tmp_path / "dc")]) == 0
    manifest = json.loads((tmp_path / "dc" / "manifest.json").read_text())
    assert manifest["mode"] == "dc_only"


def test_reconstruct_missing_input(tmp_path):
    _, sim = _simulate(tmp_path)
    cfg = _config(tmp_path, sim, kspace_path=str(tmp_path / "nope.npy"))
    assert main(["reconstruct", "--config", str(cfg)]) == 1


def test_reconstruct_bad_config(tmp_path, capsys):
    _, sim = _simulate(tmp_path)
    cfg = _config(tmp_path, sim, alpha=-1)
    assert main(["reconstruct", "--config", str(cfg)]) == 2
    assert "alpha" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_reconstruct_divergence_exit_code(tmp_path):
    _, sim = _simulate(tmp_path)
    huge = tmp_path / "huge.npy"
    np.save(huge, (read_npy(sim / "kspace.npy").astype(np.complex128) * 1e300))
    cfg = _config(tmp_path, sim, kspace_path=str(huge), prior_kind="file",
                  prior_path=str(huge.with_name("p.npy")))
    np.save(huge.with_name("p.npy"), np.full((32, 32), 1e300))
    assert main(["reconstruct", "--config", str(cfg)]) == 3
    assert (tmp_path / "rec" / "trace.csv").exists()


def test_evaluate_files_and_dirs(tmp_path):
    truth = np.random.default_rng(0).uniform(size=(16, 16))
    for sub in ("a", "b"):
        (tmp_path / sub).mkdir()
    np.save(tmp_path / "a" / "x.npy", truth + 0.01)
    np.save(tmp_path / "b" / "x.npy", truth)
    np.save(tmp_path / "a" / "y.npy", truth)
    np.save(tmp_path / "b" / "y.npy", truth)
    assert main(["evaluate", "--test", str(tmp_path / "a"), "--truth", str(tmp_path / "b"),
                 "--out", str(tmp_path / "ev")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "ev" / "metrics.csv")))
    assert [r["case"] for r in rows] == ["x.npy", "y.npy"]
    assert float(rows[1]["psnr"]) == 100.0
    summary = json.loads((tmp_path / "ev" / "summary.json").read_text())
    assert summary["n"] == 2 and {"ssim_mean", "ssim_std", "psnr_mean", "psnr_std"} <= set(summary)
    assert main(["evaluate", "--test", str(tmp_path / "a" / "x.npy"), "--truth",
                 str(tmp_path / "b" / "x.npy"), "--out", str(tmp_path / "ev1")]) == 0


def test_benchmark_single_cell(tmp_path):
    out = tmp_path / "bench"
    code = main(["benchmark", "--accelerations", "4", "--methods", "zero_filled", "--seeds", "1",
                 "--size", "32", "--out", str(out)])
    assert code == 0
    summary = list(csv.DictReader(open(out / "summary.csv")))
    assert len(summary) == 1
    assert summary[0]["method"] == "zero_filled"
    diff = read_pgm(out / "images" / "R04_zero_filled_seed1_diff.pgm")
    assert diff.shape == (32, 32)


def test_benchmark_rejects_unknown_method(tmp_path):
    assert main(["benchmark", "--methods", "magic", "--out", str(tmp_path / "b")]) == 2


def test_benchmark_small_plan_tables(tmp_path):
    plan = BenchmarkPlan(accelerations=(4, 6), methods=("zero_filled", "dc_only", "priiner-lowpass_oracle"),
                         seeds=(1, 2, 3, 4, 5), size=16, coils=2, iterations=3)
    rows, summary, tests = run_benchmark(plan, tmp_path / "b")
    assert len(rows) == 30 and all(r["status"] == "ok" for r in rows)
    assert len(summary) == 6
    pooled = [t for t in tests if t["scope"] == "all"]
    assert len(pooled) == 3 and all(t["n"] == 10 for t in pooled)
