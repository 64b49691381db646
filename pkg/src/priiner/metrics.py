"""PSNR, SSIM and the paired Wilcoxon signed-rank test."""

import math

import numpy as np
from scipy import ndimage, stats

from ._exceptions import DegenerateSampleError

PSNR_CAP = 100.0


def _pair(test, truth):
    test = np.abs(np.asarray(test)) if np.iscomplexobj(test) else np.asarray(test, dtype=np.float64)
    truth = np.abs(np.asarray(truth)) if np.iscomplexobj(truth) else np.asarray(truth, dtype=np.float64)
    if test.shape != truth.shape:
        raise ValueError(f"shape mismatch: {test.shape} vs {truth.shape}")
    return test.astype(np.float64), truth.astype(np.float64)


def psnr(test, truth):
    """``10 log10(max(truth)^2 / MSE)`` in dB, capped at 100 for identical inputs.

    Complex inputs are compared by magnitude.
    """
    test, truth = _pair(test, truth)
    peak = truth.max()
    if peak <= 0:
        raise ValueError("truth image must have a positive maximum")
    mse = np.mean((test - truth) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(peak**2 / mse)))


def _gaussian_window(size=11, sigma=1.5):
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(test, truth, data_range=None, win_size=11, sigma=1.5, k1=0.01, k2=0.03):
    """Mean SSIM over all fully contained 11x11 Gaussian windows.

    ``data_range`` defaults to ``max(truth) - min(truth)``; a constant truth
    image then falls back to ``max(truth)`` (or 1 when that is 0).
    """
    test, truth = _pair(test, truth)
    if min(test.shape) < win_size:
        raise ValueError(f"images must be at least {win_size}x{win_size}, got {test.shape}")
    if data_range is None:
        data_range = truth.max() - truth.min()
        if data_range == 0:
            data_range = truth.max() or 1.0
    win = _gaussian_window(win_size, sigma)
    half = win_size // 2

    def filt(img):
        out = ndimage.correlate(img, win, mode="constant")
        return out[half:img.shape[0] - half, half:img.shape[1] - half]

    mu_x, mu_y = filt(test), filt(truth)
    sxx = filt(test * test) - mu_x**2
    syy = filt(truth * truth) - mu_y**2
    sxy = filt(test * truth) - mu_x * mu_y
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.clip(np.mean(num / den), -1.0, 1.0))


def _signed_rank_stat(diffs):
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0]
    ranks = stats.rankdata(np.abs(d))
    return d, ranks, float(ranks[d > 0].sum())


def _exact_null_counts(ranks):
    """Counts of sign assignments per achievable doubled rank sum."""
    doubled = np.rint(2 * ranks).astype(np.int64)
    counts = np.zeros(doubled.sum() + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r] if r else counts
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(a, b):
    """Two-sided p-value of the paired Wilcoxon signed-rank test on ``a - b``.

    Zero differences are dropped. Up to 20 non-zero pairs the null
    distribution is enumerated exactly (ties handled through mid-ranks);
    beyond that the tie-corrected normal approximation is used.

    Raises
    ------
    DegenerateSampleError
        Fewer than 5 pairs, unequal lengths or all differences zero.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DegenerateSampleError("paired samples must be 1D and of equal length")
    if a.size < 5:
        raise DegenerateSampleError(f"need at least 5 pairs, got {a.size}")
    d, ranks, w_plus = _signed_rank_stat(a - b)
    n = d.size
    if n == 0:
        raise DegenerateSampleError("all paired differences are zero")
    if n <= 20:
        counts = _exact_null_counts(ranks)
        total = 2**n
        w2 = int(round(2 * w_plus))
        lower = sum(counts[: w2 + 1])
        upper = sum(counts[w2:])
        p = 2 * min(lower, upper) / total
        return float(min(1.0, p))
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    z = (w_plus - mean) / math.sqrt(var)
    return float(min(1.0, 2 * stats.norm.sf(abs(z))))
