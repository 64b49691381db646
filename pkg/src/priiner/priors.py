"""Prior image providers for the prior-consistency term."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_image, check_same_grid
from .config import PRIOR_KINDS
from .dataio import read_npy
from .kspace import center_block, fft2c, ifft2c, zero_filled_adjoint


@dataclass(frozen=True)
class PriorSpec:
    kind: str
    path: str | None = None
    keep_fraction: float = 0.25

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"prior kind must be one of {PRIOR_KINDS}, got {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ValueError("file prior needs a path")
        if not 0 < self.keep_fraction <= 1:
            raise ValueError("keep_fraction must lie in (0, 1]")


def lowpass(img, keep_fraction):
    """Keep the centred block holding ``keep_fraction`` of all k-space entries.

    The block spans ``sqrt(keep_fraction)`` of each axis; everything outside
    it is set exactly to zero.
    """
    ksp = fft2c(img)
    kept = np.zeros_like(ksp)
    side = np.sqrt(keep_fraction)
    rows = center_block(ksp.shape[0], side)
    cols = center_block(ksp.shape[1], side)
    kept[rows, cols] = ksp[rows, cols]
    return ifft2c(kept)


def make_prior(spec, y, mask, csm0, truth=None):
    """Produce the prior image for ``spec``.

    ``truth`` is required by the oracle kinds and ignored otherwise. File
    priors may be real (promoted to zero phase) or complex.
    """
    h, w = np.shape(y)[-2:]
    if spec.kind == "file":
        prior = read_npy(spec.path)
        prior = check_image(prior, "prior file").astype(np.complex128)
    elif spec.kind == "zero_filled":
        prior = zero_filled_adjoint(y, csm0, mask)
    else:
        if truth is None:
            raise ValueError(f"prior kind {spec.kind!r} needs the ground-truth image")
        truth = check_image(truth, "truth").astype(np.complex128)
        prior = truth.copy() if spec.kind == "ground_truth_oracle" else lowpass(truth, spec.keep_fraction)
    check_same_grid(prior.shape, (h, w), "prior", "k-space")
    return prior
