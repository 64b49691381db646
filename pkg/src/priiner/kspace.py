"""Centered unitary FFTs, equispaced Cartesian masks and the multi-coil
acquisition operator with its adjoint."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_image, check_kspace, check_same_grid

_AXES = (-2, -1)


def fft2c(img):
    """Centered orthonormal 2D DFT over the last two axes (DC at H/2, W/2)."""
    x = np.fft.ifftshift(img, axes=_AXES)
    return np.fft.fftshift(np.fft.fft2(x, axes=_AXES, norm="ortho"), axes=_AXES)


def ifft2c(ksp):
    """Inverse of :func:`fft2c`."""
    x = np.fft.ifftshift(ksp, axes=_AXES)
    return np.fft.fftshift(np.fft.ifft2(x, axes=_AXES, norm="ortho"), axes=_AXES)


def round_half_up(x):
    return int(np.floor(x + 0.5))


def center_block(n, fraction):
    """Index slice of the ``round(fraction * n)`` entries centred on ``n // 2``."""
    n_c = max(1, round_half_up(fraction * n))
    start = n // 2 - n_c // 2
    return slice(start, start + n_c)


@dataclass(frozen=True, eq=False)
class SamplingMask:
    """Column-structured Cartesian sampling pattern.

    ``columns`` is a boolean vector of length W; every row shares it.
    """

    columns: np.ndarray
    acceleration: int
    center_fraction: float

    @property
    def width(self):
        return self.columns.shape[0]

    @property
    def sampled_fraction(self):
        return float(self.columns.mean())

    def as_array(self, height):
        return np.broadcast_to(self.columns[None, :], (height, self.width))

    def to_uint8(self):
        return self.columns.astype(np.uint8)

    def metadata(self):
        return {"acceleration": self.acceleration, "center_fraction": self.center_fraction}

    @classmethod
    def from_uint8(cls, columns, acceleration, center_fraction):
        cols = np.asarray(columns).reshape(-1).astype(bool)
        if not cols.any():
            raise ValueError("mask samples no columns")
        return cls(cols, int(acceleration), float(center_fraction))

    def __eq__(self, other):
        return (
            isinstance(other, SamplingMask)
            and np.array_equal(self.columns, other.columns)
            and self.acceleration == other.acceleration
            and self.center_fraction == other.center_fraction
        )


def make_equispaced_mask(width, acceleration, center_fraction=0.08):
    """Equispaced column mask with a fully sampled centre.

    The centre holds ``round(center_fraction * width)`` (half rounded up)
    columns placed symmetrically about ``width // 2``; outside it every
    ``acceleration``-th column starting at 0 is kept.
    """
    if isinstance(width, bool) or int(width) != width or width < 1:
        raise ValueError(f"width must be a positive integer, got {width!r}")
    if isinstance(acceleration, bool) or int(acceleration) != acceleration or acceleration < 1:
        raise ValueError(f"acceleration must be a positive integer, got {acceleration!r}")
    if not 0 < center_fraction <= 1:
        raise ValueError(f"center_fraction must lie in (0, 1], got {center_fraction!r}")
    width, acceleration = int(width), int(acceleration)
    cols = np.zeros(width, dtype=bool)
    cols[::acceleration] = True
    cols[center_block(width, center_fraction)] = True
    return SamplingMask(cols, acceleration, float(center_fraction))


def _check_operands(img_shape, csm, mask):
    csm = np.asarray(csm)
    if csm.ndim != 3:
        raise ValueError(f"coil maps must have shape (coils, H, W), got {csm.shape}")
    check_same_grid(img_shape, csm.shape, "image", "coil maps")
    if mask.width != img_shape[-1]:
        raise ValueError(f"mask width {mask.width} does not match image width {img_shape[-1]}")
    return csm


def forward_model(img, csm, mask):
    """Multi-coil acquisition ``y_j = M * F(S_j * x)`` without noise."""
    img = check_image(img)
    csm = _check_operands(img.shape, csm, mask)
    return fft2c(csm * img[None]) * mask.columns[None, None, :]


def zero_filled_adjoint(ksp, csm, mask):
    """Adjoint of :func:`forward_model`: ``sum_j conj(S_j) * F^-1(M * y_j)``."""
    ksp = check_kspace(ksp)
    csm = _check_operands(ksp.shape, csm, mask)
    if csm.shape[0] != ksp.shape[0]:
        raise ValueError(f"{ksp.shape[0]} coils of data but {csm.shape[0]} coil maps")
    coil_imgs = ifft2c(ksp * mask.columns[None, None, :])
    return np.sum(np.conj(csm) * coil_imgs, axis=0)
