"""Input checking helpers shared by the numerical modules."""

import numpy as np


def check_image(img, name="image", allow_complex=True):
    """Return ``img`` as a finite 2D float64/complex128 array."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        if not allow_complex:
            raise ValueError(f"{name} must be real-valued")
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_even_shape(shape, name="grid"):
    h, w = shape
    if h < 1 or w < 1 or h % 2 or w % 2:
        raise ValueError(f"{name} must have positive even height and width, got {shape}")


def check_kspace(ksp, name="kspace"):
    """Return multi-coil data as a (c, H, W) complex128 array."""
    arr = np.asarray(ksp)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[0] < 1:
        raise ValueError(f"{name} must have shape (coils, H, W), got {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_grid(a_shape, b_shape, a_name, b_name):
    if tuple(a_shape[-2:]) != tuple(b_shape[-2:]):
        raise ValueError(
            f"{a_name} grid {tuple(a_shape[-2:])} does not match {b_name} grid {tuple(b_shape[-2:])}"
        )


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
