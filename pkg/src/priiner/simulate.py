"""Synthetic test data: Shepp-Logan phantom, smooth coil maps, undersampled
multi-coil acquisition with optional complex Gaussian noise."""

from dataclasses import dataclass, field

import numpy as np

from .csm import normalize_rss, pixel_coordinates
from .kspace import forward_model, make_equispaced_mask


@dataclass(frozen=True)
class Ellipse:
    """Ellipse in image coordinates: ``center`` is (u, v) with u the row
    coordinate (downwards) and v the column coordinate, both in [0, 1].
    ``semi_axes`` are (horizontal, vertical) half-lengths in the same units and
    ``angle`` rotates counter-clockwise in radians."""

    center: tuple
    semi_axes: tuple
    angle: float
    intensity: float

    def contains(self, u, v):
        dv = v - self.center[1]
        du = self.center[0] - u
        c, s = np.cos(self.angle), np.sin(self.angle)
        x = dv * c + du * s
        y = -dv * s + du * c
        return (x / self.semi_axes[0]) ** 2 + (y / self.semi_axes[1]) ** 2 <= 1.0


# (x0, y0, a, b, angle in degrees, intensity) on [-1, 1]^2 with y pointing up;
# the contrast-enhanced table whose sums stay in [0, 1].
_SHEPP_LOGAN = [
    (0.0, 0.0, 0.69, 0.92, 0.0, 1.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.2),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.2),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.1),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.1),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.1),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.1),
    (0.0, -0.605, 0.023, 0.023, 0.0, 0.1),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.1),
]


def shepp_logan_ellipses():
    return [
        Ellipse(((1.0 - y0) / 2, (x0 + 1.0) / 2), (a / 2, b / 2), np.deg2rad(deg), rho)
        for x0, y0, a, b, deg, rho in _SHEPP_LOGAN
    ]


@dataclass(frozen=True)
class PhantomSpec:
    size: int = 128
    ellipses: list = field(default_factory=shepp_logan_ellipses)

    def __post_init__(self):
        if self.size < 2 or self.size % 2:
            raise ValueError(f"phantom size must be a positive even integer, got {self.size}")


def make_phantom(spec=None):
    """Sum of ellipse intensities at each pixel centre, as a complex image."""
    spec = PhantomSpec() if spec is None else spec
    n = spec.size
    coords = pixel_coordinates(n, n)
    img = np.zeros(n * n)
    for ellipse in spec.ellipses:
        img[ellipse.contains(coords[:, 0], coords[:, 1])] += ellipse.intensity
    return img.reshape(n, n).astype(np.complex128)


def make_synthetic_csm(n_coils, height, width, width_sigma=0.5, radius=0.5, phase_slope=np.pi / 2):
    """Gaussian-bump coil profiles around the image with linear phase, RSS-normalized.

    Coil j sits at angle 2*pi*j/c on a circle of ``radius`` about the image
    centre (0.5 reaches the border midpoints).
    """
    if n_coils < 1:
        raise ValueError("need at least one coil")
    coords = pixel_coordinates(height, width)
    u, v = coords[:, 0] - 0.5, coords[:, 1] - 0.5
    maps = np.empty((n_coils, height * width), dtype=np.complex128)
    for j in range(n_coils):
        ang = 2 * np.pi * j / n_coils
        cu, cv = radius * np.sin(ang), radius * np.cos(ang)
        mag = np.exp(-((u - cu) ** 2 + (v - cv) ** 2) / (2 * width_sigma**2))
        phase = ang + phase_slope * (u * np.sin(ang) + v * np.cos(ang))
        maps[j] = mag * np.exp(1j * phase)
    return normalize_rss(maps.reshape(n_coils, height, width))


@dataclass(frozen=True)
class AcquisitionSpec:
    coils: int = 4
    acceleration: int = 4
    center_fraction: float = 0.08
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.coils < 1:
            raise ValueError("coils must be >= 1")
        if self.acceleration < 1:
            raise ValueError("acceleration must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def acquire(img, csm, acq):
    """Retrospectively undersample: ``y = M * (F(S x) + noise)``.

    Noise is circular complex Gaussian with E|n|^2 = noise_sigma^2, drawn for
    every entry from ``acq.seed`` and then masked.
    """
    img = np.asarray(img)
    mask = make_equispaced_mask(img.shape[1], acq.acceleration, acq.center_fraction)
    y = forward_model(img, csm, mask)
    if acq.noise_sigma > 0:
        rng = np.random.default_rng(acq.seed)
        scale = acq.noise_sigma / np.sqrt(2.0)
        noise = rng.normal(scale=scale, size=y.shape) + 1j * rng.normal(scale=scale, size=y.shape)
        y = y + noise * mask.columns[None, None, :]
    return y, mask
