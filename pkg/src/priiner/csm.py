"""Coil sensitivity maps as complex bivariate polynomials."""

import numpy as np

from ._exceptions import DegenerateMapsError


def n_monomials(degree):
    return (degree + 1) * (degree + 2) // 2


def monomial_exponents(degree):
    """Exponent pairs (p, q) with p + q <= degree, graded then by p descending."""
    return [(total - q, q) for total in range(degree + 1) for q in range(total + 1)]


def pixel_coordinates(height, width):
    """Pixel-centre coordinates in [0, 1]^2, shape (H*W, 2), row-major.

    Column 0 is the row coordinate u, column 1 the column coordinate v.
    """
    u = (np.arange(height) + 0.5) / height
    v = (np.arange(width) + 0.5) / width
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return np.stack([uu.ravel(), vv.ravel()], axis=1)


def monomial_basis(degree, height, width):
    """Real design matrix (H*W, n_monomials) of u**p * v**q at pixel centres."""
    coords = pixel_coordinates(height, width)
    u, v = coords[:, 0], coords[:, 1]
    return np.stack([u**p * v**q for p, q in monomial_exponents(degree)], axis=1)


class CsmParams:
    """Per-coil complex polynomial coefficients, shape (coils, n_monomials)."""

    def __init__(self, coeffs, degree, check_finite=True):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != 2 or coeffs.shape[1] != n_monomials(degree):
            raise ValueError(
                f"expected coefficients of shape (coils, {n_monomials(degree)}) for degree "
                f"{degree}, got {coeffs.shape}"
            )
        if check_finite and not np.all(np.isfinite(coeffs)):
            raise ValueError("coil polynomial coefficients must be finite")
        self.coeffs = coeffs
        self.degree = int(degree)

    @property
    def n_coils(self):
        return self.coeffs.shape[0]

    @classmethod
    def uniform(cls, n_coils, degree):
        """Constant maps 1/sqrt(c) per coil, already RSS-normalized."""
        coeffs = np.zeros((n_coils, n_monomials(degree)), dtype=np.complex128)
        coeffs[:, 0] = 1.0 / np.sqrt(n_coils)
        return cls(coeffs, degree)

    def copy(self):
        return CsmParams(self.coeffs.copy(), self.degree)


def eval_csm(params, height, width, basis=None):
    """Evaluate the polynomial maps on an H x W pixel grid (not normalized).

    ``basis`` may carry a precomputed :func:`monomial_basis` to skip rebuilding
    the design matrix inside optimization loops.
    """
    if basis is None:
        basis = monomial_basis(params.degree, height, width)
    return (params.coeffs @ basis.T).reshape(params.n_coils, height, width)


def _rss(maps):
    return np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))


def normalize_rss(maps):
    """Divide every pixel by the root-sum-of-squares over coils."""
    maps = np.asarray(maps)
    rss = _rss(maps)
    if np.any(rss == 0):
        raise DegenerateMapsError(f"{int(np.sum(rss == 0))} pixel(s) have zero coil RSS")
    return maps / rss[None]


def normalize_rss_backward(maps, upstream):
    """Pull a cotangent on ``normalize_rss(maps)`` back onto ``maps``.

    Cotangents use the convention dL = Re(sum(conj(G) * dz)).
    """
    rss = _rss(maps)
    proj = np.sum(np.real(np.conj(upstream) * maps), axis=0)
    return upstream / rss[None] - maps * (proj / rss**3)[None]


def csm_gradient(params, upstream, basis=None):
    """Gradient w.r.t. the coefficients given a cotangent on ``eval_csm``.

    Evaluation is linear in the coefficients with a real design matrix, so
    the pull-back is a single matrix product.
    """
    upstream = np.asarray(upstream)
    if upstream.ndim != 3 or upstream.shape[0] != params.n_coils:
        raise ValueError(
            f"upstream must have shape ({params.n_coils}, H, W), got {upstream.shape}"
        )
    c, h, w = upstream.shape
    if basis is None:
        basis = monomial_basis(params.degree, h, w)
    # cotangents may legitimately be non-finite; the optimizer reports that
    return CsmParams(upstream.reshape(c, h * w) @ basis, params.degree, check_finite=False)
