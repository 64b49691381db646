"""Dual data-consistency loss with TV regularization and its exact gradient.

Complex cotangents follow dL = Re(sum(conj(G) * dz)), i.e. G = dL/dRe(z) +
1j * dL/dIm(z).
"""

from dataclasses import astuple, dataclass

import numpy as np

from ._validation import check_image, check_kspace, check_same_grid
from .csm import csm_gradient, eval_csm, monomial_basis, normalize_rss, normalize_rss_backward
from .inr import InrRenderer
from .kspace import fft2c, ifft2c, make_equispaced_mask


@dataclass(frozen=True)
class LossBreakdown:
    l_dc: float
    l_prior: float
    l_tv: float
    total: float

    def as_row(self):
        return astuple(self)


def combine(l_dc, l_prior, l_tv, alpha, lambda_tv):
    """Weighted total, always evaluated in the same order."""
    return alpha * l_dc + l_prior + lambda_tv * l_tv


def loss_tv(img):
    """Anisotropic TV with forward differences and no wraparound."""
    img = check_image(img, allow_complex=False)
    return float(np.abs(np.diff(img, axis=0)).sum() + np.abs(np.diff(img, axis=1)).sum())


def tv_gradient(img):
    """Subgradient of :func:`loss_tv`, using sign(0) = 0."""
    s0 = np.sign(np.diff(img, axis=0))
    s1 = np.sign(np.diff(img, axis=1))
    g = np.zeros_like(img)
    g[1:, :] += s0
    g[:-1, :] -= s0
    g[:, 1:] += s1
    g[:, :-1] -= s1
    return g


class DualConsistencyObjective:
    """Total loss ``alpha * L_dc + L_prior + lambda * TV`` for fixed data.

    Parameters
    ----------
    y : ndarray, shape (c, H, W)
        Acquired multi-coil k-space.
    mask : SamplingMask
    prior : ndarray, shape (H, W), or None
        Prior image; ``None`` drops the prior term (DC-only mode).
    hash_config : HashGridConfig
    csm_degree : int
    alpha, lambda_tv : float
    normalize_maps : bool
        Apply RSS normalization to the polynomial maps before use.
    """

    def __init__(self, y, mask, prior, hash_config, csm_degree, alpha=0.8, lambda_tv=1e-4,
                 normalize_maps=True):
        self.y = check_kspace(y, "y")
        self.n_coils, self.height, self.width = self.y.shape
        if mask.width != self.width:
            raise ValueError(f"mask width {mask.width} does not match k-space width {self.width}")
        self.mask = mask
        self._m = mask.columns[None, None, :].astype(np.float64)
        if prior is not None:
            prior = check_image(prior, "prior").astype(np.complex128)
            check_same_grid(prior.shape, self.y.shape, "prior", "k-space")
        self.prior = prior
        self.alpha = float(alpha)
        self.lambda_tv = float(lambda_tv)
        self.normalize_maps = normalize_maps
        self.csm_degree = csm_degree
        self.renderer = InrRenderer(hash_config, self.height, self.width)
        self.hash_config = self.renderer.cfg
        self.basis = monomial_basis(csm_degree, self.height, self.width)

    def maps(self, phi):
        raw = eval_csm(phi, self.height, self.width, basis=self.basis)
        return normalize_rss(raw) if self.normalize_maps else raw

    def _check_phi(self, phi):
        if phi.n_coils != self.n_coils or phi.degree != self.csm_degree:
            raise ValueError(
                f"expected {self.n_coils} coils of degree {self.csm_degree}, got "
                f"{phi.n_coils} of degree {phi.degree}"
            )

    def _terms(self, img, maps):
        k_est = fft2c(maps * img[None])
        r_dc = self._m * k_est - self.y
        l_dc = float(np.sum(np.abs(r_dc) ** 2))
        if self.prior is None:
            r_prior = None
            l_prior = 0.0
        else:
            r_prior = fft2c(maps * self.prior[None]) - k_est
            l_prior = float(np.sum(np.abs(r_prior) ** 2))
        return l_dc, l_prior, r_dc, r_prior

    def evaluate(self, theta, phi):
        self._check_phi(phi)
        img = self.renderer.forward(theta)
        l_dc, l_prior, _, _ = self._terms(img, self.maps(phi))
        l_tv = loss_tv(img)
        return LossBreakdown(l_dc, l_prior, l_tv, combine(l_dc, l_prior, l_tv, self.alpha, self.lambda_tv))

    def value_and_grad(self, theta, phi):
        """Loss breakdown plus gradients w.r.t. ``theta`` and ``phi``."""
        self._check_phi(phi)
        img, cache = self.renderer.forward(theta, return_cache=True)
        raw = eval_csm(phi, self.height, self.width, basis=self.basis)
        maps = normalize_rss(raw) if self.normalize_maps else raw
        l_dc, l_prior, r_dc, r_prior = self._terms(img, maps)
        l_tv = loss_tv(img)
        loss = LossBreakdown(l_dc, l_prior, l_tv, combine(l_dc, l_prior, l_tv, self.alpha, self.lambda_tv))

        g_k = (2.0 * self.alpha) * self._m * r_dc
        if r_prior is not None:
            g_k = g_k - 2.0 * r_prior
        g_z = ifft2c(g_k)
        g_img = np.sum(np.real(np.conj(maps) * g_z), axis=0)
        g_maps = g_z * img[None]
        if r_prior is not None:
            g_maps = g_maps + ifft2c(2.0 * r_prior) * np.conj(self.prior)[None]
        if self.lambda_tv:
            g_img = g_img + self.lambda_tv * tv_gradient(img)

        g_theta = self.renderer.backward(theta, cache, g_img)
        if self.normalize_maps:
            g_maps = normalize_rss_backward(raw, g_maps)
        g_phi = csm_gradient(phi, g_maps, basis=self.basis)
        return loss, g_theta, g_phi


def loss_dc(theta, phi, y, mask, hash_config, normalize_maps=True):
    """Acquired k-space consistency, summed over coils and entries."""
    obj = DualConsistencyObjective(y, mask, None, hash_config, phi.degree, 1.0, 0.0, normalize_maps)
    return obj.evaluate(theta, phi).l_dc


def loss_prior(theta, phi, prior, hash_config, normalize_maps=True):
    """Full k-space distance between the coil images of the prior and of I(theta)."""
    prior = check_image(prior, "prior")
    h, w = prior.shape
    # the mask does not enter the prior term; a full one keeps shapes valid
    y = np.zeros((phi.n_coils, h, w), dtype=np.complex128)
    obj = DualConsistencyObjective(y, make_equispaced_mask(w, 1), prior, hash_config, phi.degree,
                                   0.0, 0.0, normalize_maps)
    return obj.evaluate(theta, phi).l_prior


def total_loss(theta, phi, y, mask, prior, alpha, lambda_tv, hash_config, normalize_maps=True):
    obj = DualConsistencyObjective(y, mask, prior, hash_config, phi.degree, alpha, lambda_tv,
                                   normalize_maps)
    return obj.evaluate(theta, phi)


def total_gradient(theta, phi, y, mask, prior, alpha, lambda_tv, hash_config, normalize_maps=True):
    """Gradients ``(d/dtheta, d/dphi)`` of :func:`total_loss`."""
    obj = DualConsistencyObjective(y, mask, prior, hash_config, phi.degree, alpha, lambda_tv,
                                   normalize_maps)
    _, g_theta, g_phi = obj.value_and_grad(theta, phi)
    return g_theta, g_phi

