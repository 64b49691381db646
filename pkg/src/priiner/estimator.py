"""scikit-learn style front end for the reconstruction."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_even_shape, check_image, check_kspace, check_same_grid
from .config import HashGridConfig, ReconConfig
from .inr import HashEncoder, mlp_forward
from .kspace import SamplingMask
from .optim import run_reconstruction


def check_mask(mask, width):
    """Coerce ``mask`` to a :class:`SamplingMask` of the given width.

    Accepts a SamplingMask, a length-W column vector, or an (H, W) array whose
    rows are all equal.
    """
    if isinstance(mask, SamplingMask):
        cols = mask.columns
    else:
        arr = np.asarray(mask)
        if arr.ndim == 2:
            if not np.all(arr == arr[:1]):
                raise ValueError("2D masks must be column-structured (identical rows)")
            arr = arr[0]
        if arr.ndim != 1:
            raise ValueError(f"mask must be 1D over columns, got shape {arr.shape}")
        cols = arr.astype(bool)
        n = int(cols.sum())
        mask = SamplingMask(cols, max(1, round(cols.size / n)) if n else 0, float("nan"))
    if cols.shape[0] != width:
        raise ValueError(f"mask width {cols.shape[0]} does not match k-space width {width}")
    if not cols.any():
        raise ValueError("mask samples no columns")
    return mask


class PriorInformedINR(BaseEstimator):
    """Instance-wise INR reconstruction with dual data consistency.

    A hash-grid encoded ReLU MLP renders the real image and polynomial coil
    maps are fitted alongside it with Adam, minimising
    ``alpha * ||y - M F(S I)||^2 + ||F(S x_prior) - F(S I)||^2 + lambda_tv * TV(I)``.

    Parameters
    ----------
    alpha : float, default=0.8
        Weight of the acquired-data term.
    lambda_tv : float, default=1e-4
        Weight of the anisotropic total variation of the rendered image.
    learning_rate : float, default=1e-2
    iterations : int, default=1000
        Full-batch Adam steps.
    csm_degree : int, default=3
        Total degree of the coil-map polynomials.
    hash_config : HashGridConfig or None
        ``None`` uses the defaults (16 levels, 2 features, 2**14 entries,
        base resolution 16, finest resolution max(H, W)).
    dc_only : bool, default=False
        Ignore any prior and fit the acquired data only.
    early_stop : bool, default=False
        Stop once the loss improves less than 1e-6 (relative) over 50 steps.
    random_state : int, default=0
        Seed for the INR initialisation.

    Attributes
    ----------
    image_ : ndarray of shape (H, W)
        Magnitude of the rendered image.
    intensities_ : ndarray of shape (H, W)
        Signed INR output before taking the magnitude.
    coil_maps_ : ndarray of shape (c, H, W)
        RSS-normalized fitted coil maps.
    theta_, phi_ : InrParams, CsmParams
    loss_trace_ : list of LossBreakdown
    n_iter_ : int
    wall_time_ : float
    """

    def __init__(self, alpha=0.8, lambda_tv=1e-4, learning_rate=1e-2, iterations=1000,
                 csm_degree=3, hash_config=None, dc_only=False, early_stop=False,
                 random_state=0):
        self.alpha = alpha
        self.lambda_tv = lambda_tv
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.csm_degree = csm_degree
        self.hash_config = hash_config
        self.dc_only = dc_only
        self.early_stop = early_stop
        self.random_state = random_state

    @classmethod
    def from_config(cls, cfg: ReconConfig):
        return cls(alpha=cfg.alpha, lambda_tv=cfg.lambda_tv, learning_rate=cfg.learning_rate,
                   iterations=cfg.iterations, csm_degree=cfg.csm_degree,
                   hash_config=cfg.hash_config, dc_only=cfg.dc_only,
                   early_stop=cfg.early_stop, random_state=cfg.seed)

    def _validate_hyperparameters(self):
        # ReconConfig carries the field-level checks
        ReconConfig(acceleration=1, alpha=self.alpha, lambda_tv=self.lambda_tv,
                    learning_rate=self.learning_rate, iterations=self.iterations,
                    seed=self.random_state, csm_degree=self.csm_degree,
                    hash_config=self.hash_config or HashGridConfig())

    def fit(self, X, mask, prior=None):
        """Reconstruct from multi-coil k-space ``X`` of shape (c, H, W).

        ``prior`` is the prior image (H, W); it is required unless
        ``dc_only`` is set.
        """
        self._validate_hyperparameters()
        X = check_kspace(X, "X")
        check_even_shape(X.shape[1:], "k-space")
        mask = check_mask(mask, X.shape[2])
        if self.dc_only:
            prior = None
        elif prior is None:
            raise ValueError("a prior image is required unless dc_only=True")
        else:
            prior = check_image(prior, "prior")
            check_same_grid(prior.shape, X.shape, "prior", "X")
        result = run_reconstruction(
            X, mask, prior, hash_config=self.hash_config or HashGridConfig(),
            csm_degree=self.csm_degree, alpha=self.alpha, lambda_tv=self.lambda_tv,
            learning_rate=self.learning_rate, iterations=self.iterations,
            seed=self.random_state, early_stop=self.early_stop,
        )
        self.image_ = np.abs(result.intensities)
        self.intensities_ = result.intensities
        self.coil_maps_ = result.maps
        self.theta_ = result.theta
        self.phi_ = result.phi
        self.loss_trace_ = result.trace
        self.n_iter_ = len(result.trace)
        self.wall_time_ = result.wall_time
        self.hash_config_ = (self.hash_config or HashGridConfig()).resolved(*X.shape[1:])
        self.result_ = result
        return self

    def fit_transform(self, X, mask, prior=None):
        return self.fit(X, mask, prior).image_

    def transform(self, X=None):
        """Return the reconstructed magnitude image.

        The model is a per-instance fit, so new k-space cannot be mapped
        without refitting.
        """
        check_is_fitted(self, "image_")
        if X is not None:
            raise ValueError("PriorInformedINR is fitted per instance; call fit(X, mask, prior)")
        return self.image_

    def predict(self, coords):
        """Signed INR intensities at arbitrary (u, v) coordinates in [0, 1]^2."""
        check_is_fitted(self, "theta_")
        coords = np.asarray(coords, dtype=np.float64)
        shape = coords.shape[:-1]
        encoder = HashEncoder(self.hash_config_, coords.reshape(-1, 2))
        return mlp_forward(self.theta_, encoder.encode(self.theta_.tables)).reshape(shape)
