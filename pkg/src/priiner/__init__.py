"""Prior-informed implicit neural representation reconstruction for
multi-coil Cartesian MRI."""

from ._exceptions import (
    ConfigError, DegenerateMapsError, DegenerateSampleError, DivergenceError, NpyFormatError,
    UnsupportedDtypeError,
)
from .config import HashGridConfig, ReconConfig, load_config
from .csm import CsmParams, csm_gradient, eval_csm, normalize_rss
from .dataio import read_npy, write_npy
from .estimator import PriorInformedINR
from .inr import InrParams, hash_encode, inr_gradient, mlp_forward, render_image
from .kspace import SamplingMask, fft2c, forward_model, ifft2c, make_equispaced_mask, zero_filled_adjoint
from .metrics import psnr, ssim, wilcoxon_signed_rank
from .objective import LossBreakdown, loss_dc, loss_prior, loss_tv, total_gradient, total_loss
from .optim import AdamState, ReconResult, adam_step, reconstruct, run_reconstruction
from .priors import PriorSpec, lowpass, make_prior
from .simulate import AcquisitionSpec, PhantomSpec, acquire, make_phantom, make_synthetic_csm

__version__ = "0.1.0"

__all__ = [
    "AcquisitionSpec", "AdamState", "ConfigError", "CsmParams", "DegenerateMapsError",
    "DegenerateSampleError", "DivergenceError", "HashGridConfig", "InrParams", "LossBreakdown",
    "NpyFormatError", "PhantomSpec", "PriorInformedINR", "PriorSpec", "ReconConfig",
    "ReconResult", "SamplingMask", "UnsupportedDtypeError", "acquire", "adam_step",
    "csm_gradient", "eval_csm", "fft2c", "forward_model", "hash_encode", "ifft2c",
    "inr_gradient", "load_config", "loss_dc", "lowpass", "loss_prior", "loss_tv", "make_equispaced_mask",
    "make_phantom", "make_prior", "make_synthetic_csm", "mlp_forward", "normalize_rss", "psnr",
    "read_npy", "reconstruct", "render_image", "run_reconstruction", "ssim", "total_gradient",
    "total_loss", "wilcoxon_signed_rank", "write_npy", "zero_filled_adjoint",
]
