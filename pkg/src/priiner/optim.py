"""Adam and the joint instance optimization of the INR and the coil maps."""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ._exceptions import DivergenceError
from .csm import CsmParams
from .inr import InrParams
from .objective import DualConsistencyObjective

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Moment accumulators for a list of real parameter blocks."""

    m: list
    v: list
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0

    @classmethod
    def zeros_like(cls, params, lr=1e-2, **kwargs):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], lr, **kwargs)


def adam_step(state, params, grads, names=None):
    """One in-place Adam update of ``params``; returns ``(state, params)``.

    Raises
    ------
    DivergenceError
        If any gradient block holds NaN or Inf; the block is named.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("parameter, gradient and state block counts differ")
    for i, g in enumerate(grads):
        if g.shape != params[i].shape:
            raise ValueError(f"gradient block {i} has shape {g.shape}, expected {params[i].shape}")
        if not np.all(np.isfinite(g)):
            label = names[i] if names else f"block {i}"
            raise DivergenceError(f"non-finite gradient in parameter block {label!r}")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return state, params


def _real_blocks(theta, phi):
    # complex coefficients are optimized as interleaved (re, im) pairs
    return theta.arrays() + [phi.coeffs.view(np.float64)]


BLOCK_NAMES = InrParams.names() + ["csm_coeffs"]


@dataclass
class ReconResult:
    image: np.ndarray
    maps: np.ndarray
    trace: list
    wall_time: float
    theta: InrParams
    phi: CsmParams
    intensities: np.ndarray = field(repr=False, default=None)


def run_reconstruction(y, mask, prior, *, hash_config, csm_degree=3, alpha=0.8, lambda_tv=1e-4,
                       learning_rate=1e-2, iterations=1000, seed=0, early_stop=False,
                       callback=None):
    """Jointly fit I(theta) and S(phi) to ``y`` (and ``prior``) with Adam.

    ``prior=None`` runs the DC-only variant. Returns a :class:`ReconResult`
    whose ``image`` is the magnitude of the rendered intensities.
    """
    start = time.perf_counter()
    obj = DualConsistencyObjective(y, mask, prior, hash_config, csm_degree, alpha, lambda_tv)
    theta = InrParams.init(obj.hash_config, seed)
    phi = CsmParams.uniform(obj.n_coils, csm_degree)
    params = _real_blocks(theta, phi)
    state = AdamState.zeros_like(params, lr=learning_rate)
    trace = []
    window = 50
    for it in range(iterations):
        loss, g_theta, g_phi = obj.value_and_grad(theta, phi)
        if not np.isfinite(loss.total):
            raise DivergenceError(f"loss became non-finite at iteration {it}", trace)
        trace.append(loss)
        if callback is not None:
            callback(it, loss)
        try:
            adam_step(state, params, _real_blocks(g_theta, g_phi), BLOCK_NAMES)
        except DivergenceError as exc:
            raise DivergenceError(f"{exc} at iteration {it}", trace) from None
        if early_stop and it >= window:
            before = trace[it - window].total
            if before - loss.total < 1e-6 * abs(before):
                logger.info("early stop at iteration %d", it)
                break
    intensities = obj.renderer.forward(theta)
    if not np.all(np.isfinite(intensities)):
        raise DivergenceError("final image is non-finite", trace)
    return ReconResult(
        image=np.abs(intensities).astype(np.complex128),
        maps=obj.maps(phi),
        trace=trace,
        wall_time=time.perf_counter() - start,
        theta=theta,
        phi=phi,
        intensities=intensities,
    )


def reconstruct(cfg, y, mask, prior):
    """Run the optimization described by a :class:`~priiner.config.ReconConfig`."""
    return run_reconstruction(
        y, mask, None if cfg.dc_only else prior,
        hash_config=cfg.hash_config, csm_degree=cfg.csm_degree, alpha=cfg.alpha,
        lambda_tv=cfg.lambda_tv, learning_rate=cfg.learning_rate, iterations=cfg.iterations,
        seed=cfg.seed, early_stop=cfg.early_stop,
    )
