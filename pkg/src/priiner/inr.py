"""Hash-grid encoded coordinate MLP mapping (u, v) to a real intensity.

The encoder for a fixed coordinate set is linear in the hash tables, so it is
materialised once as a sparse interpolation matrix. Forward evaluation is a
sparse product and the table gradient is its transpose.
"""

from dataclasses import dataclass, fields

import numpy as np
import scipy.sparse as sp

from .csm import pixel_coordinates

HIDDEN = 64
PRIME_Y = 2654435761


def hash_vertices(x, y, table_size):
    """Spatial hash ``(x * 1) XOR (y * 2654435761) mod T`` of integer vertices."""
    x = np.asarray(x, dtype=np.uint64)
    y = np.asarray(y, dtype=np.uint64)
    return ((x ^ (y * np.uint64(PRIME_Y))) & np.uint64(table_size - 1)).astype(np.int64)


class HashEncoder:
    """Bilinear multiresolution hash interpolation for a fixed coordinate set.

    Parameters
    ----------
    cfg : HashGridConfig
        Must have ``max_resolution`` resolved.
    coords : ndarray, shape (N, 2)
        (u, v) in [0, 1]^2; values outside are clamped.
    """

    def __init__(self, cfg, coords):
        if cfg.max_resolution is None:
            raise ValueError("HashGridConfig.max_resolution must be resolved first")
        coords = np.clip(np.asarray(coords, dtype=np.float64), 0.0, 1.0)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"coords must have shape (N, 2), got {coords.shape}")
        self.cfg = cfg
        self.n_points = coords.shape[0]
        L, T = cfg.levels, cfg.table_size
        rows, cols, vals = [], [], []
        point = np.arange(self.n_points)
        for level, res in enumerate(cfg.resolutions()):
            pos = coords * res
            cell = np.minimum(np.floor(pos), res - 1)
            frac = pos - cell
            cell = cell.astype(np.int64)
            for dx in (0, 1):
                wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
                for dy in (0, 1):
                    wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
                    idx = hash_vertices(cell[:, 0] + dx, cell[:, 1] + dy, T)
                    rows.append(point * L + level)
                    cols.append(level * T + idx)
                    vals.append(wx * wy)
        # CSR construction sums duplicate (row, col) pairs in a fixed order
        self.matrix = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_points * L, L * T),
        )
        self._matrix_t = self.matrix.T.tocsr()

    def encode(self, tables):
        L, T, F = self.cfg.levels, self.cfg.table_size, self.cfg.features_per_level
        if tables.shape != (L, T, F):
            raise ValueError(f"tables must have shape {(L, T, F)}, got {tables.shape}")
        return (self.matrix @ tables.reshape(L * T, F)).reshape(self.n_points, L * F)

    def backward(self, upstream):
        """Gradient w.r.t. the tables given d(loss)/d(features), shape (N, L*F)."""
        L, T, F = self.cfg.levels, self.cfg.table_size, self.cfg.features_per_level
        up = np.asarray(upstream).reshape(self.n_points * L, F)
        return (self._matrix_t @ up).reshape(L, T, F)


def hash_encode(cfg, tables, coords):
    """Per-point concatenated level features, shape (N, L*F)."""
    return HashEncoder(cfg, coords).encode(tables)


@dataclass
class InrParams:
    """Hash tables plus weights of the (L*F -> 64 -> 64 -> 1) ReLU MLP."""

    tables: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        n_in = self.w1.shape[0]
        L, _, F = self.tables.shape
        expected = {
            "w1": (L * F, HIDDEN), "b1": (HIDDEN,), "w2": (HIDDEN, HIDDEN),
            "b2": (HIDDEN,), "w3": (HIDDEN, 1), "b3": (1,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {getattr(self, name).shape}")
        if n_in != L * F:
            raise ValueError("first layer width must equal levels * features_per_level")

    @classmethod
    def names(cls):
        return [f.name for f in fields(cls)]

    def arrays(self):
        return [getattr(self, name) for name in self.names()]

    def copy(self):
        return InrParams(*[a.copy() for a in self.arrays()])

    def zeros_like(self):
        return InrParams(*[np.zeros_like(a) for a in self.arrays()])

    @classmethod
    def init(cls, cfg, seed=0):
        """Tables uniform in +-1e-4, weights uniform in +-1/sqrt(fan_in), zero biases."""
        rng = np.random.default_rng(seed)
        L, T, F = cfg.levels, cfg.table_size, cfg.features_per_level
        tables = rng.uniform(-1e-4, 1e-4, size=(L, T, F))
        dims = [L * F, HIDDEN, HIDDEN, 1]
        layers = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            layers.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            layers.append(np.zeros(fan_out))
        return cls(tables, *layers)


def _relu(x):
    return np.maximum(x, 0.0)


def mlp_forward(params, features, return_cache=False):
    """Two ReLU hidden layers and a linear scalar output per row of ``features``."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.w1.shape[0]:
        raise ValueError(
            f"features must have shape (N, {params.w1.shape[0]}), got {features.shape}"
        )
    h1 = features @ params.w1 + params.b1
    a1 = _relu(h1)
    h2 = a1 @ params.w2 + params.b2
    a2 = _relu(h2)
    out = (a2 @ params.w3)[:, 0] + params.b3[0]
    if return_cache:
        return out, (features, h1, a1, h2, a2)
    return out


def mlp_backward(params, cache, upstream):
    """Reverse pass of :func:`mlp_forward`; ReLU'(0) is taken as 0.

    Returns the weight/bias gradients and the cotangent on the features.
    """
    features, h1, a1, h2, a2 = cache
    g_out = np.asarray(upstream, dtype=np.float64).reshape(-1, 1)
    gw3 = a2.T @ g_out
    gb3 = g_out.sum(axis=0)
    g_h2 = (g_out @ params.w3.T) * (h2 > 0)
    gw2 = a1.T @ g_h2
    gb2 = g_h2.sum(axis=0)
    g_h1 = (g_h2 @ params.w2.T) * (h1 > 0)
    gw1 = features.T @ g_h1
    gb1 = g_h1.sum(axis=0)
    g_feat = g_h1 @ params.w1.T
    return (gw1, gb1, gw2, gb2, gw3, gb3), g_feat


class InrRenderer:
    """Renders I(theta) on a fixed pixel grid and back-propagates through it."""

    def __init__(self, cfg, height, width):
        self.height, self.width = height, width
        self.cfg = cfg.resolved(height, width)
        self.encoder = HashEncoder(self.cfg, pixel_coordinates(height, width))

    def forward(self, params, return_cache=False):
        feats = self.encoder.encode(params.tables)
        out, cache = mlp_forward(params, feats, return_cache=True)
        img = out.reshape(self.height, self.width)
        return (img, cache) if return_cache else img

    def backward(self, params, cache, upstream):
        upstream = np.asarray(upstream)
        if upstream.shape != (self.height, self.width) or np.iscomplexobj(upstream):
            raise ValueError(
                f"upstream must be a real ({self.height}, {self.width}) array, got "
                f"{upstream.dtype} {upstream.shape}"
            )
        layer_grads, g_feat = mlp_backward(params, cache, upstream.ravel())
        return InrParams(self.encoder.backward(g_feat), *layer_grads)


def render_image(params, cfg, height, width):
    """I(theta) on the H x W pixel-centre grid, as a complex array with zero imaginary part."""
    return InrRenderer(cfg, height, width).forward(params).astype(np.complex128)


def inr_gradient(params, cfg, height, width, upstream):
    """Reverse-mode gradient of ``sum(upstream * I(theta))`` w.r.t. every parameter."""
    renderer = InrRenderer(cfg, height, width)
    _, cache = renderer.forward(params, return_cache=True)
    return renderer.backward(params, cache, upstream)
