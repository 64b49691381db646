"""Run configuration: hash-grid settings and reconstruction hyperparameters."""

import json
import math
from dataclasses import asdict, dataclass, field, fields

from ._exceptions import ConfigError


@dataclass(frozen=True)
class HashGridConfig:
    """Multiresolution hash-grid encoding settings.

    ``max_resolution=None`` means "use max(H, W) of the grid being encoded".
    """

    levels: int = 16
    features_per_level: int = 2
    table_size: int = 2**14
    base_resolution: int = 16
    max_resolution: int | None = None

    def __post_init__(self):
        for name in ("levels", "features_per_level", "table_size", "base_resolution"):
            _require_int(name, getattr(self, name), 1)
        if self.table_size & (self.table_size - 1):
            raise ConfigError("table_size", f"must be a power of two, got {self.table_size}")
        if self.max_resolution is not None:
            _require_int("max_resolution", self.max_resolution, 1)
            if self.max_resolution < self.base_resolution:
                raise ConfigError("max_resolution", "must be >= base_resolution")

    def resolved(self, height, width):
        """Copy with ``max_resolution`` filled in from the grid size."""
        if self.max_resolution is not None:
            return self
        n_max = max(height, width, self.base_resolution)
        return HashGridConfig(
            self.levels, self.features_per_level, self.table_size, self.base_resolution, n_max
        )

    @property
    def growth(self):
        if self.max_resolution is None:
            raise ValueError("resolve max_resolution before asking for the growth factor")
        if self.levels == 1:
            return 1.0
        return math.exp(
            (math.log(self.max_resolution) - math.log(self.base_resolution)) / (self.levels - 1)
        )

    def resolutions(self):
        """Per-level grid resolution floor(N_min * b**l)."""
        b = self.growth
        # the small slack keeps floor() from dropping the last level to N_max - 1
        return [int(math.floor(self.base_resolution * b**level + 1e-9)) for level in range(self.levels)]

    @property
    def n_features(self):
        return self.levels * self.features_per_level


@dataclass(frozen=True)
class ReconConfig:
    """Hyperparameters, seed and file locations for one reconstruction."""

    acceleration: int
    center_fraction: float = 0.08
    alpha: float = 0.8
    lambda_tv: float = 1e-4
    learning_rate: float = 1e-2
    iterations: int = 1000
    seed: int = 0
    csm_degree: int = 3
    hash_config: HashGridConfig = field(default_factory=HashGridConfig)
    dc_only: bool = False
    early_stop: bool = False
    prior_kind: str = "file"
    lowpass_fraction: float = 0.25
    kspace_path: str | None = None
    mask_path: str | None = None
    prior_path: str | None = None
    truth_path: str | None = None
    output_dir: str = "recon_out"

    def __post_init__(self):
        _require_int("acceleration", self.acceleration, 1)
        _require_real("center_fraction", self.center_fraction)
        if not 0 < self.center_fraction <= 1:
            raise ConfigError("center_fraction", "must lie in (0, 1]")
        for name in ("alpha", "lambda_tv"):
            _require_real(name, getattr(self, name))
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be nonnegative")
        _require_real("learning_rate", self.learning_rate)
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate", "must be positive")
        _require_int("iterations", self.iterations, 1)
        _require_int("seed", self.seed, None)
        _require_int("csm_degree", self.csm_degree, 0)
        _require_real("lowpass_fraction", self.lowpass_fraction)
        if not 0 < self.lowpass_fraction <= 1:
            raise ConfigError("lowpass_fraction", "must lie in (0, 1]")
        if self.prior_kind not in PRIOR_KINDS:
            raise ConfigError("prior_kind", f"must be one of {PRIOR_KINDS}")

    def to_dict(self):
        return asdict(self)


PRIOR_KINDS = ("file", "zero_filled", "lowpass_oracle", "ground_truth_oracle")


def _require_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(name, f"must be >= {minimum}, got {value}")


def _require_real(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")


def config_from_dict(data):
    """Build a :class:`ReconConfig` from a parsed JSON mapping."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = {f.name for f in fields(ReconConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    if "acceleration" not in data:
        raise ConfigError("acceleration", "required field is missing")
    data = dict(data)
    hash_cfg = data.pop("hash_config", None) or {}
    if not isinstance(hash_cfg, dict):
        raise ConfigError("hash_config", "must be an object")
    hash_known = {f.name for f in fields(HashGridConfig)}
    for key in hash_cfg:
        if key not in hash_known:
            raise ConfigError(f"hash_config.{key}", "unknown field")
    return ReconConfig(hash_config=HashGridConfig(**hash_cfg), **data)


def load_config(path):
    """Parse a JSON file into a validated :class:`ReconConfig`.

    Raises ``json.JSONDecodeError`` for invalid JSON and :class:`ConfigError`
    (carrying the field name) for missing or invalid fields.
    """
    with open(path) as fh:
        data = json.load(fh)
    return config_from_dict(data)
