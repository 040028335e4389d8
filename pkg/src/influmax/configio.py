"""Config-file parsing for models and experiments.

Files are JSON.  A model block looks like one of::

    {"kind": "sbm", "n": 1000, "alpha": [0.5, 0.5], "K": [[1.2, 0.4], [0.4, 0.8]]}
    {"kind": "chung_lu", "n": 100, "w": [0.5, 0.5, ...]}
    {"kind": "chung_lu", "n": 100,
     "w": {"generator": "uniform", "w_min": 0.5, "w_max": 1.5}}
    {"kind": "chung_lu", "n": 100,
     "w": {"generator": "powerlaw", "exponent": 2.5, "w_min": 0.3, "w_max": 2.0}}

K also accepts a flat row-major list of S*S entries.  Weight generators are
deterministic quantile grids (see ``generate_weights``), so a model file
fully determines the model.  An experiment config wraps a model block with
policy, ground-truth, seeds and output settings; every validation error
names the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .graph_models import ChungLuParams, GraphModel, SbmParams, classify_regime

POLICY_NAMES = ("ducb_fixed_T", "ducb_double", "uniform_baseline")
GROUND_TRUTH_METHODS = ("branching_prediction", "monte_carlo")


@dataclass(frozen=True)
class PolicyConfig:
    name: str
    T: int
    alpha: float
    beta: float = 2.0

    def to_dict(self) -> dict:
        return {"name": self.name, "T": self.T, "alpha": self.alpha,
                "beta": self.beta}


@dataclass(frozen=True)
class GroundTruthConfig:
    method: str = "branching_prediction"
    mc_samples: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {"method": self.method, "mc_samples": self.mc_samples,
                "seed": self.seed}


@dataclass(frozen=True)
class ExperimentConfig:
    model: SbmParams | ChungLuParams
    policy: PolicyConfig | None
    ground_truth: GroundTruthConfig
    seeds: tuple
    output_dir: str | None
    sweep_alphas: tuple | None = None

    @property
    def ground_truth_seed(self) -> int:
        return self.ground_truth.seed

    def build_model(self) -> GraphModel:
        return classify_regime(self.model)


def generate_weights(spec: dict, n: int, path: str) -> np.ndarray:
    """Deterministic weight vectors from a named generator.

    "uniform" is the evenly spaced grid from w_min to w_max (midpoint when
    n == 1).  "powerlaw" evaluates the inverse tail of a Pareto law with the
    given exponent at the quantiles (i + 0.5)/n, clipped to [w_min, w_max]:
    w_i = min(w_max, w_min * ((i + 0.5)/n) ** (-1/(exponent - 1))).
    """
    name = _expect(spec, "generator", str, path)
    w_min = _expect_number(spec, "w_min", path)
    w_max = _expect_number(spec, "w_max", path)
    if w_min <= 0 or w_max < w_min:
        raise ConfigError(f"{path}: need 0 < w_min <= w_max")
    if name == "uniform":
        if n == 1:
            return np.array([(w_min + w_max) / 2.0])
        return np.linspace(w_min, w_max, n)
    if name == "powerlaw":
        exponent = _expect_number(spec, "exponent", path)
        if exponent <= 1.0:
            raise ConfigError(f"{path}.exponent: must be > 1, got {exponent}")
        quantiles = (np.arange(n) + 0.5) / n
        weights = w_min * quantiles ** (-1.0 / (exponent - 1.0))
        return np.minimum(weights, w_max)
    raise ConfigError(f"{path}.generator: unknown generator {name!r}")


def model_params_from_dict(data, path: str = "model"):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: must be an object")
    kind = _expect(data, "kind", str, path)
    n = _expect_int(data, "n", path, minimum=1)
    try:
        if kind == "sbm":
            alpha = np.asarray(_expect(data, "alpha", list, path), dtype=float)
            K = _parse_kernel(data, alpha.size, path)
            return SbmParams(n=n, alpha=alpha, K=K)
        if kind == "chung_lu":
            raw = data.get("w")
            if isinstance(raw, list):
                w = np.asarray(raw, dtype=float)
            elif isinstance(raw, dict):
                w = generate_weights(raw, n, f"{path}.w")
            else:
                raise ConfigError(f"{path}.w: must be a list or a generator object")
            return ChungLuParams(n=n, w=w)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.kind: must be 'sbm' or 'chung_lu', got {kind!r}")


def _parse_kernel(data, S, path):
    raw = data.get("K")
    if raw is None:
        raise ConfigError(f"{path}.K: missing")
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 1:
        if arr.size != S * S:
            raise ConfigError(
                f"{path}.K: flat kernel needs {S * S} row-major entries, got {arr.size}")
        arr = arr.reshape(S, S)
    if arr.shape != (S, S):
        raise ConfigError(f"{path}.K: expected {S}x{S}, got {arr.shape}")
    return arr


def experiment_config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    model = model_params_from_dict(_require(data, "model"))

    policy = None
    if "policy" in data:
        block = data["policy"]
        if not isinstance(block, dict):
            raise ConfigError("policy: must be an object")
        name = _expect(block, "name", str, "policy")
        if name not in POLICY_NAMES:
            raise ConfigError(
                f"policy.name: must be one of {POLICY_NAMES}, got {name!r}")
        T = _expect_int(block, "T", "policy", minimum=1)
        if name != "uniform_baseline" and T < 2:
            raise ConfigError(f"policy.T: must be >= 2 for {name}, got {T}")
        alpha = _expect_number(block, "alpha", "policy")
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"policy.alpha: must lie in (0, 1), got {alpha}")
        beta = float(block.get("beta", 2.0))
        if name == "ducb_double" and beta < 2.0:
            raise ConfigError(f"policy.beta: must be >= 2, got {beta}")
        policy = PolicyConfig(name=name, T=T, alpha=alpha, beta=beta)

    gt_block = data.get("ground_truth", {})
    if not isinstance(gt_block, dict):
        raise ConfigError("ground_truth: must be an object")
    method = gt_block.get("method", "branching_prediction")
    if method not in GROUND_TRUTH_METHODS:
        raise ConfigError(
            f"ground_truth.method: must be one of {GROUND_TRUTH_METHODS}, got {method!r}")
    mc_samples = int(gt_block.get("mc_samples", 0))
    if method == "monte_carlo" and mc_samples < 1:
        raise ConfigError("ground_truth.mc_samples: must be >= 1 for monte_carlo")
    gt_seed = int(gt_block.get("seed", 0))
    ground_truth = GroundTruthConfig(method=method, mc_samples=mc_samples, seed=gt_seed)

    seeds = data.get("seeds", [0])
    if (not isinstance(seeds, list) or not seeds
            or not all(isinstance(s, int) for s in seeds)):
        raise ConfigError("seeds: must be a non-empty list of integers")

    output_dir = data.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("output_dir: must be a string")

    sweep_alphas = None
    if "sweep" in data:
        sweep = data["sweep"]
        if not isinstance(sweep, dict) or "alphas" not in sweep:
            raise ConfigError("sweep: must be an object with an 'alphas' list")
        alphas = sweep["alphas"]
        if (not isinstance(alphas, list) or not alphas
                or not all(isinstance(a, (int, float)) and 0 < a < 1 for a in alphas)):
            raise ConfigError("sweep.alphas: must be a non-empty list of values in (0, 1)")
        sweep_alphas = tuple(float(a) for a in alphas)

    return ExperimentConfig(model=model, policy=policy, ground_truth=ground_truth,
                            seeds=tuple(seeds), output_dir=output_dir,
                            sweep_alphas=sweep_alphas)


def load_experiment_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return experiment_config_from_dict(data)


def derive_seeds(base_seed: int, count: int) -> list:
    """Replicate seeds: the first ``count`` 64-bit words of
    SeedSequence(base_seed).  Deterministic, documented expansion scheme."""
    state = np.random.SeedSequence(base_seed).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def _require(data, key):
    if key not in data:
        raise ConfigError(f"{key}: missing")
    return data[key]


def _expect(block, key, kind, path):
    value = block.get(key)
    if not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _expect_int(block, key, path, minimum=None):
    value = block.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}, got {value}")
    return value


def _expect_number(block, key, path):
    value = block.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)
