"""Single-hidden-layer extreme learning machine with a sigmoid hidden layer.

Input weights and biases are random (or supplied by a search); only the
output weights are fitted, as the minimum-norm least-squares solution
computed through an SVD pseudoinverse.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ElmError(RuntimeError):
    pass


@dataclass(frozen=True)
class ElmConfig:
    hidden_count: int = 40
    activation: str = "sigmoid"
    weight_range: tuple[float, float] = (-1.0, 1.0)
    bias_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.hidden_count < 1:
            raise ValueError("hidden_count must be >= 1")
        if self.activation != "sigmoid":
            raise ValueError(f"unsupported activation {self.activation!r}")
        for name in ("weight_range", "bias_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} needs lo < hi, got ({lo}, {hi})")
            object.__setattr__(self, name, (float(lo), float(hi)))


@dataclass
class ElmModel:
    input_weights: np.ndarray  # M x d
    biases: np.ndarray  # M
    output_weights: np.ndarray | None = None  # M
    activation: str = "sigmoid"
    train_residual: float = float("nan")
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def hidden_count(self) -> int:
        return self.input_weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.input_weights.shape[1]

    @property
    def is_trained(self) -> bool:
        return self.output_weights is not None


def sigmoid(z):
    # equals 1 / (1 + exp(-z)) but cannot overflow
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def init_random(config: ElmConfig, input_dim: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Uniform input weights and biases from a seeded generator."""
    if input_dim < 1:
        raise ValueError("input_dim must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights = rng.uniform(*config.weight_range, size=(config.hidden_count, input_dim))
    biases = rng.uniform(*config.bias_range, size=config.hidden_count)
    return weights, biases


def hidden_matrix(weights, biases, features) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    biases = np.asarray(biases, dtype=float)
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if weights.ndim != 2 or biases.shape != (weights.shape[0],):
        raise ValueError(f"weights {weights.shape} and biases {biases.shape} disagree")
    if x.shape[1] != weights.shape[1]:
        raise ValueError(f"features have {x.shape[1]} columns, weights expect {weights.shape[1]}")
    return sigmoid(x @ weights.T + biases)


def pinv_solve(h: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of ``h @ beta = t``.

    Singular values below ``max(N, M) * eps * sigma_max`` are dropped.
    Returns ``(beta, residual_norm)``.
    """
    try:
        u, s, vt = np.linalg.svd(h, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ElmError(f"SVD failed: {exc}") from exc
    if s.size == 0 or s[0] == 0.0:
        beta = np.zeros(h.shape[1])
    else:
        cutoff = max(h.shape) * np.finfo(float).eps * s[0]
        keep = s > cutoff
        coeffs = (u[:, keep].T @ t) / s[keep]
        beta = vt[keep].T @ coeffs
    residual = float(np.linalg.norm(h @ beta - t))
    return beta, residual


def train(features, targets, weights, biases) -> ElmModel:
    x = np.atleast_2d(np.asarray(features, dtype=float))
    t = np.asarray(targets, dtype=float).ravel()
    if x.shape[0] < 1 or x.shape[0] != t.size:
        raise ValueError(f"{x.shape[0]} feature rows for {t.size} targets")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise ValueError("training data contains non-finite values")
    h = hidden_matrix(weights, biases, x)
    beta, residual = pinv_solve(h, t)
    return ElmModel(np.array(weights, dtype=float), np.array(biases, dtype=float), beta, "sigmoid", residual)


def predict(model: ElmModel, features) -> np.ndarray:
    if not model.is_trained:
        raise ElmError("model has not been trained")
    return hidden_matrix(model.input_weights, model.biases, features) @ model.output_weights


_HEADER_KEYS = ("format", "activation", "hidden_count", "input_dim", "trained")


def dumps(model: ElmModel) -> str:
    """Serialise to a ``key=value`` header, a blank line, then a CSV body.

    Body rows, one per hidden neuron: ``w_1, ..., w_d, bias, beta``.
    Floats are written with ``repr`` so a load/dump round trip is exact.
    ``model.metadata`` entries follow the fixed header keys.
    """
    out = io.StringIO()
    out.write("format=loadforecast-elm/1\n")
    out.write(f"activation={model.activation}\n")
    out.write(f"hidden_count={model.hidden_count}\n")
    out.write(f"input_dim={model.input_dim}\n")
    out.write(f"trained={int(model.is_trained)}\n")
    out.write("columns=" + ",".join([f"w{j}" for j in range(model.input_dim)] + ["bias", "beta"]) + "\n")
    for key, value in model.metadata.items():
        out.write(f"{key}={value}\n")
    out.write("\n")
    beta = model.output_weights if model.is_trained else np.full(model.hidden_count, np.nan)
    for w_row, b, bt in zip(model.input_weights, model.biases, beta):
        out.write(",".join(repr(float(v)) for v in (*w_row, b, bt)) + "\n")
    return out.getvalue()


def loads(text: str) -> ElmModel:
    head, _, body = text.partition("\n\n")
    meta = dict(line.split("=", 1) for line in head.splitlines() if line.strip())
    missing = [k for k in _HEADER_KEYS if k not in meta]
    if missing:
        raise ElmError(f"model file missing keys: {missing}")
    if meta["format"] != "loadforecast-elm/1":
        raise ElmError(f"unknown model format {meta['format']!r}")
    m, d = int(meta["hidden_count"]), int(meta["input_dim"])
    rows = np.array([[float(v) for v in line.split(",")] for line in body.splitlines() if line.strip()])
    if rows.shape != (m, d + 2):
        raise ElmError(f"model body has shape {rows.shape}, expected {(m, d + 2)}")
    beta = rows[:, d + 1].copy() if meta["trained"] == "1" else None
    extra = {k: v for k, v in meta.items() if k not in _HEADER_KEYS and k != "columns"}
    return ElmModel(rows[:, :d].copy(), rows[:, d].copy(), beta, meta["activation"], metadata=extra)


def save(model: ElmModel, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load(path) -> ElmModel:
    return loads(Path(path).read_text(encoding="utf-8"))
