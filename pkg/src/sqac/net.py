"""Feed-forward regressor mapping (query, month) to a seasonality score.

The input is the query's mean token embedding concatenated with a 12-dim
one-hot month. Hidden layers are affine + relu with inverted dropout in
training mode; the output neuron is affine with linear activation. All math
runs in float64 so analytic gradients can be checked tightly against finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sqac.embeddings import Vocab, embed_query
from sqac.text import normalize_query, tokenize

MONTH_DIMS = 12
DEFAULT_HIDDEN = (128, 64)
DEFAULT_DROPOUT = 0.2


@dataclass(eq=False)
class DenseLayer:
    weights: np.ndarray  # (n_in, n_out)
    bias: np.ndarray  # (n_out,)
    activation: str  # "relu" | "linear"

    def __post_init__(self) -> None:
        if self.activation not in ("relu", "linear"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weights.shape[1] != self.bias.shape[0]:
            raise ValueError("bias length must match layer width")


@dataclass(eq=False)
class SeasonModel:
    """Trainable parameters: embedding matrix plus dense layers."""

    vocab: Vocab
    embedding: np.ndarray  # (|V|, d)
    layers: list[DenseLayer]  # hidden relu layers then one linear output
    dropout_rate: float = DEFAULT_DROPOUT
    _token_cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        expected = self.embedding.shape[1] + MONTH_DIMS
        for i, layer in enumerate(self.layers):
            if layer.weights.shape[0] != expected:
                raise ValueError(
                    f"layer {i} expects input {layer.weights.shape[0]}, got {expected}"
                )
            expected = layer.weights.shape[1]
        if expected != 1:
            raise ValueError("output layer must have exactly one neuron")
        if self.layers and self.layers[-1].activation != "linear":
            raise ValueError("output layer activation must be linear")

    @classmethod
    def init(
        cls,
        vocab: Vocab,
        embedding: np.ndarray,
        hidden: Sequence[int] = DEFAULT_HIDDEN,
        dropout_rate: float = DEFAULT_DROPOUT,
        seed: int = 0,
    ) -> "SeasonModel":
        """He-initialized model over a given (possibly pre-trained) embedding."""
        rng = np.random.Generator(np.random.PCG64(seed))
        dims = [embedding.shape[1] + MONTH_DIMS, *hidden, 1]
        layers = []
        for i in range(len(dims) - 1):
            n_in, n_out = dims[i], dims[i + 1]
            scale = np.sqrt(2.0 / n_in) if i < len(dims) - 2 else np.sqrt(1.0 / n_in)
            layers.append(
                DenseLayer(
                    weights=rng.normal(0.0, scale, size=(n_in, n_out)),
                    bias=np.zeros(n_out),
                    activation="relu" if i < len(dims) - 2 else "linear",
                )
            )
        return cls(
            vocab=vocab,
            embedding=np.array(embedding, dtype=np.float64),
            layers=layers,
            dropout_rate=dropout_rate,
        )

    # -- parameter plumbing ----------------------------------------------------

    @property
    def embedding_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def input_dim(self) -> int:
        return self.embedding_dim + MONTH_DIMS

    def parameters(self) -> dict[str, np.ndarray]:
        """Live references to every trainable tensor, in a stable order."""
        params = {"embedding": self.embedding}
        for i, layer in enumerate(self.layers):
            params[f"layers.{i}.weights"] = layer.weights
            params[f"layers.{i}.bias"] = layer.bias
        return params

    def clone(self) -> "SeasonModel":
        return SeasonModel(
            vocab=self.vocab,
            embedding=self.embedding.copy(),
            layers=[
                DenseLayer(l.weights.copy(), l.bias.copy(), l.activation)
                for l in self.layers
            ],
            dropout_rate=self.dropout_rate,
        )

    def round_to_f32(self) -> None:
        """Quantize parameters to float32-representable values (in float64
        storage) so persisted and in-memory predictions agree bit-for-bit."""
        for arr in self.parameters().values():
            arr[...] = arr.astype(np.float32).astype(np.float64)
        self._token_cache.clear()

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for name, arr in self.parameters().items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        h.update(("|".join(self.vocab.tokens)).encode())
        return h.hexdigest()

    # -- inference ---------------------------------------------------------------

    def token_indices(self, query: str) -> np.ndarray:
        """Embedding rows used by a (raw or normalized) query; cached."""
        cached = self._token_cache.get(query)
        if cached is None:
            cached = self.vocab.encode(tokenize(normalize_query(query)))
            self._token_cache[query] = cached
        return cached

    def features(self, query: str, month: int) -> np.ndarray:
        if not 1 <= month <= 12:
            raise ValueError(f"month must be in 1..12, got {month}")
        x = np.zeros(self.input_dim)
        x[: self.embedding_dim] = self.embedding[self.token_indices(query)].mean(axis=0)
        x[self.embedding_dim + month - 1] = 1.0
        return x

    def predict(self, query: str, month: int) -> float:
        """Inference-mode score clamped to [0, 1]; deterministic."""
        out, _ = forward(self, self.features(query, month)[None, :], train=False)
        return float(np.clip(out[0], 0.0, 1.0))

    def predict_months(self, query: str) -> list[float]:
        """Scores for months 1..12 at once."""
        qvec = self.embedding[self.token_indices(query)].mean(axis=0)
        x = np.zeros((MONTH_DIMS, self.input_dim))
        x[:, : self.embedding_dim] = qvec
        x[:, self.embedding_dim :] = np.eye(MONTH_DIMS)
        out, _ = forward(self, x, train=False)
        return [float(v) for v in np.clip(out, 0.0, 1.0)]


@dataclass
class Batch:
    """One training batch: features, targets, and the embedding rows each
    example's query vector averaged over (needed to scatter gradients)."""

    features: np.ndarray  # (B, d + 12)
    targets: np.ndarray  # (B,)
    token_indices: list[np.ndarray]


@dataclass
class ForwardCache:
    inputs: np.ndarray
    layer_inputs: list[np.ndarray]
    relu_masks: list[np.ndarray | None]
    dropout_masks: list[np.ndarray | None]
    train: bool


def forward(
    model: SeasonModel,
    features: np.ndarray,
    train: bool = False,
    dropout_rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Run the dense stack on (B, d+12) features.

    Train mode applies inverted dropout after each hidden activation, so
    inference needs no rescaling and is dropout-free and deterministic.
    """
    if features.ndim != 2 or features.shape[1] != model.input_dim:
        raise ValueError(
            f"features must be (batch, {model.input_dim}), got {features.shape}"
        )
    if train and model.dropout_rate > 0 and dropout_rng is None:
        raise ValueError("train-mode forward with dropout needs dropout_rng")
    h = features
    cache = ForwardCache(
        inputs=features, layer_inputs=[], relu_masks=[], dropout_masks=[], train=train
    )
    for layer in model.layers:
        cache.layer_inputs.append(h)
        z = h @ layer.weights + layer.bias
        if layer.activation == "relu":
            mask = z > 0
            h = z * mask
            cache.relu_masks.append(mask)
            if train and model.dropout_rate > 0:
                keep = 1.0 - model.dropout_rate
                drop = (dropout_rng.random(h.shape) < keep) / keep
                h = h * drop
                cache.dropout_masks.append(drop)
            else:
                cache.dropout_masks.append(None)
        else:
            h = z
            cache.relu_masks.append(None)
            cache.dropout_masks.append(None)
    return h[:, 0], cache


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean of squared differences (mean, not sum, so the learning rate is
    comparable across batch sizes)."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.size == 0:
        raise ValueError(
            f"predictions {predictions.shape} and targets {targets.shape} must "
            "match and be non-empty"
        )
    diff = predictions - targets
    return float(np.mean(diff * diff))


def backward(
    model: SeasonModel,
    batch: Batch,
    cache: ForwardCache,
    predictions: np.ndarray,
) -> dict[str, np.ndarray]:
    """Gradients of the batch-mean MSE for every trainable tensor.

    Embedding rows not touched by the batch get exactly zero gradient.
    Raises if the cache does not belong to this batch's forward pass.
    """
    if cache.inputs is not batch.features:
        raise ValueError("stale cache: forward was not run on this batch")
    batch_size = predictions.shape[0]
    grads = {name: np.zeros_like(arr) for name, arr in model.parameters().items()}
    # d(mean (p - t)^2)/dp
    delta = (2.0 / batch_size) * (predictions - batch.targets)
    dh = delta[:, None]  # (B, 1) flowing into the output layer
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        if cache.dropout_masks[i] is not None:
            dh = dh * cache.dropout_masks[i]
        dz = dh if cache.relu_masks[i] is None else dh * cache.relu_masks[i]
        grads[f"layers.{i}.weights"][...] = cache.layer_inputs[i].T @ dz
        grads[f"layers.{i}.bias"][...] = dz.sum(axis=0)
        dh = dz @ layer.weights.T
    # dh is now (B, d+12); the first d columns are the query-vector gradient,
    # spread uniformly over the tokens that were averaged
    dqvec = dh[:, : model.embedding_dim]
    counts = np.fromiter((len(ix) for ix in batch.token_indices), dtype=np.int64)
    flat = np.concatenate(batch.token_indices)
    seg = np.repeat(np.arange(len(counts)), counts)
    np.add.at(grads["embedding"], flat, dqvec[seg] / counts[seg, None])
    return grads
