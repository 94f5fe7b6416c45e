"""Training loop for the seasonality regressor.

Splits by query string (not by row) so validation measures cold-start
generalization to unseen queries, minimizes batch-mean squared error with
Adam, early-stops on validation MSE, and is fully deterministic for a fixed
seed on a single thread.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sqac.embeddings import Vocab, build_vocab
from sqac.logs import SeasonalityTarget
from sqac.net import Batch, SeasonModel, backward, forward, mse_loss
from sqac.optim import AdamConfig, AdamState, adam_step

MIN_TARGETS = 100
UNIFORM_SCORE = 1.0 / 12.0


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 256
    max_epochs: int = 50
    val_fraction: float = 0.1
    split_by_query: bool = True
    patience: int = 5
    seed: int = 7
    hidden: tuple[int, ...] = (128, 64)
    dropout_rate: float = 0.2
    embedding_dim: int = 300  # used only when no pre-trained embeddings given
    min_token_freq: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if min(self.batch_size, self.max_epochs, self.patience, self.embedding_dim) < 1:
            raise ValueError("batch_size, max_epochs, patience, embedding_dim must be >= 1")

    def adam(self) -> AdamConfig:
        return AdamConfig(self.learning_rate, self.beta1, self.beta2, self.eps)


@dataclass
class EpochMetrics:
    epoch: int
    train_mse: float
    val_mse: float


@dataclass
class TrainResult:
    model: SeasonModel
    history: list[EpochMetrics] = field(default_factory=list)
    best_epoch: int = 0
    best_val_mse: float = float("inf")
    baseline_val_mse: float = float("nan")  # constant uniform-score predictor
    train_queries: list[str] = field(default_factory=list)
    val_queries: list[str] = field(default_factory=list)


@dataclass
class _Rows:
    """Targets encoded once: token rows, month index, value."""

    token_indices: list[np.ndarray]
    months: np.ndarray  # (n,) int, 0-based
    values: np.ndarray  # (n,) float64
    queries: list[str]

    def __len__(self) -> int:
        return len(self.queries)


def _encode(targets: Sequence[SeasonalityTarget], vocab: Vocab) -> _Rows:
    from sqac.text import tokenize

    tok_cache: dict[str, np.ndarray] = {}
    token_indices = []
    months = np.empty(len(targets), dtype=np.int64)
    values = np.empty(len(targets), dtype=np.float64)
    queries = []
    for i, t in enumerate(targets):
        idx = tok_cache.get(t.query)
        if idx is None:
            idx = vocab.encode(tokenize(t.query))
            tok_cache[t.query] = idx
        token_indices.append(idx)
        months[i] = t.month - 1
        values[i] = t.value
        queries.append(t.query)
    return _Rows(token_indices, months, values, queries)


def _features(model: SeasonModel, rows: _Rows, sel: np.ndarray) -> Batch:
    """Assemble a feature batch from the CURRENT embedding matrix."""
    token_indices = [rows.token_indices[i] for i in sel]
    counts = np.fromiter((len(ix) for ix in token_indices), dtype=np.int64)
    flat = np.concatenate(token_indices)
    seg = np.repeat(np.arange(len(sel)), counts)
    d = model.embedding_dim
    x = np.zeros((len(sel), model.input_dim))
    acc = np.zeros((len(sel), d))
    np.add.at(acc, seg, model.embedding[flat])
    x[:, :d] = acc / counts[:, None]
    x[np.arange(len(sel)), d + rows.months[sel]] = 1.0
    return Batch(features=x, targets=rows.values[sel], token_indices=token_indices)


def evaluate_mse(model: SeasonModel, rows_targets: Sequence[SeasonalityTarget]) -> float:
    """Inference-mode MSE of the model over a target set."""
    rows = _encode(rows_targets, model.vocab)
    return _mse_over(model, rows, np.arange(len(rows)))


def _mse_over(model: SeasonModel, rows: _Rows, sel: np.ndarray, chunk: int = 4096) -> float:
    sq_sum = 0.0
    for start in range(0, len(sel), chunk):
        part = sel[start : start + chunk]
        batch = _features(model, rows, part)
        pred, _ = forward(model, batch.features, train=False)
        diff = pred - batch.targets
        sq_sum += float(diff @ diff)
    return sq_sum / len(sel)


def constant_baseline_mse(values: np.ndarray | Sequence[float], c: float = UNIFORM_SCORE) -> float:
    """MSE of the constant predictor that always answers `c` (default 1/12)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot score a baseline on zero rows")
    return float(np.mean((v - c) ** 2))


def split_queries(
    queries: Sequence[str], val_fraction: float, rng: np.random.Generator
) -> tuple[list[str], list[str]]:
    """Disjoint train/validation query lists (order deterministic per rng)."""
    unique = sorted(set(queries))
    if len(unique) < 2:
        raise ValueError("need at least 2 distinct queries to split by query")
    perm = rng.permutation(len(unique))
    n_val = max(1, int(round(len(unique) * val_fraction)))
    if n_val >= len(unique):
        n_val = len(unique) - 1
    val = [unique[i] for i in perm[:n_val]]
    train = [unique[i] for i in perm[n_val:]]
    return train, val


def train(
    targets: Sequence[SeasonalityTarget],
    embeddings: tuple[Vocab, np.ndarray] | None = None,
    config: TrainConfig = TrainConfig(),
) -> TrainResult:
    """Fit the regressor; returns the best-validation model and history.

    When `embeddings` is None a vocabulary is built from the training corpus
    with uniform random initialization. The returned model is quantized to
    float32-representable parameters so save/load round-trips are exact.
    """
    if len(targets) < MIN_TARGETS:
        raise ValueError(f"need at least {MIN_TARGETS} targets, got {len(targets)}")
    seeds = np.random.SeedSequence(config.seed).spawn(4)
    split_rng = np.random.Generator(np.random.PCG64(seeds[0]))
    shuffle_rng = np.random.Generator(np.random.PCG64(seeds[1]))
    dropout_rng = np.random.Generator(np.random.PCG64(seeds[2]))
    init_seed = int(seeds[3].generate_state(1)[0])

    if config.split_by_query:
        train_q, val_q = split_queries(
            [t.query for t in targets], config.val_fraction, split_rng
        )
        train_set = set(train_q)
        val_set = set(val_q)
        train_targets = [t for t in targets if t.query in train_set]
        val_targets = [t for t in targets if t.query in val_set]
    else:
        perm = split_rng.permutation(len(targets))
        n_val = max(1, int(round(len(targets) * config.val_fraction)))
        val_targets = [targets[i] for i in perm[:n_val]]
        train_targets = [targets[i] for i in perm[n_val:]]
        train_q = sorted({t.query for t in train_targets})
        val_q = sorted({t.query for t in val_targets})
    if not train_targets or not val_targets:
        raise ValueError("degenerate split: train or validation side is empty")

    if embeddings is None:
        vocab, matrix = build_vocab(
            train_q, config.embedding_dim, config.min_token_freq, seed=init_seed
        )
    else:
        vocab, matrix = embeddings

    model = SeasonModel.init(
        vocab,
        matrix,
        hidden=config.hidden,
        dropout_rate=config.dropout_rate,
        seed=init_seed,
    )
    adam_cfg = config.adam()
    state = AdamState.init_like(model.parameters())

    train_rows = _encode(train_targets, vocab)
    val_rows = _encode(val_targets, vocab)
    result = TrainResult(model=model, train_queries=train_q, val_queries=val_q)
    result.baseline_val_mse = constant_baseline_mse(val_rows.values)

    best_params: dict[str, np.ndarray] | None = None
    epochs_since_best = 0
    n = len(train_rows)
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        sq_sum = 0.0
        for start in range(0, n, config.batch_size):
            sel = order[start : start + config.batch_size]
            batch = _features(model, train_rows, sel)
            pred, cache = forward(
                model, batch.features, train=True, dropout_rng=dropout_rng
            )
            sq_sum += mse_loss(pred, batch.targets) * len(sel)
            grads = backward(model, batch, cache, pred)
            adam_step(model.parameters(), grads, state, adam_cfg)
        train_mse = sq_sum / n
        val_mse = _mse_over(model, val_rows, np.arange(len(val_rows)))
        result.history.append(EpochMetrics(epoch, train_mse, val_mse))
        if val_mse < result.best_val_mse:
            result.best_val_mse = val_mse
            result.best_epoch = epoch
            best_params = {k: a.copy() for k, a in model.parameters().items()}
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                break

    if best_params is not None:
        for name, arr in model.parameters().items():
            arr[...] = best_params[name]
    model.round_to_f32()
    return result
