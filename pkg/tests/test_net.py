"""Forward/backward math: hand calculations and finite-difference oracles."""

from __future__ import annotations

import numpy as np
import pytest

from sqac.embeddings import Vocab, build_vocab
from sqac.net import (
    Batch,
    DenseLayer,
    SeasonModel,
    backward,
    forward,
    mse_loss,
)

FD_STEP = 1e-5


def tiny_model(vocab_tokens=("winter", "hats"), d=4, hidden=(6,), seed=0, dropout=0.0):
    vocab = Vocab.from_tokens(vocab_tokens)
    rng = np.random.Generator(np.random.PCG64(seed))
    emb = rng.normal(0, 0.3, size=(len(vocab), d))
    return SeasonModel.init(vocab, emb, hidden=hidden, dropout_rate=dropout, seed=seed + 1)


def random_batch(model, batch_size, seed):
    """Features built the same way training does: mean token rows + one-hot."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n_tokens = len(model.vocab)
    token_indices = [
        rng.integers(0, n_tokens, size=rng.integers(1, 4)) for _ in range(batch_size)
    ]
    months = rng.integers(0, 12, size=batch_size)
    x = np.zeros((batch_size, model.input_dim))
    for i, idx in enumerate(token_indices):
        x[i, : model.embedding_dim] = model.embedding[idx].mean(axis=0)
        x[i, model.embedding_dim + months[i]] = 1.0
    targets = rng.uniform(0, 1, size=batch_size)
    return Batch(features=x, targets=targets, token_indices=token_indices), months


def batch_loss(model, batch, months):
    """Loss recomputed from scratch (features rebuilt from the CURRENT
    embedding) — the function the finite-difference oracle perturbs."""
    x = np.zeros_like(batch.features)
    for i, idx in enumerate(batch.token_indices):
        x[i, : model.embedding_dim] = model.embedding[idx].mean(axis=0)
        x[i, model.embedding_dim + months[i]] = 1.0
    fresh = Batch(features=x, targets=batch.targets, token_indices=batch.token_indices)
    pred, _ = forward(model, fresh.features, train=False)
    return mse_loss(pred, fresh.targets), fresh


def numeric_gradients(model, batch, months):
    """Central finite differences for every trainable scalar."""
    grads = {}
    for name, param in model.parameters().items():
        g = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            ix = it.multi_index
            orig = param[ix]
            param[ix] = orig + FD_STEP
            hi, _ = batch_loss(model, batch, months)
            param[ix] = orig - FD_STEP
            lo, _ = batch_loss(model, batch, months)
            param[ix] = orig
            g[ix] = (hi - lo) / (2 * FD_STEP)
            it.iternext()
        grads[name] = g
    return grads


def max_relative_error(analytic, numeric):
    worst = 0.0
    for name in analytic:
        a, n = analytic[name], numeric[name]
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


# -- forward ------------------------------------------------------------------


def test_all_zero_weights_give_zero_output():
    model = tiny_model()
    for layer in model.layers:
        layer.weights[...] = 0.0
        layer.bias[...] = 0.0
    batch, _ = random_batch(model, 5, seed=1)
    out, _ = forward(model, batch.features)
    assert np.all(out == 0.0)


def test_hand_computed_single_hidden_layer():
    # tiny net evaluated by hand: input (x1, x2), no embedding involvement
    # hidden: W1 = [[1, -1], [2, 0]], b1 = (0.5, -0.5), relu
    # output: w2 = (1, 2), b2 = 0.25
    vocab = Vocab.from_tokens([])
    emb = np.zeros((1, 2))  # d=2 so input_dim = 14; use only first two dims
    model = SeasonModel.init(vocab, emb, hidden=(2,), dropout_rate=0.0, seed=0)
    model.layers[0].weights[...] = 0.0
    model.layers[0].weights[0, 0] = 1.0
    model.layers[0].weights[0, 1] = -1.0
    model.layers[0].weights[1, 0] = 2.0
    model.layers[0].weights[1, 1] = 0.0
    model.layers[0].bias[...] = (0.5, -0.5)
    model.layers[1].weights[...] = [[1.0], [2.0]]
    model.layers[1].bias[...] = 0.25
    x = np.zeros((1, model.input_dim))
    x[0, 0], x[0, 1] = 1.0, 0.5
    # z1 = (1*1 + 0.5*2 + 0.5, 1*(-1) + 0 - 0.5) = (2.5, -1.5); relu -> (2.5, 0)
    # out = 2.5*1 + 0*2 + 0.25 = 2.75
    out, _ = forward(model, x)
    assert out[0] == pytest.approx(2.75, abs=1e-12)


def test_infer_mode_is_deterministic_and_ignores_dropout():
    model = tiny_model(dropout=0.5)
    batch, _ = random_batch(model, 4, seed=2)
    out1, _ = forward(model, batch.features, train=False)
    out2, _ = forward(model, batch.features, train=False)
    assert np.array_equal(out1, out2)


def test_train_mode_dropout_depends_on_rng():
    model = tiny_model(dropout=0.5)
    batch, _ = random_batch(model, 8, seed=3)
    rng_a = np.random.Generator(np.random.PCG64(1))
    rng_b = np.random.Generator(np.random.PCG64(2))
    out_a, _ = forward(model, batch.features, train=True, dropout_rng=rng_a)
    out_b, _ = forward(model, batch.features, train=True, dropout_rng=rng_b)
    assert not np.array_equal(out_a, out_b)


def test_train_mode_requires_rng_when_dropout_on():
    model = tiny_model(dropout=0.2)
    batch, _ = random_batch(model, 2, seed=4)
    with pytest.raises(ValueError, match="dropout_rng"):
        forward(model, batch.features, train=True)


def test_shape_mismatch_is_structural_error():
    model = tiny_model()
    with pytest.raises(ValueError, match="features must be"):
        forward(model, np.zeros((3, model.input_dim + 1)))


# -- loss ----------------------------------------------------------------------


def test_mse_zero_when_equal():
    assert mse_loss(np.array([0.3, 0.7]), np.array([0.3, 0.7])) == 0.0


def test_mse_half_for_unit_error_on_one_of_two():
    assert mse_loss(np.array([1.0, 0.0]), np.array([0.0, 0.0])) == 0.5


def test_mse_matches_direct_formula(rng):
    p = rng.normal(size=10)
    t = rng.normal(size=10)
    direct = sum((a - b) ** 2 for a, b in zip(p, t)) / 10
    assert mse_loss(p, t) == pytest.approx(direct, rel=1e-15)


def test_mse_length_mismatch_raises():
    with pytest.raises(ValueError):
        mse_loss(np.array([1.0]), np.array([1.0, 2.0]))


# -- backward -------------------------------------------------------------------


def test_zero_loss_batch_has_zero_gradients():
    model = tiny_model()
    batch, _ = random_batch(model, 6, seed=5)
    pred, cache = forward(model, batch.features)
    exact = Batch(features=batch.features, targets=pred.copy(), token_indices=batch.token_indices)
    grads = backward(model, exact, cache, pred)
    for g in grads.values():
        assert np.all(g == 0.0)


def test_gradient_matches_central_finite_differences():
    model = tiny_model(vocab_tokens=[f"t{i}" for i in range(6)], d=5, hidden=(8, 4), seed=11)
    batch, months = random_batch(model, 7, seed=12)
    loss, fresh = batch_loss(model, batch, months)
    pred, cache = forward(model, fresh.features)
    analytic = backward(model, fresh, cache, pred)
    numeric = numeric_gradients(model, fresh, months)
    assert max_relative_error(analytic, numeric) <= 1e-4


def test_untouched_embedding_rows_have_zero_gradient():
    model = tiny_model(vocab_tokens=[f"t{i}" for i in range(9)], d=3, hidden=(4,))
    x = np.zeros((1, model.input_dim))
    idx = np.array([2, 3])
    x[0, : model.embedding_dim] = model.embedding[idx].mean(axis=0)
    x[0, model.embedding_dim] = 1.0
    batch = Batch(features=x, targets=np.array([0.9]), token_indices=[idx])
    pred, cache = forward(model, batch.features)
    grads = backward(model, batch, cache, pred)
    touched = set(idx.tolist())
    for row in range(len(model.vocab)):
        if row not in touched:
            assert np.all(grads["embedding"][row] == 0.0)


def test_batch_gradient_is_mean_of_single_example_gradients():
    model = tiny_model(vocab_tokens=["a", "b", "c"], d=4, hidden=(5,))
    batch, _ = random_batch(model, 2, seed=21)
    pred, cache = forward(model, batch.features)
    combined = backward(model, batch, cache, pred)

    singles = []
    for i in range(2):
        sub = Batch(
            features=batch.features[i : i + 1],
            targets=batch.targets[i : i + 1],
            token_indices=[batch.token_indices[i]],
        )
        p, c = forward(model, sub.features)
        singles.append(backward(model, sub, c, p))
    for name in combined:
        mean = (singles[0][name] + singles[1][name]) / 2
        assert np.allclose(combined[name], mean, atol=1e-14)


def test_stale_cache_rejected():
    model = tiny_model()
    batch_a, _ = random_batch(model, 3, seed=31)
    batch_b, _ = random_batch(model, 3, seed=32)
    pred, cache = forward(model, batch_a.features)
    with pytest.raises(ValueError, match="stale cache"):
        backward(model, batch_b, cache, pred)


# -- predict ----------------------------------------------------------------------


def test_predict_clamps_to_unit_interval():
    model = tiny_model()
    model.layers[-1].weights[...] = 0.0
    model.layers[-1].bias[...] = -0.02
    assert model.predict("winter hats", 1) == 0.0
    model.layers[-1].bias[...] = 1.7
    assert model.predict("winter hats", 1) == 1.0


def test_predict_is_deterministic():
    model = tiny_model(dropout=0.3)
    assert model.predict("winter hats", 3) == model.predict("winter hats", 3)


def test_predict_months_matches_predict():
    model = tiny_model()
    by_month = model.predict_months("winter hats")
    assert len(by_month) == 12
    for m in range(1, 13):
        assert by_month[m - 1] == pytest.approx(model.predict("winter hats", m), abs=1e-12)


def test_model_shape_validation():
    vocab = Vocab.from_tokens(["a"])
    emb = np.zeros((2, 3))
    with pytest.raises(ValueError, match="output layer"):
        SeasonModel(
            vocab=vocab,
            embedding=emb,
            layers=[DenseLayer(np.zeros((15, 2)), np.zeros(2), "relu")],
        )
    with pytest.raises(ValueError, match="layer 0"):
        SeasonModel(
            vocab=vocab,
            embedding=emb,
            layers=[DenseLayer(np.zeros((9, 1)), np.zeros(1), "linear")],
        )


def test_build_vocab_integration_predicts_for_oov_queries(small_model):
    # completely unseen tokens route through UNK and still score
    score = small_model.predict("zzzz qqqq", 6)
    assert 0.0 <= score <= 1.0
