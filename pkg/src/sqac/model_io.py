"""Model persistence in the versioned SQAC container format.

Weights are stored as float32; loading restores them into float64 storage
holding exactly the float32 values, and trained models are quantized the
same way, so predictions before save and after load agree bit for bit.
"""

from __future__ import annotations

from pathlib import Path

from sqac import container
from sqac.embeddings import Vocab
from sqac.errors import ContainerError
from sqac.net import DenseLayer, SeasonModel

MODEL_MAGIC = b"SQAC"
MODEL_VERSION = 1


def save_model(model: SeasonModel, path: str | Path) -> None:
    meta = {
        "kind": "season-model",
        "tokens": list(model.vocab.tokens),
        "embedding_dim": model.embedding_dim,
        "dropout_rate": model.dropout_rate,
        "layers": [
            {
                "n_in": int(l.weights.shape[0]),
                "n_out": int(l.weights.shape[1]),
                "activation": l.activation,
            }
            for l in model.layers
        ],
    }
    tensors = {"embedding": model.embedding}
    for i, layer in enumerate(model.layers):
        tensors[f"layers.{i}.weights"] = layer.weights
        tensors[f"layers.{i}.bias"] = layer.bias
    container.write_container(path, MODEL_MAGIC, MODEL_VERSION, meta, tensors)


def load_model(path: str | Path) -> SeasonModel:
    _, meta, tensors = container.read_container(path, MODEL_MAGIC, MODEL_VERSION)
    try:
        tokens = meta["tokens"]
        if tokens[0] != "<unk>":
            raise ContainerError("model vocabulary must start with the UNK token")
        vocab = Vocab(tokens=tuple(tokens), index={t: i for i, t in enumerate(tokens)})
        layers = [
            DenseLayer(
                weights=tensors[f"layers.{i}.weights"],
                bias=tensors[f"layers.{i}.bias"],
                activation=spec["activation"],
            )
            for i, spec in enumerate(meta["layers"])
        ]
        model = SeasonModel(
            vocab=vocab,
            embedding=tensors["embedding"],
            layers=layers,
            dropout_rate=float(meta["dropout_rate"]),
        )
    except (KeyError, IndexError, ValueError) as exc:
        raise ContainerError(f"model metadata malformed: {exc}") from exc
    for spec, layer in zip(meta["layers"], model.layers):
        if layer.weights.shape != (spec["n_in"], spec["n_out"]):
            raise ContainerError(
                f"layer tensor shape {layer.weights.shape} does not match "
                f"declared ({spec['n_in']}, {spec['n_out']})"
            )
    if model.embedding.shape != (len(vocab), int(meta["embedding_dim"])):
        raise ContainerError("embedding tensor shape does not match metadata")
    return model
