"""Shared fixtures: a small planted corpus and a model trained on it.

Session-scoped because training, even at desk scale, dominates test runtime;
every consumer treats these as immutable.
"""

from __future__ import annotations

import numpy as np
import pytest

from sqac.logs import ingest_events, seasonality_targets
from sqac.synth import SynthSpec, build_corpus_entries, generate_queries, synth_logs
from sqac.training import TrainConfig, train
from sqac.trie import CompletionIndex


SMALL_SPEC = SynthSpec(n_queries=700, seasonal_fraction=0.5, seed=101)

SMALL_TRAIN_CONFIG = TrainConfig(
    seed=13,
    embedding_dim=24,
    hidden=(48, 24),
    max_epochs=15,
    batch_size=128,
    patience=4,
)


@pytest.fixture(scope="session")
def small_spec() -> SynthSpec:
    return SMALL_SPEC


@pytest.fixture(scope="session")
def small_table(small_spec):
    table, _ = ingest_events(iter(list(synth_logs(small_spec))))
    return table


@pytest.fixture(scope="session")
def small_targets(small_table):
    return seasonality_targets(small_table, k_threshold=60)


@pytest.fixture(scope="session")
def small_entries(small_table):
    return build_corpus_entries(small_table, seed=5)


@pytest.fixture(scope="session")
def small_index(small_entries):
    return CompletionIndex(small_entries)


@pytest.fixture(scope="session")
def small_train_result(small_targets):
    return train(small_targets, None, SMALL_TRAIN_CONFIG)


@pytest.fixture(scope="session")
def small_model(small_train_result):
    return small_train_result.model


@pytest.fixture(scope="session")
def planted_peaks(small_spec):
    return {q.query: q.peak_month for q in generate_queries(small_spec) if q.peak_month}


@pytest.fixture(scope="session")
def artifact_dir(tmp_path_factory, small_model, small_index):
    from sqac.model_io import save_model

    path = tmp_path_factory.mktemp("artifacts")
    save_model(small_model, path / "model.sqac")
    small_index.save(path / "index.sqix")
    return path


def circular_month_distance(a: int, b: int) -> int:
    return min((a - b) % 12, (b - a) % 12)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(20240601))
