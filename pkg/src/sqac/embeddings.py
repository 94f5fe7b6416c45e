"""Token vocabulary and query embeddings.

Supports two sources: a pre-trained word-vector text file (one token and its
vector per line), or a corpus-built vocabulary with uniform random
initialization when no file is supplied. Queries embed as the mean of their
token vectors; out-of-vocabulary tokens map to a zero-initialized UNK row.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from sqac.text import UNK_TOKEN, tokenize

UNK_INDEX = 0


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]  # tokens[UNK_INDEX] == UNK_TOKEN
    index: dict[str, int]

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocab":
        ordered = [UNK_TOKEN]
        seen = {UNK_TOKEN}
        for tok in tokens:
            if tok not in seen:
                seen.add(tok)
                ordered.append(tok)
        return cls(tokens=tuple(ordered), index={t: i for i, t in enumerate(ordered)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def lookup(self, token: str) -> int:
        return self.index.get(token, UNK_INDEX)

    def encode(self, tokens: Iterable[str]) -> np.ndarray:
        return np.fromiter((self.lookup(t) for t in tokens), dtype=np.int64)


def load_embeddings(path: str | Path, dim: int) -> tuple[Vocab, np.ndarray]:
    """Parse a whitespace-separated `token v1 .. vd` embedding file.

    Returns the vocabulary (UNK prepended, zero-initialized) and a float64
    matrix whose row i is token i's vector. Any row with the wrong number of
    values raises ValueError with its line number. Repeated tokens keep
    their first occurrence.
    """
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if parts == [""]:
                continue
            if len(parts) != dim + 1:
                raise ValueError(
                    f"embedding file {path} line {line_no}: expected {dim} values, "
                    f"got {len(parts) - 1}"
                )
            token = parts[0]
            if token in seen or token == UNK_TOKEN:
                continue
            try:
                vec = np.asarray([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ValueError(
                    f"embedding file {path} line {line_no}: non-numeric value"
                ) from None
            seen.add(token)
            tokens.append(token)
            rows.append(vec)
    vocab = Vocab.from_tokens(tokens)
    matrix = np.zeros((len(vocab), dim), dtype=np.float64)
    if rows:
        matrix[1:] = np.vstack(rows)
    return vocab, matrix


def build_vocab(
    queries: Iterable[str], dim: int, min_token_freq: int = 2, seed: int = 0
) -> tuple[Vocab, np.ndarray]:
    """Fallback vocabulary from a training corpus with random-uniform vectors.

    Tokens appearing fewer than `min_token_freq` times across the distinct
    queries fall back to UNK. Vectors are uniform in [-0.05, 0.05]; the UNK
    row stays zero.
    """
    counts: Counter[str] = Counter()
    for query in queries:
        counts.update(tokenize(query))
    kept = sorted(t for t, c in counts.items() if c >= min_token_freq and t != UNK_TOKEN)
    vocab = Vocab.from_tokens(kept)
    rng = np.random.Generator(np.random.PCG64(seed))
    matrix = rng.uniform(-0.05, 0.05, size=(len(vocab), dim))
    matrix[UNK_INDEX] = 0.0
    return vocab, matrix


def embed_query(tokens: list[str], vocab: Vocab, matrix: np.ndarray) -> np.ndarray:
    """Mean of the tokens' embedding rows (OOV tokens use the UNK row)."""
    if not tokens:
        raise ValueError("tokens must be non-empty; tokenize() never returns []")
    idx = vocab.encode(tokens)
    return matrix[idx].mean(axis=0)
