"""Two-stage ranking: offline engagement score (L1) and runtime re-rank (L2).

L1 is a linear combination of engagement counts and is stored in the
completion index. L2 re-ranks the top-N retrieved candidates at request time
by blending the min-max-normalized L1 score with the seasonality score for
the request month, then displays the top K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from sqac.trie import IndexEntry

# (add_to_carts, clicks, impressions); purchase intent dominates
DEFAULT_L1_WEIGHTS = (10.0, 1.0, 0.02)


class SeasonalityScorer(Protocol):
    def predict(self, query: str, month: int) -> float: ...


@dataclass(frozen=True)
class EngagementRecord:
    """Per-query engagement counts feeding the offline L1 score."""

    query: str
    add_to_carts: float
    clicks: float
    impressions: float

    def __post_init__(self) -> None:
        if min(self.add_to_carts, self.clicks, self.impressions) < 0:
            raise ValueError("engagement counts must be non-negative")


@dataclass(frozen=True)
class L2Config:
    """Runtime re-rank parameters.

    alpha is the seasonality-signal weight in the convex blend
    (1-alpha) * normalized_l1 + alpha * seasonality; alpha=0 is the control
    configuration and reproduces the L1 order exactly.
    """

    alpha: float = 0.3
    n_candidates: int = 50
    k_display: int = 10
    l1_norm: str = "minmax"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k_display < 1:
            raise ValueError("k_display must be >= 1")
        if self.n_candidates < self.k_display:
            raise ValueError("n_candidates must be >= k_display")
        if self.l1_norm != "minmax":
            raise ValueError(f"unsupported l1 normalization mode {self.l1_norm!r}")


@dataclass(frozen=True)
class RankedSuggestion:
    query: str
    l1_score: float
    seasonality: float
    final_score: float
    rank: int


def l1_score(
    record: EngagementRecord, weights: tuple[float, float, float] = DEFAULT_L1_WEIGHTS
) -> float:
    """Offline score: engagement counts dotted with non-negative weights."""
    if min(weights) < 0:
        raise ValueError("L1 weights must be non-negative")
    if max(weights) == 0:
        raise ValueError("L1 weights must not be all zero")
    return (
        record.add_to_carts * weights[0]
        + record.clicks * weights[1]
        + record.impressions * weights[2]
    )


def minmax_normalize(scores: Sequence[float]) -> np.ndarray:
    """Min-max normalize to [0, 1]; a degenerate (constant) set maps to 0.5
    so the seasonality signal alone decides the order."""
    arr = np.asarray(scores, dtype=np.float64)
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.full_like(arr, 0.5)
    return (arr - lo) / (hi - lo)


def _resolve_scorer(
    scorer: SeasonalityScorer | Callable[[str, int], float],
) -> Callable[[str, int], float]:
    predict = getattr(scorer, "predict", None)
    return predict if callable(predict) else scorer


def l2_rerank(
    candidates: Sequence[IndexEntry],
    month: int,
    scorer: SeasonalityScorer | Callable[[str, int], float],
    config: L2Config = L2Config(),
) -> list[RankedSuggestion]:
    """Re-rank L1-ordered candidates for the request month; return top K.

    final = (1 - alpha) * minmax(l1 over the candidate set)
            + alpha * seasonality(query, month)

    Ties break by ascending query text. An empty candidate list returns [].
    """
    if not 1 <= month <= 12:
        raise ValueError(f"month must be in 1..12, got {month}")
    if not candidates:
        return []
    season = _resolve_scorer(scorer)
    l1_raw = [c.l1_score for c in candidates]
    l1_norm = minmax_normalize(l1_raw)
    s = np.array([season(c.query, month) for c in candidates])
    final = (1.0 - config.alpha) * l1_norm + config.alpha * s
    if config.alpha == 0.0:
        # control configuration must reproduce the L1 order bit-exactly even
        # when min-max rounding collapses near-equal scores
        order = sorted(range(len(candidates)), key=lambda i: (-l1_raw[i], candidates[i].query))
    else:
        order = sorted(range(len(candidates)), key=lambda i: (-final[i], candidates[i].query))
    return [
        RankedSuggestion(
            query=candidates[i].query,
            l1_score=float(l1_raw[i]),
            seasonality=float(s[i]),
            final_score=float(final[i]),
            rank=rank,
        )
        for rank, i in enumerate(order[: config.k_display], start=1)
    ]


def newcomers(
    candidates: Sequence[IndexEntry],
    reranked: Sequence[RankedSuggestion],
    k: int | None = None,
) -> set[str]:
    """Queries the re-rank promoted into the displayed top K from beyond the
    L1 top K — the payoff of retrieving N > K candidates."""
    if k is None:
        k = len(reranked)
    l1_top = {c.query for c in candidates[:k]}
    return {r.query for r in reranked} - l1_top
