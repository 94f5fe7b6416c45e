"""Seasonality-aware query autocomplete.

Pipeline: query logs -> monthly volume aggregation -> per-query monthly
seasonality targets -> feed-forward neural regressor (query, month) -> score
-> prefix-trie retrieval -> two-stage rerank (offline engagement score blended
with the seasonality signal) -> MRR replay evaluation, plus an HTTP suggest
service and a unified CLI.
"""

from sqac.errors import (
    CaseSetMismatchError,
    ContainerChecksumError,
    ContainerError,
    ContainerVersionError,
    IngestError,
    MonthCoverageError,
    YearOverlapError,
)
from sqac.logs import (
    LogEvent,
    MonthlyVolumeTable,
    SeasonalityTarget,
    ingest_events,
    merge_years,
    seasonality_targets,
)
from sqac.net import SeasonModel
from sqac.ranker import EngagementRecord, L2Config, RankedSuggestion, l1_score, l2_rerank
from sqac.synth import SynthSpec, synth_logs
from sqac.trie import CompletionIndex, IndexEntry

__version__ = "0.1.0"

__all__ = [
    "CaseSetMismatchError",
    "CompletionIndex",
    "ContainerChecksumError",
    "ContainerError",
    "ContainerVersionError",
    "EngagementRecord",
    "IndexEntry",
    "IngestError",
    "L2Config",
    "LogEvent",
    "MonthCoverageError",
    "MonthlyVolumeTable",
    "RankedSuggestion",
    "SeasonModel",
    "SeasonalityTarget",
    "SynthSpec",
    "YearOverlapError",
    "__version__",
    "ingest_events",
    "l1_score",
    "l2_rerank",
    "merge_years",
    "seasonality_targets",
    "synth_logs",
]
