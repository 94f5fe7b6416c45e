"""Offline MRR replay and control-vs-test comparison.

Each held-out query is replayed character by character in the month its
traffic occurred; at every prefix the full retrieval + rerank pipeline runs
and the reciprocal rank of the ground-truth query inside the displayed top K
is recorded (0 when absent). Aggregates are exact means, so reports are
identical regardless of evaluation order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from sqac.errors import CaseSetMismatchError
from sqac.ranker import L2Config, RankedSuggestion, SeasonalityScorer, l2_rerank
from sqac.trie import CompletionIndex


@dataclass(frozen=True)
class ReplayCase:
    """Ground truth query, the month to replay it in, and its prefixes."""

    query: str
    month: int
    prefixes: tuple[str, ...]

    @classmethod
    def make(cls, query: str, month: int) -> "ReplayCase":
        if not query:
            raise ValueError("replay query must be non-empty")
        if not 1 <= month <= 12:
            raise ValueError(f"month must be in 1..12, got {month}")
        return cls(
            query=query,
            month=month,
            prefixes=tuple(query[:i] for i in range(1, len(query) + 1)),
        )


def gen_cases(queries: Sequence[str], months: Sequence[int]) -> list[ReplayCase]:
    """One replay case per (query, month) pair, with exhaustive prefixes."""
    if not queries:
        raise ValueError("no queries to generate cases from")
    if len(queries) != len(months):
        raise ValueError("queries and months must have equal length")
    return [ReplayCase.make(q, m) for q, m in zip(queries, months)]


def reciprocal_rank(
    suggestions: Sequence[RankedSuggestion] | Sequence[str], truth: str
) -> float:
    """1/rank of the truth within the shown suggestions, 0 when absent."""
    for pos, s in enumerate(suggestions, start=1):
        query = s.query if isinstance(s, RankedSuggestion) else s
        if query == truth:
            return 1.0 / pos
    return 0.0


def cases_fingerprint(cases: Sequence[ReplayCase]) -> str:
    h = hashlib.sha256()
    for c in cases:
        h.update(f"{c.query}\t{c.month}\n".encode())
    return h.hexdigest()


@dataclass
class EvalReport:
    mrr: float
    reciprocal_ranks: list[float]
    case_count: int
    prefix_count: int
    config: dict
    config_fingerprint: str
    cases_fp: str

    def to_dict(self) -> dict:
        return {
            "mrr": self.mrr,
            "case_count": self.case_count,
            "prefix_count": self.prefix_count,
            "config": self.config,
            "config_fingerprint": self.config_fingerprint,
            "cases_fingerprint": self.cases_fp,
        }


@dataclass
class LiftReport:
    control_mrr: float
    test_mrr: float
    relative_lift: float
    wins: int
    losses: int
    ties: int
    p_value: float  # two-sided exact sign test over paired per-prefix deltas
    deltas: list[float] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "control_mrr": self.control_mrr,
            "test_mrr": self.test_mrr,
            "relative_lift": self.relative_lift,
            "relative_lift_pct": 100.0 * self.relative_lift,
            "wins": self.wins,
            "losses": self.losses,
            "ties": self.ties,
            "p_value": self.p_value,
        }


class _MemoScorer:
    """Caches seasonality lookups; candidate sets repeat heavily across prefixes."""

    def __init__(self, scorer: SeasonalityScorer | Callable[[str, int], float]) -> None:
        self._fn = scorer.predict if hasattr(scorer, "predict") else scorer
        self._cache: dict[tuple[str, int], float] = {}

    def predict(self, query: str, month: int) -> float:
        key = (query, month)
        val = self._cache.get(key)
        if val is None:
            val = self._fn(query, month)
            self._cache[key] = val
        return val


def run_eval(
    cases: Sequence[ReplayCase],
    index: CompletionIndex,
    scorer: SeasonalityScorer | Callable[[str, int], float],
    config: L2Config = L2Config(),
    model_fingerprint: str = "",
) -> EvalReport:
    """Replay every case through retrieve(top-N by L1) + rerank(top-K)."""
    if not cases:
        raise ValueError("no replay cases")
    memo = _MemoScorer(scorer)
    rr: list[float] = []
    for case in cases:
        for prefix in case.prefixes:
            candidates = [e for e, _ in index.complete(prefix, config.n_candidates, "l1")]
            shown = l2_rerank(candidates, case.month, memo, config)
            rr.append(reciprocal_rank(shown, case.query))
    cfg = {
        "alpha": config.alpha,
        "n_candidates": config.n_candidates,
        "k_display": config.k_display,
        "index_fingerprint": index.fingerprint(),
        "model_fingerprint": model_fingerprint,
    }
    cfg_fp = hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()
    ).hexdigest()
    return EvalReport(
        mrr=sum(rr) / len(rr),
        reciprocal_ranks=rr,
        case_count=len(cases),
        prefix_count=len(rr),
        config=cfg,
        config_fingerprint=cfg_fp,
        cases_fp=cases_fingerprint(cases),
    )


def sign_test_p(wins: int, losses: int) -> float:
    """Exact two-sided sign test p-value (ties discarded beforehand)."""
    n = wins + losses
    if n == 0:
        return 1.0
    k = max(wins, losses)
    tail = sum(math.comb(n, i) for i in range(k, n + 1)) / 2.0**n
    return min(1.0, 2.0 * tail)


def ab_compare(control: EvalReport, test: EvalReport) -> LiftReport:
    """Relative MRR lift plus a paired per-prefix sign test."""
    if control.cases_fp != test.cases_fp:
        raise CaseSetMismatchError(
            "control and test reports were built from different case sets"
        )
    if len(control.reciprocal_ranks) != len(test.reciprocal_ranks):
        raise CaseSetMismatchError("reports carry different prefix counts")
    deltas = [
        t - c for c, t in zip(control.reciprocal_ranks, test.reciprocal_ranks)
    ]
    wins = sum(1 for d in deltas if d > 0)
    losses = sum(1 for d in deltas if d < 0)
    ties = len(deltas) - wins - losses
    if control.mrr > 0:
        lift = (test.mrr - control.mrr) / control.mrr
    else:
        lift = math.inf if test.mrr > 0 else 0.0
    return LiftReport(
        control_mrr=control.mrr,
        test_mrr=test.mrr,
        relative_lift=lift,
        wins=wins,
        losses=losses,
        ties=ties,
        p_value=sign_test_p(wins, losses),
        deltas=deltas,
    )


def read_cases(path: str | Path) -> list[ReplayCase]:
    """Read a cases TSV: `query<TAB>month` per line."""
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"cases file line {line_no}: expected 2 fields")
            out.append(ReplayCase.make(parts[0], int(parts[1])))
    return out


def write_cases(path: str | Path, cases: Sequence[ReplayCase]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for c in cases:
            fh.write(f"{c.query}\t{c.month}\n")
