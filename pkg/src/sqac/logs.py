"""Query-log ingestion, monthly aggregation, and seasonality targets.

A query's seasonality value for month m is the month-normalized share of its
annual traffic:

    value(q, m) = (t_qm / t_m) / sum_m'( t_qm' / t_m' )

where t_qm is the query's traffic in calendar month m and t_m is the total
traffic of that month over the whole log. Values lie in [0, 1] and sum to 1
over the 12 months of a retained query.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from sqac.errors import IngestError, MonthCoverageError, YearOverlapError
from sqac.text import normalize_query

MONTHS = range(1, 13)

DEFAULT_K_THRESHOLD = 60  # min total annual occurrences to keep a query


@dataclass(frozen=True)
class LogEvent:
    """One pre-aggregated traffic observation: (query, year, month, count)."""

    query: str
    year: int
    month: int
    count: int

    def __post_init__(self) -> None:
        if not self.query:
            raise ValueError("event query must be non-empty")
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class SeasonalityTarget:
    """Training record: the observed seasonality of one (query, month)."""

    query: str
    month: int
    value: float


@dataclass
class IngestStats:
    """Line-level accounting for one ingestion pass."""

    total_lines: int = 0
    event_lines: int = 0
    comment_lines: int = 0
    malformed_lines: int = 0
    malformed_samples: list[tuple[int, str]] = field(default_factory=list)

    MAX_SAMPLES = 10

    def record_malformed(self, line_no: int, reason: str) -> None:
        self.malformed_lines += 1
        if len(self.malformed_samples) < self.MAX_SAMPLES:
            self.malformed_samples.append((line_no, reason))


class MonthlyVolumeTable:
    """Per-(query, calendar month) traffic counts plus per-month totals.

    Month totals cover ALL ingested traffic, including queries that a later
    thresholding step drops, so they must be accumulated at ingest time and
    never recomputed from the retained cells.
    """

    def __init__(self) -> None:
        self._volumes: dict[str, list[int]] = {}  # query -> 12 monthly counts
        self.month_totals: list[int] = [0] * 12
        self.years_merged: set[int] = set()

    def add(self, query: str, month: int, count: int) -> None:
        row = self._volumes.get(query)
        if row is None:
            row = [0] * 12
            self._volumes[query] = row
        row[month - 1] += count
        self.month_totals[month - 1] += count

    def queries(self) -> Iterator[str]:
        return iter(self._volumes)

    def __len__(self) -> int:
        return len(self._volumes)

    def __contains__(self, query: str) -> bool:
        return query in self._volumes

    def volumes(self, query: str) -> list[int]:
        """The query's 12 monthly counts (January first)."""
        return list(self._volumes[query])

    def cell(self, query: str, month: int) -> int:
        row = self._volumes.get(query)
        return row[month - 1] if row is not None else 0

    def query_total(self, query: str) -> int:
        return sum(self._volumes[query])


def parse_event_line(line: str) -> LogEvent | None:
    """Parse one TSV event line `query<TAB>YYYY-MM<TAB>count`.

    Returns None for comment/blank lines; raises ValueError when malformed.
    """
    stripped = line.rstrip("\n").rstrip("\r")
    if not stripped.strip() or stripped.lstrip().startswith("#"):
        return None
    parts = stripped.split("\t")
    if len(parts) != 3:
        raise ValueError(f"expected 3 tab-separated fields, got {len(parts)}")
    raw_query, month_key, raw_count = parts
    query = normalize_query(raw_query)
    if not query:
        raise ValueError("query empty after normalization")
    try:
        year_s, month_s = month_key.split("-")
        year, month = int(year_s), int(month_s)
    except ValueError:
        raise ValueError(f"bad month key {month_key!r}, expected YYYY-MM") from None
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range: {month}")
    try:
        count = int(raw_count)
    except ValueError:
        raise ValueError(f"bad count {raw_count!r}") from None
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return LogEvent(query=query, year=year, month=month, count=count)


def ingest_events(source: Iterable[str] | str | Path) -> tuple[MonthlyVolumeTable, IngestStats]:
    """Aggregate a line-oriented event stream into a MonthlyVolumeTable.

    `source` is a path or an iterable of lines. Malformed lines are counted
    and reported via IngestStats, not fatal; a source with no valid event at
    all raises IngestError.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            handle: io.TextIOBase = path.open("r", encoding="utf-8")
        except OSError as exc:
            raise IngestError(f"cannot read event log {path}: {exc}") from exc
        with handle:
            return ingest_events(handle)

    table = MonthlyVolumeTable()
    stats = IngestStats()
    for line_no, line in enumerate(source, start=1):
        stats.total_lines += 1
        try:
            event = parse_event_line(line)
        except ValueError as exc:
            stats.record_malformed(line_no, str(exc))
            continue
        if event is None:
            stats.comment_lines += 1
            continue
        stats.event_lines += 1
        table.add(event.query, event.month, event.count)
        table.years_merged.add(event.year)
    if stats.event_lines == 0:
        detail = "; ".join(f"line {n}: {r}" for n, r in stats.malformed_samples)
        raise IngestError(
            f"no valid events in source ({stats.total_lines} lines, "
            f"{stats.malformed_lines} malformed{'; ' + detail if detail else ''})"
        )
    return table, stats


def merge_years(tables: list[MonthlyVolumeTable]) -> MonthlyVolumeTable:
    """Sum tables cellwise by calendar month across disjoint year sets."""
    if not tables:
        raise ValueError("merge_years needs at least one table")
    merged = MonthlyVolumeTable()
    for table in tables:
        overlap = merged.years_merged & table.years_merged
        if overlap:
            raise YearOverlapError(
                f"years {sorted(overlap)} appear in more than one table; "
                "merging would double count"
            )
        merged.years_merged |= table.years_merged
        for query in table.queries():
            for month, count in enumerate(table.volumes(query), start=1):
                if count:
                    merged.add(query, month, count)
    return merged


def seasonality_targets(
    table: MonthlyVolumeTable,
    k_threshold: int = DEFAULT_K_THRESHOLD,
    sample_fraction: float = 1.0,
    sample_seed: int = 0,
) -> list[SeasonalityTarget]:
    """Normalized monthly seasonality values for every retained query.

    Queries whose total volume is below `k_threshold` are dropped. Each
    retained query emits exactly 12 targets (zero-traffic months emit 0.0).
    `sample_fraction` optionally keeps a random subset of retained queries.
    """
    if k_threshold < 1:
        raise ValueError("k_threshold must be >= 1")
    if not 0.0 < sample_fraction <= 1.0:
        raise ValueError("sample_fraction must be in (0, 1]")
    zero_months = [m for m in MONTHS if table.month_totals[m - 1] == 0]
    if zero_months:
        raise MonthCoverageError(
            f"months {zero_months} have zero total traffic; restrict the table "
            "to months with traffic before computing seasonality"
        )

    retained = sorted(q for q in table.queries() if table.query_total(q) >= k_threshold)
    if sample_fraction < 1.0 and retained:
        rng = np.random.Generator(np.random.PCG64(sample_seed))
        keep = max(1, int(round(len(retained) * sample_fraction)))
        picked = rng.choice(len(retained), size=keep, replace=False)
        retained = [retained[i] for i in sorted(picked)]

    totals = np.asarray(table.month_totals, dtype=np.float64)
    out: list[SeasonalityTarget] = []
    for query in retained:
        shares = np.asarray(table.volumes(query), dtype=np.float64) / totals
        values = shares / shares.sum()
        out.extend(
            SeasonalityTarget(query=query, month=m, value=float(values[m - 1]))
            for m in MONTHS
        )
    return out


def write_targets(path: str | Path, targets: Iterable[SeasonalityTarget]) -> None:
    """Write targets as TSV `query<TAB>month<TAB>value` with 9 fraction digits."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for t in targets:
            fh.write(f"{t.query}\t{t.month}\t{t.value:.9f}\n")


def read_targets(path: str | Path) -> list[SeasonalityTarget]:
    """Read a targets TSV written by write_targets."""
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"targets file line {line_no}: expected 3 fields")
            out.append(
                SeasonalityTarget(query=parts[0], month=int(parts[1]), value=float(parts[2]))
            )
    return out
