"""Deterministic synthetic query-log generation.

Stands in for production search logs at desk scale: a configurable share of
queries carries a planted seasonal token whose traffic concentrates in a
3-month window around a planted peak month; the rest draw near-uniform
monthly traffic. Output is the same TSV event format the ingester reads, so
the full pipeline can be exercised end to end from one seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from sqac.logs import MonthlyVolumeTable
from sqac.ranker import DEFAULT_L1_WEIGHTS, EngagementRecord, l1_score
from sqac.trie import IndexEntry

# Traffic inside the 3-month window centered on the planted peak is forced to
# at least this share of a seasonal query's annual volume.
PEAK_WINDOW_MIN_SHARE = 0.70

DEFAULT_SEASONAL_TOKENS: dict[str, int] = {
    "winter": 1,
    "valentines": 2,
    "shamrock": 3,
    "easter": 4,
    "memorial": 5,
    "graduation": 6,
    "fireworks": 7,
    "school": 8,
    "harvest": 9,
    "halloween": 10,
    "thanksgiving": 11,
    "christmas": 12,
}

_ADJECTIVES = [
    "wireless", "portable", "ceramic", "wooden", "stainless", "organic",
    "vintage", "compact", "foldable", "waterproof", "rechargeable", "velvet",
    "leather", "bamboo", "copper", "glass", "magnetic", "adjustable",
    "insulated", "ergonomic", "reflective", "scented", "cordless", "heavy",
    "slim", "double", "giant", "mini", "deluxe", "classic", "modern",
    "rustic", "floral", "striped", "plaid", "quilted", "knitted", "fleece",
    "thermal", "electric", "manual", "digital", "smart", "solar", "matte",
    "glossy", "premium", "budget", "kids", "adult", "travel", "outdoor",
    "indoor", "luxury", "handmade", "recycled", "padded", "ventilated",
]

_NOUNS = [
    "hats", "gloves", "scarf", "mattress", "pillow", "blanket", "candle",
    "lamp", "charger", "speaker", "headphones", "kettle", "toaster", "mug",
    "bottle", "backpack", "wallet", "umbrella", "jacket", "boots", "sandals",
    "sneakers", "socks", "dress", "shirt", "sweater", "shorts", "leggings",
    "curtains", "rug", "mirror", "shelf", "organizer", "hanger", "basket",
    "planter", "vase", "frame", "clock", "fan", "heater", "cooler", "grill",
    "tent", "chair", "table", "desk", "stool", "bench", "hammock", "swing",
    "puzzle", "board game", "cards", "markers", "notebook", "stickers",
    "ribbon", "wrapping paper", "ornaments", "lights", "garland", "wreath",
    "costume", "mask", "decorations", "banner", "balloons", "confetti",
    "flowers", "gift", "basket set", "candy", "chocolate", "cookies",
    "napkins", "plates", "cups", "tablecloth", "apron", "oven mitts",
    "soap", "lotion", "shampoo", "towels", "robe", "slippers", "sunscreen",
    "goggles", "float", "swimsuit", "towel set", "cooler bag", "thermos",
    "flashlight", "lantern", "batteries", "toolkit", "ladder", "hose",
    "sprinkler", "shears", "seeds", "fertilizer", "mulch", "gnome",
]

_MODIFIERS = [
    "for kids", "for men", "for women", "set", "large", "small", "xl",
    "2 pack", "3 pack", "with stand", "with case", "with lid", "with remote",
    "refill", "replacement", "bundle", "kit", "clearance", "sale",
    "near me", "under 20", "under 50", "online", "free shipping",
]


@dataclass(frozen=True)
class SynthSpec:
    """Configuration for one deterministic synthetic log.

    The seed fully determines the byte content of the generated stream.
    """

    n_queries: int = 1000
    seasonal_fraction: float = 0.5
    seasonal_tokens: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_SEASONAL_TOKENS)
    )
    noise: float = 1.0
    seed: int = 7
    year: int = 2022
    min_annual_volume: int = 300
    max_annual_volume: int = 3000

    def __post_init__(self) -> None:
        if self.n_queries < 1:
            raise ValueError("n_queries must be >= 1")
        if not 0.0 <= self.seasonal_fraction <= 1.0:
            raise ValueError("seasonal_fraction must be in [0, 1]")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.seasonal_fraction > 0 and not self.seasonal_tokens:
            raise ValueError("seasonal_fraction > 0 requires seasonal tokens")
        for token, month in self.seasonal_tokens.items():
            if not 1 <= month <= 12:
                raise ValueError(f"planted month for {token!r} out of range: {month}")
        if not 1 <= self.min_annual_volume <= self.max_annual_volume:
            raise ValueError("need 1 <= min_annual_volume <= max_annual_volume")

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthSpec":
        with Path(path).open("r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown synth spec keys: {sorted(unknown)}")
        if "seasonal_tokens" in raw:
            raw["seasonal_tokens"] = {str(k): int(v) for k, v in raw["seasonal_tokens"].items()}
        return cls(**raw)

    def with_seed(self, seed: int) -> "SynthSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class SynthQuery:
    """One planted query with its 12 monthly counts."""

    query: str
    monthly_counts: tuple[int, ...]
    peak_month: int | None  # None for non-seasonal queries

    @property
    def total(self) -> int:
        return sum(self.monthly_counts)


def _unique_query(rng: np.random.Generator, used: set[str], planted: str | None) -> str:
    for attempt in range(60):
        words = [
            _ADJECTIVES[rng.integers(len(_ADJECTIVES))],
            _NOUNS[rng.integers(len(_NOUNS))],
        ]
        if rng.random() < 0.4:
            words.append(_MODIFIERS[rng.integers(len(_MODIFIERS))])
        if planted is not None:
            pos = int(rng.integers(0, 2))
            words.insert(pos, planted)
        if attempt >= 40:  # dense corpora: disambiguate deterministically
            words.append(str(2 + attempt - 40))
        query = " ".join(words)
        if query not in used:
            used.add(query)
            return query
    raise RuntimeError("could not generate a unique query; corpus too dense")


def _seasonal_shares(rng: np.random.Generator, peak: int, noise: float) -> np.ndarray:
    """Monthly share profile peaked at `peak` with >= PEAK_WINDOW_MIN_SHARE mass
    in the wrap-around window [peak-1, peak+1]."""
    window = [(peak - 2) % 12, peak - 1, peak % 12]  # 0-based indices
    window_mass = rng.uniform(0.78, 0.92)
    peak_frac = rng.uniform(0.52, 0.70)
    shoulder_split = rng.uniform(0.3, 0.7)
    shares = np.zeros(12)
    shares[window[1]] = window_mass * peak_frac
    rest = window_mass * (1 - peak_frac)
    shares[window[0]] = rest * shoulder_split
    shares[window[2]] = rest * (1 - shoulder_split)
    off = [m for m in range(12) if m not in window]
    shares[off] = (1 - window_mass) * rng.dirichlet(np.full(len(off), 1.5))
    if noise > 0:
        shares = shares * np.exp(0.10 * noise * rng.standard_normal(12))
        shares /= shares.sum()
        mass = shares[window].sum()
        floor = PEAK_WINDOW_MIN_SHARE + 0.03
        if mass < floor:  # re-project so the window keeps its planted dominance
            shares[window] *= floor / mass
            shares[off] *= (1 - floor) / (1 - mass)
    return shares


def _uniform_shares(rng: np.random.Generator, noise: float) -> np.ndarray:
    if noise == 0:
        return np.full(12, 1.0 / 12.0)
    concentration = float(np.clip(8.0 / noise, 2.0, 500.0))
    return rng.dirichlet(np.full(12, concentration))


def _counts_from_shares(
    rng: np.random.Generator, total: int, shares: np.ndarray, window: list[int] | None
) -> np.ndarray:
    counts = rng.multinomial(total, shares)
    if window is not None:
        # multinomial sampling can erode the planted window; repair by moving
        # traffic from the largest off-window month into the peak
        need = math.ceil(PEAK_WINDOW_MIN_SHARE * total)
        off = [m for m in range(12) if m not in window]
        while counts[window].sum() < need:
            donor = off[int(np.argmax(counts[off]))]
            move = min(counts[donor], need - counts[window].sum())
            counts[donor] -= move
            counts[window[1]] += move
    return counts


def generate_queries(spec: SynthSpec) -> list[SynthQuery]:
    """The planted corpus behind a synthetic log, in generation order."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n_seasonal = int(round(spec.n_queries * spec.seasonal_fraction))
    planted_tokens = sorted(spec.seasonal_tokens.items())
    used: set[str] = set()
    out: list[SynthQuery] = []
    log_lo = math.log(spec.min_annual_volume)
    log_hi = math.log(spec.max_annual_volume)
    for i in range(spec.n_queries):
        seasonal = i < n_seasonal
        if seasonal:
            token, peak = planted_tokens[int(rng.integers(len(planted_tokens)))]
            query = _unique_query(rng, used, token)
            shares = _seasonal_shares(rng, peak, spec.noise)
            window = [(peak - 2) % 12, peak - 1, peak % 12]
        else:
            peak = None
            query = _unique_query(rng, used, None)
            shares = _uniform_shares(rng, spec.noise)
            window = None
        total = int(round(math.exp(rng.uniform(log_lo, log_hi))))
        counts = _counts_from_shares(rng, total, shares, window)
        out.append(
            SynthQuery(query=query, monthly_counts=tuple(int(c) for c in counts), peak_month=peak)
        )
    return out


def synth_logs(spec: SynthSpec) -> Iterator[str]:
    """Yield TSV event lines (`query<TAB>YYYY-MM<TAB>count`) for the spec."""
    yield f"# synthetic query log: n_queries={spec.n_queries} seed={spec.seed}\n"
    for sq in generate_queries(spec):
        for month, count in enumerate(sq.monthly_counts, start=1):
            if count > 0:
                yield f"{sq.query}\t{spec.year}-{month:02d}\t{count}\n"


def write_synth_logs(spec: SynthSpec, path: str | Path) -> int:
    """Write the synthetic log to a file; returns the number of event lines."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for line in synth_logs(spec):
            fh.write(line)
            if not line.startswith("#"):
                n += 1
    return n


def derive_engagement(
    table: MonthlyVolumeTable, seed: int = 0
) -> list[EngagementRecord]:
    """Synthesize plausible engagement (add-to-carts, clicks, impressions)
    for every query in a volume table.

    Engagement tracks annual volume with multiplicative spread so the derived
    offline score correlates with popularity without collapsing into it.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for query in sorted(table.queries()):
        total = table.query_total(query)
        impressions = total * rng.uniform(6.0, 14.0)
        clicks = impressions * rng.uniform(0.03, 0.25)
        add_to_carts = clicks * rng.uniform(0.05, 0.5)
        records.append(
            EngagementRecord(
                query=query,
                add_to_carts=float(add_to_carts),
                clicks=float(clicks),
                impressions=float(impressions),
            )
        )
    return records


def build_corpus_entries(
    table: MonthlyVolumeTable,
    seed: int = 0,
    weights: tuple[float, float, float] = DEFAULT_L1_WEIGHTS,
) -> list[IndexEntry]:
    """Index entries (query, frequency, offline score) for a volume table."""
    return [
        IndexEntry(
            query=rec.query,
            frequency=table.query_total(rec.query),
            l1_score=l1_score(rec, weights),
        )
        for rec in derive_engagement(table, seed)
    ]
