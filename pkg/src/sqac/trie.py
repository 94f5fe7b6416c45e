"""Character-level prefix tree over the indexed query corpus.

Retrieval contract: for any prefix, the completable set is exactly the
inserted queries having that prefix, ranked by the chosen score descending
with ties broken by ascending query text. Heavy nodes carry precomputed
top-candidate lists so short prefixes stay cheap on large corpora; the
correctness reference is always the plain subtree walk.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from sqac import container
from sqac.errors import ContainerError

INDEX_MAGIC = b"SQIX"
INDEX_VERSION = 1

Order = str  # "mpc" | "l1"


@dataclass(frozen=True)
class IndexEntry:
    """An indexed query with its aggregate frequency and offline L1 score."""

    query: str
    frequency: int
    l1_score: float

    def __post_init__(self) -> None:
        if not self.query:
            raise ValueError("indexed query must be non-empty")
        if self.frequency < 0:
            raise ValueError("frequency must be non-negative")


class _Node:
    __slots__ = ("children", "entry_idx", "top_mpc", "top_l1")

    def __init__(self) -> None:
        self.children: dict[str, _Node] = {}
        self.entry_idx: int = -1
        self.top_mpc: list[int] | None = None
        self.top_l1: list[int] | None = None


class CompletionIndex:
    """Immutable prefix index; safe for concurrent reads after construction."""

    def __init__(
        self,
        entries: Sequence[IndexEntry],
        cache_top: int = 64,
        cache_min_subtree: int = 96,
    ) -> None:
        if not entries:
            raise ValueError("cannot build an index from zero entries")
        self.entries: list[IndexEntry] = list(entries)
        self.cache_top = cache_top
        self._by_query: dict[str, int] = {}
        for i, entry in enumerate(self.entries):
            if entry.query in self._by_query:
                raise ValueError(f"duplicate query in index: {entry.query!r}")
            self._by_query[entry.query] = i
        self.total_frequency = sum(e.frequency for e in self.entries)
        self._root = _Node()
        for i, entry in enumerate(self.entries):
            node = self._root
            for ch in entry.query:
                nxt = node.children.get(ch)
                if nxt is None:
                    nxt = _Node()
                    node.children[ch] = nxt
                node = nxt
            node.entry_idx = i
        self._build_caches(cache_min_subtree)

    # -- construction helpers -------------------------------------------------

    def _build_caches(self, cache_min_subtree: int) -> None:
        """Precompute sorted top-candidate lists at nodes with big subtrees."""
        entries = self.entries
        # iterative post-order: collect subtree entry lists, cache and release
        stack: list[tuple[_Node, bool]] = [(self._root, False)]
        collected: dict[int, list[int]] = {}  # id(node) -> subtree entry idxs
        while stack:
            node, seen = stack.pop()
            if not seen:
                stack.append((node, True))
                for child in node.children.values():
                    stack.append((child, False))
                continue
            idxs: list[int] = [] if node.entry_idx < 0 else [node.entry_idx]
            for child in node.children.values():
                idxs.extend(collected.pop(id(child)))
            if len(idxs) >= cache_min_subtree or node is self._root:
                top = self.cache_top
                node.top_mpc = sorted(
                    idxs, key=lambda i: (-entries[i].frequency, entries[i].query)
                )[:top]
                node.top_l1 = sorted(
                    idxs, key=lambda i: (-entries[i].l1_score, entries[i].query)
                )[:top]
            collected[id(node)] = idxs

    def _walk(self, prefix: str) -> _Node | None:
        node = self._root
        for ch in prefix:
            node = node.children.get(ch)
            if node is None:
                return None
        return node

    def _subtree_indices(self, node: _Node) -> Iterator[int]:
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur.entry_idx >= 0:
                yield cur.entry_idx
            stack.extend(cur.children.values())

    # -- queries ---------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, query: str) -> bool:
        return query in self._by_query

    def entry(self, query: str) -> IndexEntry:
        idx = self._by_query.get(query)
        if idx is None:
            raise KeyError(f"query not indexed: {query!r}")
        return self.entries[idx]

    def mpc_weight(self, query: str) -> float:
        """Popularity weight: the query's frequency share of the whole corpus."""
        entry = self.entry(query)
        if self.total_frequency <= 0:
            raise ValueError("total corpus frequency is zero")
        return entry.frequency / self.total_frequency

    def complete_indices(
        self, prefix: str, n: int | None = 10, order: Order = "mpc"
    ) -> list[int]:
        """Positions (into `entries`) of the top-n completions of `prefix`."""
        if order not in ("mpc", "l1"):
            raise ValueError(f"unknown order {order!r}")
        if n is not None and n < 1:
            raise ValueError("n must be >= 1 (or None for all matches)")
        node = self._walk(prefix)
        if node is None:
            return []
        cached = node.top_mpc if order == "mpc" else node.top_l1
        if cached is not None and n is not None and n <= len(cached):
            return cached[:n]
        entries = self.entries
        idxs = list(self._subtree_indices(node))
        if order == "mpc":
            idxs.sort(key=lambda i: (-entries[i].frequency, entries[i].query))
        else:
            idxs.sort(key=lambda i: (-entries[i].l1_score, entries[i].query))
        return idxs if n is None else idxs[:n]

    def complete(
        self, prefix: str, n: int | None = 10, order: Order = "mpc"
    ) -> list[tuple[IndexEntry, float]]:
        """Top-n completions of `prefix` under the chosen ranking order.

        Returns (entry, score) pairs: score is the MPC weight for "mpc" and
        the stored L1 score for "l1". No match yields an empty list; an empty
        prefix ranks the whole corpus. n=None returns every match.
        """
        ranked = self.complete_indices(prefix, n, order)
        entries = self.entries
        if order == "mpc":
            total = self.total_frequency
            return [(entries[i], entries[i].frequency / total) for i in ranked]
        return [(entries[i], entries[i].l1_score) for i in ranked]

    # -- persistence -----------------------------------------------------------

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for e in self.entries:
            h.update(f"{e.query}\t{e.frequency}\t{e.l1_score!r}\n".encode())
        return h.hexdigest()

    def save(self, path: str | Path) -> None:
        meta = {
            "kind": "completion-index",
            "queries": [e.query for e in self.entries],
            "frequencies": [e.frequency for e in self.entries],
            "l1_scores": [e.l1_score for e in self.entries],
        }
        container.write_container(path, INDEX_MAGIC, INDEX_VERSION, meta, {})

    @classmethod
    def load(cls, path: str | Path, cache_top: int = 64) -> "CompletionIndex":
        _, meta, _ = container.read_container(path, INDEX_MAGIC, INDEX_VERSION)
        try:
            entries = [
                IndexEntry(query=q, frequency=int(f), l1_score=float(s))
                for q, f, s in zip(
                    meta["queries"], meta["frequencies"], meta["l1_scores"], strict=True
                )
            ]
        except (KeyError, ValueError) as exc:
            raise ContainerError(f"index metadata malformed: {exc}") from exc
        return cls(entries, cache_top=cache_top)


def read_corpus(path: str | Path) -> list[IndexEntry]:
    """Read a corpus TSV: `query<TAB>frequency<TAB>l1_score` per line."""
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"corpus line {line_no}: expected 3 fields")
            out.append(
                IndexEntry(query=parts[0], frequency=int(parts[1]), l1_score=float(parts[2]))
            )
    return out


def write_corpus(path: str | Path, entries: Sequence[IndexEntry]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(f"{e.query}\t{e.frequency}\t{e.l1_score:.9f}\n")
