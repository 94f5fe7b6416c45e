"""HTTP suggestion service over immutable artifact snapshots.

Seasonality scores for the indexed corpus are precomputed at snapshot build
time (they are a pure function of the frozen model and index), so a request
costs a trie walk, a 50-candidate blend, and JSON assembly. Snapshots are
immutable; hot reload builds a fresh snapshot and swaps one reference, so
concurrent readers only ever observe a fully-old or fully-new state.

Two transports share the same routing core: an ASGI callable (handy for
in-process tests or any ASGI server) and a native asyncio HTTP/1.1 protocol
used by `sqac serve`, which avoids general-purpose framework overhead on the
latency-critical path.
"""

from __future__ import annotations

import asyncio
import json
import signal
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from urllib.parse import parse_qsl, unquote

import numpy as np

from sqac import __version__
from sqac.net import MONTH_DIMS, SeasonModel, forward
from sqac.ranker import L2Config
from sqac.trie import CompletionIndex


class SeasonalityTable:
    """Precomputed per-(indexed query, month) seasonality scores."""

    def __init__(self, queries: Sequence[str], scores: np.ndarray) -> None:
        if scores.shape != (len(queries), MONTH_DIMS):
            raise ValueError(f"scores must be ({len(queries)}, 12), got {scores.shape}")
        self._rows = {q: i for i, q in enumerate(queries)}
        self.scores = scores

    @classmethod
    def from_model(
        cls,
        model: SeasonModel,
        queries: Sequence[str],
        chunk: int = 16384,
    ) -> "SeasonalityTable":
        """Batch-predict all 12 months for every query.

        The first dense layer is factored into its query-vector and month
        one-hot column blocks, so the query half is computed once instead of
        twelve times.
        """
        n = len(queries)
        d = model.embedding_dim
        first = model.layers[0]
        w_query, w_month = first.weights[:d], first.weights[d:]
        scores = np.empty((n, MONTH_DIMS))
        for start in range(0, n, chunk):
            part = queries[start : start + chunk]
            qvec = np.stack(
                [model.embedding[model.token_indices(q)].mean(axis=0) for q in part]
            )
            base = qvec @ w_query + first.bias
            for m in range(MONTH_DIMS):
                h = base + w_month[m]
                if first.activation == "relu":
                    h = np.maximum(h, 0.0)
                for layer in model.layers[1:]:
                    z = h @ layer.weights + layer.bias
                    h = np.maximum(z, 0.0) if layer.activation == "relu" else z
                scores[start : start + len(part), m] = h[:, 0]
        np.clip(scores, 0.0, 1.0, out=scores)
        return cls(list(queries), scores)

    def __contains__(self, query: str) -> bool:
        return query in self._rows

    def predict(self, query: str, month: int) -> float:
        return float(self.scores[self._rows[query], month - 1])


@dataclass(frozen=True)
class ServiceConfig:
    index_path: str
    model_path: str
    host: str = "127.0.0.1"
    port: int = 8080
    defaults: L2Config = L2Config()
    month_override: int | None = None
    cors_origin: str = "*"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.month_override is not None and not 1 <= self.month_override <= 12:
            raise ValueError("month_override must be in 1..12")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


class Snapshot:
    """One immutable, fully-loaded serving state."""

    def __init__(
        self,
        index: CompletionIndex,
        model: SeasonModel,
        defaults: L2Config,
        month_override: int | None = None,
    ) -> None:
        self.index = index
        self.model = model
        self.defaults = defaults
        self.month_override = month_override
        self.table = SeasonalityTable.from_model(model, [e.query for e in index.entries])
        self.index_fingerprint = index.fingerprint()
        self.model_fingerprint = model.fingerprint()
        # per-entry arrays for the request hot path, aligned with index.entries
        self._queries = [e.query for e in index.entries]
        self._l1 = np.array([e.l1_score for e in index.entries])
        order = sorted(range(len(self._queries)), key=lambda i: self._queries[i])
        self._lexrank = np.empty(len(order), dtype=np.int64)
        self._lexrank[order] = np.arange(len(order))

    @classmethod
    def load(cls, config: ServiceConfig) -> "Snapshot":
        from sqac.model_io import load_model

        index = CompletionIndex.load(Path(config.index_path))
        model = load_model(Path(config.model_path))
        return cls(index, model, config.defaults, config.month_override)

    def suggest(self, prefix: str, month: int, k: int, alpha: float) -> list[dict]:
        """Retrieve + blend + truncate, vectorized over the candidate set.

        Computes the same floats, in the same operation order, as
        l2_rerank(complete(prefix, N, "l1"), ...) so responses are
        interchangeable with the reference pipeline bit for bit.
        """
        idx = self.index.complete_indices(prefix, self.defaults.n_candidates, "l1")
        if not idx:
            return []
        sel = np.asarray(idx, dtype=np.int64)
        l1 = self._l1[sel]
        lo, hi = l1.min(), l1.max()
        l1n = np.full_like(l1, 0.5) if hi == lo else (l1 - lo) / (hi - lo)
        season = self.table.scores[sel, month - 1]
        final = (1.0 - alpha) * l1n + alpha * season
        # ties break by ascending query text; alpha=0 must reproduce the raw
        # L1 order even when min-max rounding collapses near-equal scores
        primary = l1 if alpha == 0.0 else final
        top = np.lexsort((self._lexrank[sel], -primary))[:k]
        return [
            {
                "query": self._queries[sel[i]],
                "rank": rank,
                "final_score": float(final[i]),
                "l1_score": float(l1[i]),
                "seasonality": float(season[i]),
            }
            for rank, i in enumerate(top, start=1)
        ]


def _bad(message: str) -> tuple[int, dict]:
    return 400, {"error": message}


class SuggestService:
    """Routing core shared by the ASGI callable and the native server."""

    def __init__(self, config: ServiceConfig | None = None, snapshot: Snapshot | None = None):
        self.config = config
        self._snapshot = snapshot
        self.started_at = time.time()

    @property
    def snapshot(self) -> Snapshot | None:
        return self._snapshot

    def reload(self) -> None:
        """Build a fresh snapshot from the configured paths, then swap it in
        atomically (a single reference assignment)."""
        if self.config is None:
            raise RuntimeError("service has no config to reload from")
        self._snapshot = Snapshot.load(self.config)

    # -- request handling -----------------------------------------------------

    def handle(self, path: str, params: dict[str, str]) -> tuple[int, dict]:
        if path == "/healthz":
            return self._healthz()
        snap = self._snapshot
        if snap is None:
            return 503, {"error": "artifacts not loaded"}
        if path == "/complete":
            return self._complete(snap, params)
        if path == "/seasonality":
            return self._seasonality(snap, params)
        return 404, {"error": f"no route for {path}"}

    def _healthz(self) -> tuple[int, dict]:
        snap = self._snapshot
        if snap is None:
            return 503, {"status": "loading", "version": __version__}
        return 200, {
            "status": "ok",
            "version": __version__,
            "model_fingerprint": snap.model_fingerprint,
            "index_fingerprint": snap.index_fingerprint,
            "indexed_queries": len(snap.index),
            "started_at": self.started_at,
        }

    def _complete(self, snap: Snapshot, params: dict[str, str]) -> tuple[int, dict]:
        t0 = time.perf_counter_ns()
        prefix = params.get("prefix", "")
        try:
            month = int(params["month"]) if "month" in params else self._default_month(snap)
        except ValueError:
            return _bad(f"month must be an integer, got {params['month']!r}")
        if not 1 <= month <= 12:
            return _bad(f"month must be in 1..12, got {month}")
        defaults = snap.defaults
        try:
            k = int(params.get("k", defaults.k_display))
            alpha = float(params.get("alpha", defaults.alpha))
        except ValueError:
            return _bad("k must be an integer and alpha a number")
        if not 1 <= k <= defaults.n_candidates:
            return _bad(f"k must be in 1..{defaults.n_candidates}, got {k}")
        if not 0.0 <= alpha <= 1.0:
            return _bad(f"alpha must be in [0, 1], got {alpha}")
        body = {
            "prefix": prefix,
            "month": month,
            "suggestions": snap.suggest(prefix, month, k, alpha),
            "latency_micros": (time.perf_counter_ns() - t0) // 1000,
        }
        return 200, body

    def _seasonality(self, snap: Snapshot, params: dict[str, str]) -> tuple[int, dict]:
        query = params.get("q", "")
        if not query:
            return _bad("q must be non-empty")
        return 200, {"query": query, "scores": snap.model.predict_months(query)}

    def _default_month(self, snap: Snapshot) -> int:
        if snap.month_override is not None:
            return snap.month_override
        return time.localtime().tm_mon

    # -- ASGI -------------------------------------------------------------------

    async def __call__(self, scope, receive, send) -> None:
        if scope["type"] != "http":
            raise RuntimeError("only the http scope is supported")
        params = dict(parse_qsl(scope.get("query_string", b"").decode("latin-1")))
        if scope.get("method", "GET") != "GET":
            status, body = 405, {"error": "GET only"}
        else:
            status, body = self.handle(scope["path"], params)
        payload = json.dumps(body, separators=(",", ":")).encode()
        origin = self.config.cors_origin if self.config else "*"
        await send(
            {
                "type": "http.response.start",
                "status": status,
                "headers": [
                    (b"content-type", b"application/json"),
                    (b"content-length", str(len(payload)).encode()),
                    (b"access-control-allow-origin", origin.encode()),
                ],
            }
        )
        await send({"type": "http.response.body", "body": payload})


_STATUS_LINES = {
    200: b"HTTP/1.1 200 OK\r\n",
    400: b"HTTP/1.1 400 Bad Request\r\n",
    404: b"HTTP/1.1 404 Not Found\r\n",
    405: b"HTTP/1.1 405 Method Not Allowed\r\n",
    500: b"HTTP/1.1 500 Internal Server Error\r\n",
    503: b"HTTP/1.1 503 Service Unavailable\r\n",
}

_MAX_REQUEST_BYTES = 65536


class _HttpProtocol(asyncio.Protocol):
    """Minimal HTTP/1.1 protocol for GET-only JSON routes with keep-alive."""

    def __init__(self, service: SuggestService) -> None:
        self.service = service
        self.buffer = b""
        self.transport: asyncio.Transport | None = None
        header = "access-control-allow-origin: %s\r\n" % (
            service.config.cors_origin if service.config else "*"
        )
        self._common = ("content-type: application/json\r\n" + header).encode()

    def connection_made(self, transport: asyncio.BaseTransport) -> None:
        self.transport = transport  # type: ignore[assignment]

    def data_received(self, data: bytes) -> None:
        self.buffer += data
        if len(self.buffer) > _MAX_REQUEST_BYTES:
            self._respond(400, {"error": "request too large"}, close=True)
            return
        while True:
            end = self.buffer.find(b"\r\n\r\n")
            if end < 0:
                return
            head, self.buffer = self.buffer[:end], self.buffer[end + 4 :]
            self._dispatch(head)
            if self.transport is None or self.transport.is_closing():
                return

    def _dispatch(self, head: bytes) -> None:
        try:
            request_line = head.split(b"\r\n", 1)[0].decode("latin-1")
            method, target, _ = request_line.split(" ", 2)
        except ValueError:
            self._respond(400, {"error": "malformed request line"}, close=True)
            return
        if method != "GET":
            self._respond(405, {"error": "GET only"})
            return
        path, _, qs = target.partition("?")
        params = dict(parse_qsl(qs))
        try:
            status, body = self.service.handle(unquote(path), params)
        except Exception as exc:  # never tear the connection down on a bug
            status, body = 500, {"error": f"internal error: {exc}"}
        close = b"connection: close" in head.lower()
        self._respond(status, body, close=close)

    def _respond(self, status: int, body: dict, close: bool = False) -> None:
        if self.transport is None:
            return
        payload = json.dumps(body, separators=(",", ":")).encode()
        self.transport.write(
            _STATUS_LINES.get(status, _STATUS_LINES[500])
            + self._common
            + b"content-length: %d\r\n\r\n" % len(payload)
            + payload
        )
        if close:
            self.transport.close()


async def _serve_async(service: SuggestService, host: str, port: int, reuse_port: bool) -> None:
    loop = asyncio.get_running_loop()
    stop = asyncio.Event()
    loop.add_signal_handler(signal.SIGTERM, stop.set)
    loop.add_signal_handler(signal.SIGINT, stop.set)
    try:
        loop.add_signal_handler(signal.SIGHUP, service.reload)
    except (NotImplementedError, RuntimeError):
        pass
    server = await loop.create_server(
        lambda: _HttpProtocol(service), host, port, reuse_port=reuse_port, backlog=512
    )
    async with server:
        await stop.wait()


def run_server(service: SuggestService, host: str, port: int, reuse_port: bool = False) -> None:
    """Run the native server until SIGTERM/SIGINT; SIGHUP hot-swaps artifacts."""
    asyncio.run(_serve_async(service, host, port, reuse_port))
