"""Standalone load generator for the service latency gate.

Paced open-loop pattern: N keep-alive connections, each issuing requests at
a fixed per-connection cadence (the debounced-keystroke rate a live typeahead
client produces). Latency is measured per request from first byte written to
full response read. Missed schedule ticks are dropped, not bursted, so a
client-side stall cannot masquerade as server queueing.

Also supports a saturated burst mode (all N connections fire simultaneously)
reported alongside the paced numbers for reference.

Usage:
    python latency_load.py PORT paced  NCONN QUERY_FILE RATE_HZ DURATION_S
    python latency_load.py PORT burst  NCONN QUERY_FILE ROUNDS
"""

from __future__ import annotations

import asyncio
import json
import random
import sys
import time

HOST = "127.0.0.1"


async def read_response(reader: asyncio.StreamReader) -> None:
    header = await reader.readuntil(b"\r\n\r\n")
    length = 0
    for line in header.split(b"\r\n"):
        if line.lower().startswith(b"content-length:"):
            length = int(line.split(b":")[1])
    if length:
        await reader.readexactly(length)


def make_requests(queries: list[str], n: int, seed: int = 99) -> list[bytes]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        q = rng.choice(queries)
        prefix = q[: rng.randint(1, min(10, len(q)))].replace(" ", "%20")
        out.append(
            (
                f"GET /complete?prefix={prefix}&month={rng.randint(1, 12)} "
                "HTTP/1.1\r\nHost: x\r\n\r\n"
            ).encode()
        )
    return out


async def paced_worker(
    port: int,
    reqs: list[bytes],
    rate_hz: float,
    duration_s: float,
    start_at: float,
    lats: list[float],
    errors: list[str],
) -> None:
    reader, writer = await asyncio.open_connection(HOST, port)
    try:
        for i in range(2):  # warm the connection and server code paths
            writer.write(reqs[i % len(reqs)])
            await writer.drain()
            await read_response(reader)
        period = 1.0 / rate_hz
        i, t_next, end = 0, start_at, start_at + duration_s
        while t_next < end:
            delay = t_next - time.perf_counter()
            if delay > 0:
                await asyncio.sleep(delay)
                t_next += period
            else:
                t_next = time.perf_counter() + period  # drop missed ticks
            t0 = time.perf_counter()
            writer.write(reqs[i % len(reqs)])
            await writer.drain()
            await read_response(reader)
            lats.append(time.perf_counter() - t0)
            i += 1
    except Exception as exc:
        errors.append(repr(exc))
    finally:
        writer.close()


async def burst_rounds(
    port: int, reqs: list[bytes], nconn: int, rounds: int, lats: list[float]
) -> None:
    conns = [await asyncio.open_connection(HOST, port) for _ in range(nconn)]
    for r, w in conns:
        w.write(reqs[0])
        await w.drain()
        await read_response(r)

    async def one(r, w, req, out):
        t0 = time.perf_counter()
        w.write(req)
        await w.drain()
        await read_response(r)
        out.append(time.perf_counter() - t0)

    for j in range(rounds):
        out: list[float] = []
        await asyncio.gather(
            *(
                one(r, w, reqs[(j * nconn + i) % len(reqs)], out)
                for i, (r, w) in enumerate(conns)
            )
        )
        lats.extend(out)
        await asyncio.sleep(0.01)
    for r, w in conns:
        w.close()


def percentile(sorted_vals: list[float], p: float) -> float:
    return sorted_vals[min(len(sorted_vals) - 1, int(len(sorted_vals) * p))]


async def run(argv: list[str]) -> dict:
    port, mode, nconn = int(argv[0]), argv[1], int(argv[2])
    with open(argv[3], encoding="utf-8") as fh:
        queries = [line.split("\t")[0] for line in fh if line.strip()]
    reqs = make_requests(queries, 2000)
    lats: list[float] = []
    errors: list[str] = []
    if mode == "paced":
        rate, duration = float(argv[4]), float(argv[5])
        start = time.perf_counter() + 0.5
        await asyncio.gather(
            *(
                paced_worker(
                    port,
                    reqs[i::nconn] or reqs,
                    rate,
                    duration,
                    start + (i / nconn) / rate,
                    lats,
                    errors,
                )
                for i in range(nconn)
            )
        )
    elif mode == "burst":
        await burst_rounds(port, reqs, nconn, int(argv[4]), lats)
    else:
        raise SystemExit(f"unknown mode {mode!r}")
    lats.sort()
    return {
        "mode": mode,
        "n": len(lats),
        "errors": errors[:3],
        "p50_ms": percentile(lats, 0.50) * 1e3 if lats else None,
        "p90_ms": percentile(lats, 0.90) * 1e3 if lats else None,
        "p99_ms": percentile(lats, 0.99) * 1e3 if lats else None,
        "max_ms": lats[-1] * 1e3 if lats else None,
    }


if __name__ == "__main__":
    print(json.dumps(asyncio.run(run(sys.argv[1:]))))
