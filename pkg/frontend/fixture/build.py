#!/usr/bin/env python3
"""Build the fixture artifacts behind the UI integration test.

Uses only the backend's public surfaces: the events/corpus TSV formats and
the `sqac` CLI. Produces, under fixture/out/:

    events.tsv   hand-shaped logs (memorial-day queries peak in May)
    corpus.tsv   indexable corpus with crossover-ordered offline scores
    targets.tsv  training targets derived by `sqac ingest`
    model.sqac   model trained by `sqac train`
    index.sqix   index built by `sqac index`

Then start the service and run the integration suite:

    sqac serve --index fixture/out/index.sqix --model fixture/out/model.sqac \\
               --port 8080 --alpha 0.5 --month 5
    SQAC_SERVICE_URL=http://127.0.0.1:8080 npx vitest run tests/integration.test.ts
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

OUT = Path(__file__).parent / "out"

SEASONAL = ["memorial day flowers", "memorial day decorations", "memorial day"]
FLAT = [
    "memory foam mattress topper",
    "memory foam mattress",
    "memory foam pillow",
    "memory card",
    "memory foam futon",
]
# offline scores stage the crossover: flowers sits at control rank 4
L1 = {
    "memory foam mattress topper": 1.0,
    "memory foam mattress": 0.9,
    "memory foam pillow": 0.8,
    "memorial day flowers": 0.7,
    "memory card": 0.6,
    "memorial day decorations": 0.5,
    "memorial day": 0.45,
    "memory foam futon": 0.4,
}

COLORS = ["blue", "green", "red", "amber", "ivory", "teal", "plum", "slate"]
NOUNS = ["lamp", "chair", "table", "vase", "rug"]


def seasonal_counts() -> list[int]:
    counts = [2] * 12
    counts[3], counts[4], counts[5] = 60, 850, 60  # April, May, June
    return counts


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    events = OUT / "events.tsv"
    with events.open("w", encoding="utf-8") as fh:
        fh.write("# fixture logs: memorial-day queries peak in May\n")
        for query in SEASONAL:
            for month, count in enumerate(seasonal_counts(), start=1):
                fh.write(f"{query}\t2022-{month:02d}\t{count}\n")
        for query in FLAT:
            for month in range(1, 13):
                fh.write(f"{query}\t2022-{month:02d}\t82\n")
        for color in COLORS:
            for noun in NOUNS:
                for month in range(1, 13):
                    fh.write(f"{color} {noun}\t2022-{month:02d}\t50\n")

    corpus = OUT / "corpus.tsv"
    with corpus.open("w", encoding="utf-8") as fh:
        for query, score in L1.items():
            fh.write(f"{query}\t1000\t{score:.9f}\n")
        for color in COLORS:
            for noun in NOUNS:
                fh.write(f"{color} {noun}\t600\t0.200000000\n")

    def run(*args: str) -> None:
        print("+", " ".join(args))
        subprocess.run(args, check=True)

    run("sqac", "ingest", "--in", str(events), "--k", "1",
        "--out", str(OUT / "targets.tsv"))
    run("sqac", "train", "--targets", str(OUT / "targets.tsv"),
        "--dim", "16", "--hidden", "24,12", "--epochs", "30", "--seed", "11",
        "--out", str(OUT / "model.sqac"))
    run("sqac", "index", "--corpus", str(corpus), "--out", str(OUT / "index.sqix"))
    print(f"fixture artifacts ready under {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
