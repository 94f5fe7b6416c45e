"""Unified command-line interface.

Subcommands: synth, ingest, train, predict, index, rerank, eval, serve.
A `--config` file of `key = value` lines supplies defaults for any long
option (CLI flags win); `--seed` is honored by every randomized step.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from sqac import __version__
from sqac.embeddings import load_embeddings
from sqac.errors import SqacError
from sqac.evaluation import ab_compare, read_cases, run_eval
from sqac.logs import (
    DEFAULT_K_THRESHOLD,
    ingest_events,
    merge_years,
    read_targets,
    seasonality_targets,
    write_targets,
)
from sqac.model_io import load_model, save_model
from sqac.ranker import L2Config, l2_rerank
from sqac.service import ServiceConfig, Snapshot, SuggestService, run_server
from sqac.synth import SynthSpec, build_corpus_entries, write_synth_logs
from sqac.training import TrainConfig, train
from sqac.trie import CompletionIndex, read_corpus, write_corpus


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"config {path} line {line_no}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_defaults(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    file_values = _read_config_file(args.config)
    defaults = {
        a.dest: a.default for a in parser._actions if a.dest != argparse.SUPPRESS
    }
    for key, raw in file_values.items():
        if key not in vars(args):
            continue
        if getattr(args, key) != defaults.get(key):
            continue  # explicit CLI flag wins
        current_default = defaults.get(key)
        if isinstance(current_default, bool):
            value: object = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(current_default, int):
            value = int(raw)
        elif isinstance(current_default, float):
            value = float(raw)
        else:
            value = raw
        setattr(args, key, value)


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec.from_json(args.spec) if args.spec else SynthSpec()
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    n = write_synth_logs(spec, args.out)
    print(f"wrote {n} events for {spec.n_queries} queries to {args.out}")
    if args.corpus_out:
        table, _ = ingest_events(args.out)
        entries = build_corpus_entries(table, seed=spec.seed)
        write_corpus(args.corpus_out, entries)
        print(f"wrote corpus of {len(entries)} entries to {args.corpus_out}")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    tables = []
    for path in args.inputs:
        table, stats = ingest_events(path)
        print(
            f"{path}: {stats.event_lines} events, {stats.malformed_lines} malformed"
            + (f" (first: line {stats.malformed_samples[0][0]}: {stats.malformed_samples[0][1]})"
               if stats.malformed_samples else "")
        )
        tables.append(table)
    table = tables[0] if len(tables) == 1 else merge_years(tables)
    targets = seasonality_targets(table, k_threshold=args.k)
    write_targets(args.out, targets)
    print(f"wrote {len(targets)} targets ({len(targets) // 12} queries) to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    targets = read_targets(args.targets)
    embeddings = None
    if args.embeddings:
        embeddings = load_embeddings(args.embeddings, args.dim)
    config = TrainConfig(
        seed=args.seed if args.seed is not None else 7,
        embedding_dim=args.dim,
        hidden=tuple(int(h) for h in args.hidden.split(",")),
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        learning_rate=args.lr,
    )
    result = train(targets, embeddings, config)
    save_model(result.model, args.out)
    last = result.history[-1]
    print(
        f"trained {last.epoch} epochs; best val mse {result.best_val_mse:.6f} "
        f"(epoch {result.best_epoch}); baseline {result.baseline_val_mse:.6f}; "
        f"saved to {args.out}"
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if args.month is not None:
        print(f"{model.predict(args.query, args.month):.6f}")
    else:
        for month, score in enumerate(model.predict_months(args.query), start=1):
            print(f"{month}\t{score:.6f}")
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    entries = read_corpus(args.corpus)
    index = CompletionIndex(entries)
    index.save(args.out)
    print(f"indexed {len(entries)} queries to {args.out}")
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    index = CompletionIndex.load(args.index)
    model = load_model(args.model)
    config = L2Config(alpha=args.alpha, n_candidates=args.n, k_display=args.k)
    candidates = [e for e, _ in index.complete(args.prefix, config.n_candidates, "l1")]
    for r in l2_rerank(candidates, args.month, model, config):
        print(f"{r.rank}\t{r.query}\t{r.final_score:.6f}\t{r.l1_score:.6f}\t{r.seasonality:.6f}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cases = read_cases(args.cases)
    index = CompletionIndex.load(args.index)
    model = load_model(args.model)
    fp = model.fingerprint()
    test_cfg = L2Config(alpha=args.alpha, n_candidates=args.n, k_display=args.k)
    test = run_eval(cases, index, model, test_cfg, model_fingerprint=fp)
    out = test.to_dict()
    if args.baseline_alpha is not None:
        control_cfg = L2Config(
            alpha=args.baseline_alpha, n_candidates=args.n, k_display=args.k
        )
        control = run_eval(cases, index, model, control_cfg, model_fingerprint=fp)
        out = {"test": out, "control": control.to_dict(), "lift": ab_compare(control, test).to_dict()}
    print(json.dumps(out, indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = ServiceConfig(
        index_path=args.index,
        model_path=args.model,
        host=args.host,
        port=args.port,
        defaults=L2Config(alpha=args.alpha, n_candidates=args.n, k_display=args.k),
        month_override=args.month,
        workers=args.workers,
    )
    service = SuggestService(config)
    try:
        service.reload()
    except SqacError as exc:
        print(f"failed to load artifacts: {exc}", file=sys.stderr)
        return 1
    snap = service.snapshot
    print(
        f"serving on http://{config.host}:{config.port} "
        f"({len(snap.index)} queries, {config.workers} worker(s))",
        flush=True,
    )
    reuse_port = config.workers > 1
    children: list[int] = []
    for _ in range(config.workers - 1):
        pid = os.fork()
        if pid == 0:
            run_server(service, config.host, config.port, reuse_port)
            os._exit(0)
        children.append(pid)
    try:
        run_server(service, config.host, config.port, reuse_port)
    finally:
        for pid in children:
            try:
                os.kill(pid, 15)
                os.waitpid(pid, 0)
            except OSError:
                pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqac", description="seasonality-aware query autocomplete toolkit"
    )
    parser.add_argument("--version", action="version", version=f"sqac {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value file supplying option defaults")
        p.add_argument("--seed", type=int, default=None, help="override random seed")

    p = sub.add_parser("synth", help="generate a synthetic query log")
    common(p)
    p.add_argument("--spec", help="JSON file of synthesis parameters")
    p.add_argument("--out", required=True, help="output events TSV")
    p.add_argument("--corpus-out", help="also derive an indexable corpus TSV")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="aggregate event logs into training targets")
    common(p)
    p.add_argument("--in", dest="inputs", nargs="+", required=True, help="event TSV file(s)")
    p.add_argument("--k", type=int, default=DEFAULT_K_THRESHOLD, help="min annual volume")
    p.add_argument("--out", required=True, help="output targets TSV")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the seasonality model")
    common(p)
    p.add_argument("--targets", required=True)
    p.add_argument("--embeddings", help="pre-trained word-vector text file")
    p.add_argument("--dim", type=int, default=300, help="embedding dimension")
    p.add_argument("--hidden", default="128,64", help="comma-separated hidden widths")
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a query for one or all months")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--month", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("index", help="build the completion index")
    common(p)
    p.add_argument("--corpus", required=True, help="corpus TSV query/frequency/l1")
    p.add_argument("--out", required=True, help="output index file")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("rerank", help="retrieve and rerank completions for a prefix")
    common(p)
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--prefix", required=True)
    p.add_argument("--month", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="replay cases and report MRR (and lift)")
    common(p)
    p.add_argument("--cases", required=True, help="cases TSV query/month")
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--baseline-alpha", type=float, default=None,
                   help="also run a control at this alpha and report lift")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP suggestion service")
    common(p)
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--month", type=int, default=None, help="override wall-clock month")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_defaults(args, parser)
    try:
        return args.func(args)
    except SqacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
