"""Command-line entry point: ``glosa-sum summarize | inspect-topology | evaluate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import pipeline
from .config import dump_config, resolve
from .corpus import load_document, write_summary
from .errors import ConfigError, GlosaError, InputError, ProviderError, UnmatchedId
from .evaluation import VARIANTS, evaluate_corpus

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_PROVIDER = 0, 1, 2, 3

def _diag(level: str, kind: str, message: str, **extra) -> None:
    print(json.dumps({"level": level, "kind": kind, "message": message, **extra}), file=sys.stderr)


class _JsonLineHandler(logging.Handler):
    def emit(self, record):
        _diag(record.levelname.lower(), record.name, record.getMessage())


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, ProviderError):
        return EXIT_PROVIDER
    if isinstance(exc, InputError):
        return EXIT_INPUT
    return EXIT_INPUT


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="plain-text or JSONL document file")
    p.add_argument("--format", choices=("plain_text", "jsonl"), help="input format (default: from suffix)")
    p.add_argument("--config", help="flat TOML config file")
    g = p.add_argument_group("graph and topology")
    g.add_argument("--alpha", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--k-min", dest="k_min", type=int)
    g.add_argument("--k-max", dest="k_max", type=int)
    g.add_argument("--landmark-proportion", dest="landmark_proportion", type=float)
    g.add_argument("--nu", type=int)
    g.add_argument("--max-value", dest="max_value", type=float)
    g.add_argument("--k-pool", dest="k_pool", type=int)
    g.add_argument("--m-pool", dest="m_pool", type=int)
    g.add_argument("--no-pool", action="store_true", help="ablation: empty protected pool")
    g.add_argument("--h0-only", action="store_true", help="ablation: no H1 cycles in the pool")
    g.add_argument("--seed", type=int)
    e = p.add_argument_group("embeddings")
    e.add_argument("--embeddings", dest="cache_path", help="embedding cache JSONL (or directory of <id>.jsonl)")
    e.add_argument("--query-embeddings", dest="query_cache_path")
    e.add_argument("--endpoint", dest="endpoint_url", help="HTTP embedding endpoint")
    e.add_argument("--mock-embeddings", action="store_true", help="deterministic hash embedder")
    e.add_argument("--model-id", dest="model_id")
    e.add_argument("--batch-size", dest="batch_size", type=int)
    e.add_argument("--max-retries", dest="max_retries", type=int)
    e.add_argument("--timeout", type=float)
    e.add_argument("--mock-dim", dest="mock_dim", type=int)
    e.add_argument("--token-env", dest="token_env")


def _flags(args: argparse.Namespace) -> dict:
    skip = {"input", "format", "config", "command", "out", "out_format", "log", "out_dir",
            "no_pool", "h0_only", "no_hierarchy", "mock_embeddings", "save_config", "func", "verbose"}
    flags = {k: v for k, v in vars(args).items() if k not in skip and v is not None and v is not False}
    if args.mock_embeddings:
        flags["embedding_mode"] = "mock"
    elif flags.get("endpoint_url"):
        flags["embedding_mode"] = "http"
    elif flags.get("cache_path"):
        flags["embedding_mode"] = "cache"
    if args.no_pool:
        flags["k_pool"] = flags["m_pool"] = 0
    if args.h0_only:
        flags["m_pool"] = 0
    if getattr(args, "no_hierarchy", False):
        flags["hierarchy"] = False
    if getattr(args, "ratio", None) is not None:
        flags["target_ratio"] = flags.pop("ratio")
    if getattr(args, "lambda_", None) is not None:
        flags["lambda_weight"] = flags.pop("lambda_")
    if getattr(args, "beta", None) is not None:
        flags["beta_weight"] = flags.pop("beta")
    if getattr(args, "mode", None) is not None:
        flags["scoring_mode"] = flags.pop("mode")
    return flags


def _load_inputs(args):
    fmt = args.format or ("jsonl" if args.input.endswith(".jsonl") else "plain_text")
    return load_document(args.input, fmt)


def cmd_summarize(args) -> int:
    cfg = resolve(args.config, _flags(args))
    docs = _load_inputs(args)
    if args.save_config:
        dump_config(cfg, args.save_config)

    with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
        summaries = list(ex.map(lambda d: pipeline.summarize(d, cfg), docs))

    out_fmt = args.out_format
    many = len(summaries) > 1
    for summary in summaries:
        if args.out is None:
            sys.stdout.write(json.dumps(summary.to_dict(), indent=2, ensure_ascii=False) + "\n")
        else:
            suffix = ".json" if out_fmt == "json" else ".txt"
            target = Path(args.out) / f"{summary.document_id}{suffix}" if many else Path(args.out)
            target.parent.mkdir(parents=True, exist_ok=True)
            write_summary(summary, target, out_fmt)
        if args.log:
            log_path = Path(args.log) / f"{summary.document_id}.deletions.jsonl" if many else Path(args.log)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            log_path.write_text(pipeline.deletion_log_jsonl(summary), encoding="utf-8")
    return EXIT_OK


def cmd_inspect_topology(args) -> int:
    cfg = resolve(args.config, _flags(args))
    docs = _load_inputs(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        _, report = pipeline.inspect_topology(doc, cfg)
        prefix = f"{doc.id}." if len(docs) > 1 else ""
        parts = {
            "barcodes": report["barcodes"],
            "pool": report["pool"],
            "positions": report["positions"],
            "graph": report["graph"],
        }
        for name, payload in parts.items():
            (out_dir / f"{prefix}{name}.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _read_pairs_file(path) -> dict[str, str]:
    docs = load_document(path, "jsonl")
    return {d.id: d.text for d in docs}


def cmd_evaluate(args) -> int:
    cands = _read_pairs_file(args.candidates)
    refs = _read_pairs_file(args.references)
    if set(cands) - set(refs):
        raise UnmatchedId(set(cands) - set(refs), "candidates")
    if set(refs) - set(cands):
        raise UnmatchedId(set(refs) - set(cands), "references")
    ids = sorted(cands)
    variants = tuple(args.variant) if args.variant else VARIANTS
    report = evaluate_corpus([(cands[i], refs[i]) for i in ids], variants, ids=ids)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glosa-sum", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("summarize", help="compress documents")
    _add_pipeline_flags(s)
    s.add_argument("--ratio", type=float, help="fraction of sentences to retain")
    s.add_argument("--lambda", dest="lambda_", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--query")
    s.add_argument("--mode", choices=("topo_task", "random", "topo_only"))
    s.add_argument("--no-hierarchy", action="store_true")
    s.add_argument("--hierarchy-threshold", dest="hierarchy_threshold", type=int)
    s.add_argument("--segments", dest="segment_target_count", type=int)
    s.add_argument("--local-ratio-floor", dest="local_ratio_floor", type=float)
    s.add_argument("--disconnect-penalty", dest="disconnect_penalty", type=float)
    s.add_argument("--strict", action="store_true", default=None)
    s.add_argument("--workers", type=int)
    s.add_argument("--out")
    s.add_argument("--out-format", dest="out_format", choices=("json", "plain_text"), default="json")
    s.add_argument("--log", help="deletion log JSONL path")
    s.add_argument("--save-config", dest="save_config", help="write the resolved config as TOML")
    s.set_defaults(func=cmd_summarize)

    t = sub.add_parser("inspect-topology", help="export barcodes, pool and position report")
    _add_pipeline_flags(t)
    t.add_argument("--out-dir", dest="out_dir", required=True)
    t.set_defaults(func=cmd_inspect_topology)

    ev = sub.add_parser("evaluate", help="ROUGE report for candidate/reference JSONL files")
    ev.add_argument("--candidates", required=True)
    ev.add_argument("--references", required=True)
    ev.add_argument("--variant", action="append", choices=VARIANTS)
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    root = logging.getLogger("glosa_sum")
    if not root.handlers:
        root.addHandler(_JsonLineHandler())
    root.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except GlosaError as exc:
        _diag("error", type(exc).__name__, str(exc))
        return _exit_code(exc)
    except ValueError as exc:
        _diag("error", "ValueError", str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
