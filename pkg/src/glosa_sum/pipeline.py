"""End-to-end wiring: document -> sentences -> embeddings -> summary."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .compressor import Analysis, Summary, analyze, compress_hierarchical, run_flat
from .config import RunConfig
from .corpus import Document, SentenceRecord, segment_sentences
from .embeddings import EmbeddingMatrix, embed_query, embed_sentences
from .pool import position_distribution


@dataclass(frozen=True)
class PreparedDocument:
    document: Document
    sentences: list[SentenceRecord]
    embeddings: EmbeddingMatrix


def _provider_cfg(cfg: RunConfig, doc: Document):
    emb_cfg = cfg.embedding()
    if emb_cfg.mode == "cache" and emb_cfg.cache_path:
        from pathlib import Path

        path = Path(emb_cfg.cache_path)
        if path.is_dir():
            emb_cfg = replace(emb_cfg, cache_path=str(path / f"{doc.id}.jsonl"))
    return emb_cfg


def prepare(doc: Document, cfg: RunConfig, transport=None) -> PreparedDocument:
    sentences = segment_sentences(doc)
    emb = embed_sentences(sentences, _provider_cfg(cfg, doc), transport=transport)
    return PreparedDocument(doc, sentences, emb)


def summarize(doc: Document, cfg: RunConfig, transport=None) -> Summary:
    prep = prepare(doc, cfg, transport)
    q_emb = None
    if cfg.query and cfg.scoring_mode == "topo_task":
        q_emb = embed_query(cfg.query, _provider_cfg(cfg, doc), transport=transport)
    comp = cfg.compression()
    echo = cfg.echo()
    if cfg.hierarchy:
        return compress_hierarchical(
            prep.sentences, prep.embeddings, comp, cfg.topology(), q_emb,
            document_id=doc.id, markers=doc.segment_markers, config_echo=echo,
            workers=cfg.workers,
        )
    return run_flat(prep.sentences, prep.embeddings, comp, cfg.topology(), q_emb,
                    document_id=doc.id, config_echo=echo)


def inspect_topology(doc: Document, cfg: RunConfig, transport=None) -> tuple[Analysis, dict]:
    """Run up to pool construction; returns the analysis and a JSON-ready report."""
    prep = prepare(doc, cfg, transport)
    result = analyze(prep.embeddings, cfg.topology(), cfg.seed)
    n = prep.embeddings.n
    report = {
        "document_id": doc.id,
        "n_sentences": n,
        "barcodes": result.diagram.to_dict(),
        "pool": result.pool.to_dict(),
        "graph": result.graph.to_dict(),
        "config_echo": cfg.echo(),
    }
    if result.pool.union:
        begin, middle, end = position_distribution(result.pool, n)
        report["positions"] = {"begin": begin, "middle": middle, "end": end}
    else:
        report["positions"] = None
    return result, report


def deletion_log_jsonl(summary: Summary) -> str:
    return "".join(json.dumps(step.to_dict()) + "\n" for step in summary.deletion_log)
