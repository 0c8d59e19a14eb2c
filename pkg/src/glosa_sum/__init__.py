"""Topology-guided extractive summarization.

Sentences become a mutual k-NN graph, a single persistent-homology pass fixes a
protected pool of structurally essential sentences, and the rest are deleted
greedily by shortest-path connectivity to that pool and query relevance.
"""

from .compressor import (
    CompressionConfig,
    Summary,
    TopologyConfig,
    analyze,
    compress,
    compress_hierarchical,
    run_flat,
)
from .config import RunConfig
from .corpus import Document, SentenceRecord, load_document, segment_sentences, write_summary
from .embeddings import EmbeddingMatrix, EmbeddingProviderConfig, embed_sentences
from .evaluation import evaluate_corpus, rouge_l, rouge_n
from .pipeline import inspect_topology, summarize

__version__ = "0.1.0"
