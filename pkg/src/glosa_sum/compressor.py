"""Topology-guided iterative deletion and hierarchical segment-then-merge runs."""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bm25 import BM25Params, normalized_scores
from .corpus import SentenceRecord
from .embeddings import EmbeddingMatrix
from .errors import ConfigError, EmptyPool, PoolExceedsBudget, TooFewSentences
from .graph import SemanticGraph, adaptive_k, build_graph, remove_node, shortest_path_lengths
from .homology import (
    Filtration,
    LandmarkSet,
    PersistenceDiagram,
    build_witness_filtration,
    reduce,
    select_landmarks,
)
from .pool import ProtectedPool, build_pool

logger = logging.getLogger(__name__)

SCORING_MODES = ("topo_task", "random", "topo_only")
MAX_SEGMENT_SENTENCES = 150


@dataclass(frozen=True)
class TopologyConfig:
    alpha: float = 0.5
    tau: float = 10.0
    landmark_proportion: float = 0.2
    nu: int = 1
    max_value: float = 3.0
    k_pool: int = 3
    m_pool: int = 3
    k_min: int = 5
    k_max: int = 20

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not 0.0 < self.landmark_proportion <= 1.0:
            raise ConfigError(f"landmark_proportion must lie in (0, 1], got {self.landmark_proportion}")
        if self.nu not in (0, 1, 2):
            raise ConfigError(f"nu must be 0, 1 or 2, got {self.nu}")
        if self.max_value <= 0:
            raise ConfigError(f"max_value must be positive, got {self.max_value}")
        if self.k_pool < 0 or self.m_pool < 0:
            raise ConfigError("k_pool and m_pool must be non-negative")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError("k bounds must satisfy 1 <= k_min <= k_max")


@dataclass(frozen=True)
class CompressionConfig:
    target_ratio: float = 0.3
    lambda_weight: float = 0.7
    beta_weight: float = 0.5
    query: str | None = None
    disconnect_penalty: float = -1e9
    scoring_mode: str = "topo_task"
    hierarchy_threshold: int = 120
    segment_target_count: int | None = None
    local_ratio_floor: float = 0.5
    seed: int = 42
    strict: bool = False

    def validate(self) -> None:
        if not 0.0 < self.target_ratio <= 1.0:
            raise ConfigError(f"target_ratio must lie in (0, 1], got {self.target_ratio}")
        for name in ("lambda_weight", "beta_weight", "local_ratio_floor"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.disconnect_penalty >= 0:
            raise ConfigError("disconnect_penalty must be negative")
        if self.scoring_mode not in SCORING_MODES:
            raise ConfigError(f"scoring_mode must be one of {SCORING_MODES}")
        if self.hierarchy_threshold < 1:
            raise ConfigError("hierarchy_threshold must be >= 1")
        if self.segment_target_count is not None and self.segment_target_count < 1:
            raise ConfigError("segment_target_count must be >= 1")


@dataclass(frozen=True)
class DeletionStep:
    iter: int
    index: int
    score: float
    topo_raw: float | None
    topo_norm: float | None
    task: float
    tie_broken: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Summary:
    document_id: str
    retained_indices: tuple[int, ...]
    protected_indices: tuple[int, ...]
    sentences: tuple[str, ...]
    deletion_log: tuple[DeletionStep, ...] = ()
    config_echo: dict = field(default_factory=dict)
    hierarchical: bool = False
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "retained_indices": list(self.retained_indices),
            "protected_indices": list(self.protected_indices),
            "sentences": list(self.sentences),
            "scores": [step.to_dict() for step in self.deletion_log],
            "config_echo": self.config_echo,
            "hierarchical": self.hierarchical,
        }


@dataclass(frozen=True)
class Analysis:
    graph: SemanticGraph
    landmarks: LandmarkSet
    filtration: Filtration
    diagram: PersistenceDiagram
    pool: ProtectedPool


def analyze(emb: EmbeddingMatrix, topo: TopologyConfig = TopologyConfig(), seed: int = 42) -> Analysis:
    """Graph construction plus the single persistent-homology pass for one text."""
    if emb.n < 2:
        raise TooFewSentences(f"need at least 2 sentences, got {emb.n}")
    graph = build_graph(emb, topo.alpha, topo.tau, adaptive_k(emb.n, topo.k_min, topo.k_max))
    landmarks = select_landmarks(emb, topo.landmark_proportion, seed)
    filtration = build_witness_filtration(emb, landmarks, topo.nu, topo.max_value)
    diagram = reduce(filtration)
    pool = build_pool(diagram, topo.k_pool, topo.m_pool)
    return Analysis(graph, landmarks, filtration, diagram, pool)


def budget_count(ratio: float, n: int) -> int:
    # tolerance stops float noise such as 0.7 * 10 = 7.000000000000001 bumping the ceiling
    return math.ceil(ratio * n - 1e-9)


# --- scoring ---------------------------------------------------------------

def _pool_order(pool: ProtectedPool) -> list[int]:
    if not pool.union:
        raise EmptyPool("TopoScore needs a non-empty protected pool")
    return sorted(pool.union)


def _topo_from_paths(i: int, paths: list[dict[int, float]], penalty: float) -> float:
    reached = [p[i] for p in paths if i in p]
    if not reached:
        return penalty
    missing = len(paths) - len(reached)
    return -math.fsum(reached) + missing * penalty / len(paths)


def topo_score(g: SemanticGraph, i: int, pool: ProtectedPool, penalty: float = -1e9) -> float:
    """Negated sum of shortest-path lengths from ``i`` to every protected node."""
    paths = [shortest_path_lengths(g, p) for p in _pool_order(pool)]
    return _topo_from_paths(i, paths, penalty)


def task_scores(
    sentences: list[str],
    query: str | None,
    emb: EmbeddingMatrix,
    q_emb,
    beta: float,
    bm25_params: BM25Params = BM25Params(),
) -> np.ndarray:
    if not query:
        return np.zeros(len(sentences))
    lexical = np.asarray(normalized_scores(sentences, query, bm25_params))
    semantic = np.clip(emb.rows @ np.asarray(q_emb), -1.0, 1.0)
    return beta * semantic + (1.0 - beta) * lexical


def task_score(i, query, emb, q_emb, beta, sentences, bm25_params: BM25Params = BM25Params()) -> float:
    return float(task_scores(sentences, query, emb, q_emb, beta, bm25_params)[i])


def min_max(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi - lo <= 0.0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def deletion_scores(topo_raw, task, cfg: CompressionConfig) -> tuple[np.ndarray, np.ndarray]:
    """Composite priority for the current candidates; returns (scores, topo_norm)."""
    norm = min_max(topo_raw)
    lam = 1.0 if cfg.scoring_mode == "topo_only" else cfg.lambda_weight
    task = np.asarray(task) if cfg.scoring_mode != "topo_only" else np.zeros_like(norm)
    return lam * norm + (1.0 - lam) * task, norm


# --- flat compression ------------------------------------------------------

def compress(
    sentences: list[SentenceRecord],
    emb: EmbeddingMatrix,
    g: SemanticGraph,
    pool: ProtectedPool,
    cfg: CompressionConfig,
    q_emb=None,
    target_count: int | None = None,
    document_id: str = "",
    config_echo: dict | None = None,
) -> Summary:
    """Delete the lowest-priority unprotected sentence until the budget is met."""
    n = len(sentences)
    budget = budget_count(cfg.target_ratio, n) if target_count is None else target_count
    protected = pool.union
    warnings = []
    if len(protected) > budget:
        err = PoolExceedsBudget(len(protected), budget)
        if cfg.strict:
            raise err
        logger.warning("%s", err)
        warnings.append(str(err))
    target = max(budget, len(protected))

    texts = [s.text for s in sentences]
    task_all = task_scores(texts, cfg.query, emb, q_emb, cfg.beta_weight)
    rng = np.random.default_rng(cfg.seed)
    pool_nodes = sorted(protected)

    retained = set(range(n))
    log: list[DeletionStep] = []
    while len(retained) > target:
        cands = sorted(retained - protected)
        task = task_all[cands]
        if cfg.scoring_mode == "random":
            scores = rng.random(len(cands))
            raw = norm = [None] * len(cands)
        else:
            if pool_nodes:
                paths = [shortest_path_lengths(g, p) for p in pool_nodes]
                raw = np.array([_topo_from_paths(i, paths, cfg.disconnect_penalty) for i in cands])
            else:
                # no pool to anchor to: structure carries no signal
                raw = np.zeros(len(cands))
            scores, norm = deletion_scores(raw, task, cfg)
        best = float(np.min(scores))
        tied = [pos for pos, s in enumerate(scores) if s == best]
        pos = tied[0]  # lowest original index among ties goes first
        victim = cands[pos]
        log.append(DeletionStep(
            iter=len(log),
            index=victim,
            score=float(scores[pos]),
            topo_raw=None if raw[pos] is None else float(raw[pos]),
            topo_norm=None if norm[pos] is None else float(norm[pos]),
            task=float(task[pos]),
            tie_broken=len(tied) > 1,
        ))
        retained.remove(victim)
        g = remove_node(g, victim)

    kept = tuple(sorted(retained))
    return Summary(
        document_id=document_id,
        retained_indices=kept,
        protected_indices=tuple(pool_nodes),
        sentences=tuple(texts[i] for i in kept),
        deletion_log=tuple(log),
        config_echo=dict(config_echo or {}),
        warnings=tuple(warnings),
    )


def run_flat(
    sentences: list[SentenceRecord],
    emb: EmbeddingMatrix,
    cfg: CompressionConfig,
    topo: TopologyConfig = TopologyConfig(),
    q_emb=None,
    target_count: int | None = None,
    document_id: str = "",
    config_echo: dict | None = None,
) -> Summary:
    """graph -> TDA -> pool -> compress for one level of the pipeline."""
    result = analyze(emb, topo, cfg.seed)
    return compress(sentences, emb, result.graph, result.pool, cfg, q_emb,
                    target_count, document_id, config_echo)


# --- hierarchical ------------------------------------------------------------

def split_segments(sentences: list[SentenceRecord], markers=None, segment_count: int | None = None) -> list[list[int]]:
    """Partition sentence positions into contiguous segments."""
    n = len(sentences)
    if markers:
        groups: dict[int, list[int]] = {}
        for pos, s in enumerate(sentences):
            groups.setdefault(bisect_right(markers, s.char_span[0]), []).append(pos)
        return [groups[k] for k in sorted(groups)]
    t = segment_count or math.ceil(n / MAX_SEGMENT_SENTENCES)
    t = max(1, min(t, n))
    return [list(map(int, block)) for block in np.array_split(np.arange(n), t)]


def _relabel(sentences: list[SentenceRecord], positions: list[int]) -> list[SentenceRecord]:
    return [replace(sentences[p], index=k) for k, p in enumerate(positions)]


def _remap_summary(summary: Summary, positions: list[int]) -> Summary:
    return replace(
        summary,
        retained_indices=tuple(positions[i] for i in summary.retained_indices),
        protected_indices=tuple(positions[i] for i in summary.protected_indices),
        deletion_log=tuple(replace(s, index=positions[s.index]) for s in summary.deletion_log),
    )


def compress_hierarchical(
    sentences: list[SentenceRecord],
    emb: EmbeddingMatrix,
    cfg: CompressionConfig,
    topo: TopologyConfig = TopologyConfig(),
    q_emb=None,
    document_id: str = "",
    markers=None,
    config_echo: dict | None = None,
    workers: int = 1,
) -> Summary:
    """Compress segments independently, then run one global pass over the survivors."""
    n = len(sentences)
    if n < cfg.hierarchy_threshold:
        return run_flat(sentences, emb, cfg, topo, q_emb, None, document_id, config_echo)

    segments = split_segments(sentences, markers, cfg.segment_target_count)
    local_cfg = replace(cfg, target_ratio=min(1.0, max(math.sqrt(cfg.target_ratio), cfg.local_ratio_floor)))

    def run_segment(positions: list[int]) -> Summary:
        if len(positions) < 2:
            # nothing to analyse; the sentence passes through to the global stage
            return Summary(document_id, tuple(positions), (), tuple(sentences[p].text for p in positions))
        local = run_flat(_relabel(sentences, positions), emb.subset(positions), local_cfg, topo, q_emb)
        return _remap_summary(local, positions)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        local_results = list(ex.map(run_segment, segments))

    survivors = sorted(i for r in local_results for i in r.retained_indices)
    final = run_flat(
        _relabel(sentences, survivors), emb.subset(survivors), cfg, topo, q_emb,
        target_count=min(budget_count(cfg.target_ratio, n), len(survivors)),
    )
    final = _remap_summary(final, survivors)

    steps = [s for r in local_results for s in r.deletion_log] + list(final.deletion_log)
    steps = [replace(s, iter=k) for k, s in enumerate(steps)]
    warnings = [w for r in local_results for w in r.warnings] + list(final.warnings)
    return replace(
        final,
        document_id=document_id,
        deletion_log=tuple(steps),
        config_echo=dict(config_echo or {}),
        hierarchical=True,
        warnings=tuple(warnings),
    )
