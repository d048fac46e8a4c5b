"""Record deduplication via sentence-embedding clustering.

The pipeline: ingest a CSV into a Dataset, build match sentences, embed them
with a pluggable provider, cluster the vectors with blocked
epsilon-neighborhood matching, and score the match groups against ground
truth with pair-counting metrics. A traditional blocking + Levenshtein
baseline is included for comparison.
"""

from .baseline import (
    BaselineParams,
    CandidatePair,
    baseline_cluster,
    candidate_count,
    generate_candidates,
    levenshtein_similarity,
    match_pairs,
    run_baseline,
)
from .clustering import (
    ClusterAssignment,
    ClusterParams,
    GroupStats,
    cluster,
    cluster_multi_epsilon,
    group_stats,
    load_assignment_csv,
    save_assignment_csv,
)
from .embedding import (
    EmbeddingMatrix,
    EmbeddingProvider,
    FileProvider,
    HttpProvider,
    MockProvider,
    embed_dataset,
    load_embeddings,
    mock_embed,
    save_embeddings,
)
from .errors import ConfigError, DataError, DedupError, ProviderError
from .evaluation import (
    PairMetrics,
    ReportRow,
    SweepResult,
    epsilon_sweep,
    machine_report,
    pair_metrics,
    render_report,
)
from .metrics import distance, nearest_neighbor_distances, pairwise_distances
from .records import (
    Dataset,
    MatchSentenceSpec,
    Record,
    build_match_sentence,
    dataset_fingerprint,
    empty_sentence_ids,
    load_csv,
    save_csv,
)
from .viz import ProjectedPoint, export_projection_csv, export_sweep_curve, project_2d

__version__ = "0.1.0"

__all__ = [
    "BaselineParams",
    "CandidatePair",
    "ClusterAssignment",
    "ClusterParams",
    "ConfigError",
    "DataError",
    "Dataset",
    "DedupError",
    "EmbeddingMatrix",
    "EmbeddingProvider",
    "FileProvider",
    "GroupStats",
    "HttpProvider",
    "MatchSentenceSpec",
    "MockProvider",
    "PairMetrics",
    "ProjectedPoint",
    "ProviderError",
    "Record",
    "ReportRow",
    "SweepResult",
    "baseline_cluster",
    "build_match_sentence",
    "candidate_count",
    "cluster",
    "cluster_multi_epsilon",
    "dataset_fingerprint",
    "distance",
    "embed_dataset",
    "empty_sentence_ids",
    "epsilon_sweep",
    "export_projection_csv",
    "export_sweep_curve",
    "generate_candidates",
    "group_stats",
    "levenshtein_similarity",
    "load_assignment_csv",
    "load_csv",
    "load_embeddings",
    "machine_report",
    "match_pairs",
    "mock_embed",
    "nearest_neighbor_distances",
    "pair_metrics",
    "pairwise_distances",
    "project_2d",
    "render_report",
    "run_baseline",
    "save_assignment_csv",
    "save_csv",
    "save_embeddings",
    "__version__",
]
