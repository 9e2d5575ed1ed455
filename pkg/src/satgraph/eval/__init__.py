"""Profiling, classification, link-prediction and latent-space evaluation."""

from .linkpred import LinkPredResult, auc_ap, auc_score, average_precision
from .mmd import median_bandwidth, mmd
from .ranking import DEFAULT_KS, SPARSE_KS, ProfilingResult, ndcg_at_k, profile_scores, ranking, recall_at_k
from .classify import ClassificationResult, classify_nodes, induced_edges
from .report import (MetricReport, append_results, pivot, pivot_csv, pivot_text, read_curves, read_results,
                     write_curves)
from .export import embeddings_csv, export_embeddings, read_embeddings_csv

__all__ = [
    "DEFAULT_KS", "SPARSE_KS", "ClassificationResult", "LinkPredResult", "MetricReport", "ProfilingResult",
    "append_results", "auc_ap", "auc_score", "average_precision", "classify_nodes", "embeddings_csv",
    "export_embeddings", "induced_edges", "median_bandwidth", "mmd", "ndcg_at_k", "pivot", "pivot_csv",
    "pivot_text", "profile_scores", "ranking", "read_curves", "read_embeddings_csv", "read_results",
    "recall_at_k", "write_curves",
]
