"""Graph-based dimensionality reduction with persistence, local and context-loss quality metrics."""

from .dataset import PointCloud, generate_blobs, generate_disk_uniform, generate_half_moons, load_csv, save_csv
from .embedding import Embedding, pca_embedding, random_projection, spectral_embedding
from .knn import build_knn, symmetrize
from .layout import LayoutParams, do_layout, fit_kernel
from .metrics import context_loss, embedding_stress, neighborhood_preservation
from .persistence import bottleneck_distance, global_structure_report, rips_persistence, wasserstein_distance
from .pipeline import PipelineConfig, compare_embeddings, run_benchmark_suite, run_pipeline

__all__ = [
    "Embedding",
    "LayoutParams",
    "PipelineConfig",
    "PointCloud",
    "bottleneck_distance",
    "build_knn",
    "compare_embeddings",
    "context_loss",
    "do_layout",
    "embedding_stress",
    "fit_kernel",
    "generate_blobs",
    "generate_disk_uniform",
    "generate_half_moons",
    "global_structure_report",
    "load_csv",
    "neighborhood_preservation",
    "pca_embedding",
    "random_projection",
    "rips_persistence",
    "run_benchmark_suite",
    "run_pipeline",
    "save_csv",
    "spectral_embedding",
    "symmetrize",
    "wasserstein_distance",
]
