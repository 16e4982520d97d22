"""Rips persistence, diagram distances, Betti curves and the global structure report."""

from .curves import BettiCurve, betti_curve, dtw_distance, emd_rescaled, twed_distance
from .matching import bottleneck_distance, wasserstein_distance
from .report import GlobalReport, global_structure_report
from .rips import PersistenceDiagram, load_diagram_csv, rips_persistence, save_diagram_csv

__all__ = [
    "BettiCurve",
    "GlobalReport",
    "PersistenceDiagram",
    "betti_curve",
    "bottleneck_distance",
    "dtw_distance",
    "emd_rescaled",
    "global_structure_report",
    "load_diagram_csv",
    "rips_persistence",
    "save_diagram_csv",
    "twed_distance",
    "wasserstein_distance",
]
