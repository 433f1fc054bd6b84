"""Scenario ingestion and reduction: series files, k-means, scenario days."""

from .kmeans import KmeansResult, choose_k, kmeans_reduce, silhouette_score
from .scenarioset import (
    ScenarioDay,
    ScenarioSet,
    build_scenarioset,
    load_scenarioset,
    nodal_injections,
    save_scenarioset,
)
from .series import NodalSeries, load_series, save_series

__all__ = [
    "KmeansResult",
    "NodalSeries",
    "ScenarioDay",
    "ScenarioSet",
    "build_scenarioset",
    "choose_k",
    "kmeans_reduce",
    "load_scenarioset",
    "load_series",
    "nodal_injections",
    "save_scenarioset",
    "save_series",
    "silhouette_score",
]
