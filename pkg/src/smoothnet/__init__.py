"""Smoothed analysis of dynamic networks: k-smoothing, adversarial generators and the processes run on them."""

from .graph import DynamicGraph, GraphError, NetworkType, StaticGraph, edit_distance
from .smoothing import NotInFamily, RetryExhausted, SmoothingConfig, k_smooth_dynamic, k_smooth_graph

__all__ = [
    "DynamicGraph",
    "GraphError",
    "NetworkType",
    "NotInFamily",
    "RetryExhausted",
    "SmoothingConfig",
    "StaticGraph",
    "edit_distance",
    "k_smooth_dynamic",
    "k_smooth_graph",
]
