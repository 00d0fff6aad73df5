"""Convex hulls of random walks: exact formulas and Monte Carlo verification."""

from hullwalk.walkgen import (
    BridgeKind,
    IncrementSpec,
    WalkPath,
    derive_rng,
    sample_bridge,
    sample_exchangeable,
    sample_walk,
)
from hullwalk.hullgeom import (
    DegenerateHullError,
    Facet,
    HullSummary,
    build_hull,
    opening_angle,
    origin_membership,
    project_hull,
    temporal_census,
    update_flags,
)
from hullwalk.exactforms import AsymptoticValue, ExactValue
from hullwalk.mcharness import ComparisonRow, Estimate

__version__ = "0.1.0"

__all__ = [
    "AsymptoticValue",
    "BridgeKind",
    "ComparisonRow",
    "DegenerateHullError",
    "Estimate",
    "ExactValue",
    "Facet",
    "HullSummary",
    "IncrementSpec",
    "WalkPath",
    "build_hull",
    "derive_rng",
    "opening_angle",
    "origin_membership",
    "project_hull",
    "sample_bridge",
    "sample_exchangeable",
    "sample_walk",
    "temporal_census",
    "update_flags",
]
