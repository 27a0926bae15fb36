"""Local fast-failover forwarding patterns on undirected graphs.

Simulation, exhaustive resilience verification, pattern-preserving
transformations, and backtracking synthesis at desk scale.
"""

from .graph import (
    Edge,
    FaceWalk,
    Graph,
    GraphError,
    LimitError,
    component,
    connected,
    contract_edge,
    edge,
    face_census,
    failure_set,
    find_minor_embedding,
    find_outerplanar_rotation,
    has_minor,
    induced_remove,
    local_failures,
    outer_face_walk,
    subdivide3,
    validate_outerplanar,
)

__all__ = [
    "Edge",
    "FaceWalk",
    "Graph",
    "GraphError",
    "LimitError",
    "component",
    "connected",
    "contract_edge",
    "edge",
    "face_census",
    "failure_set",
    "find_minor_embedding",
    "find_outerplanar_rotation",
    "has_minor",
    "induced_remove",
    "local_failures",
    "outer_face_walk",
    "subdivide3",
    "validate_outerplanar",
]
