"""Node aggregation variants and image-level readout.

Each variant name encodes three choices: ``Agg`` (plain features) vs ``EVC``
(features scaled by eigenvector centrality), neighborhood depth 1 or 2, and a
trailing ``R`` for sum readout (otherwise node vectors are concatenated).
"""

from dataclasses import dataclass

import numpy as np

from gridvec.graph import CentralityVector, GridGraph

VARIANTS = ("Agg1R", "Agg1", "Agg2R", "Agg2", "EVC1R", "EVC1", "EVC2R", "EVC2")


@dataclass(frozen=True)
class EmbedParams:
    variant: str = "Agg1R"
    gamma: float = 1.0
    theta: float = None              # None: per-node neighbor count
    edge_weighting: str = "none"     # or "inverse-distance"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if self.theta is not None and not self.theta > 0:
            raise ValueError("constant theta must be > 0")
        if self.edge_weighting not in ("none", "inverse-distance"):
            raise ValueError(f"unknown edge weighting {self.edge_weighting!r}")

    @property
    def uses_centrality(self) -> bool:
        return self.variant.startswith("EVC")

    @property
    def two_step(self) -> bool:
        return self.variant[3] == "2"

    @property
    def summed(self) -> bool:
        return self.variant.endswith("R")


def _theta(graph, params):
    if params.theta is None:
        return np.array([max(len(nb), 1) for nb in graph.neighbors], dtype=np.float64)
    return np.full(graph.n, float(params.theta))


def _edge_weights(graph, params):
    """weights[v][k] applies to the k-th neighbor of v; sums to deg(v) per node."""
    if params.edge_weighting == "none":
        return [np.ones(len(nb)) for nb in graph.neighbors]
    out = []
    for v, nb in enumerate(graph.neighbors):
        d = np.array([graph.distance(v, u) for u in nb])
        if np.any(d <= 0):
            raise ValueError(f"node {v} coincides with a neighbor; inverse distance undefined")
        inv = 1.0 / d
        out.append(inv * len(nb) / inv.sum() if len(nb) else inv)
    return out


def node_embeddings(X, graph: GridGraph, params: EmbedParams,
                    centrality: CentralityVector = None) -> np.ndarray:
    """Per-node embeddings, shape (n, d)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != graph.n:
        raise ValueError(f"feature matrix shape {X.shape} does not match {graph.n} nodes")
    theta = _theta(graph, params)

    if params.uses_centrality:
        if centrality is None:
            raise ValueError(f"{params.variant} requires eigenvector centrality")
        c = np.asarray(centrality.c, dtype=np.float64)
        src = X * c[:, None]
        H = src.copy()
        for v, nb in enumerate(graph.neighbors):
            if nb:
                H[v] += src[list(nb)].sum(axis=0) / theta[v]
            if params.two_step:
                for u in nb:
                    far = [z for z in graph.neighbors[u] if z != v]
                    if far:
                        H[v] += src[far].sum(axis=0) / theta[u]
        return H

    weights = _edge_weights(graph, params)
    scale = params.gamma / theta
    H = X.copy()
    for v, nb in enumerate(graph.neighbors):
        if nb:
            H[v] += scale[v] * (weights[v] @ X[list(nb)])
        if params.two_step:
            for u in nb:
                keep = [k for k, z in enumerate(graph.neighbors[u]) if z != v]
                if keep:
                    far = [graph.neighbors[u][k] for k in keep]
                    H[v] += scale[u] * (weights[u][keep] @ X[far])
    return H


def readout(H, variant: str) -> np.ndarray:
    """Sum node rows for R variants, otherwise concatenate them in node order."""
    H = np.asarray(H)
    if variant.endswith("R"):
        return H.sum(axis=0)
    return H.reshape(-1)


def embedding_dim(variant: str, n: int, d: int) -> int:
    return d if variant.endswith("R") else n * d
