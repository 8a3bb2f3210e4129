"""Flexible grid-graph construction, neighborhoods and eigenvector centrality."""

from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridGraph:
    rows: int
    cols: int
    coords: np.ndarray      # (n, 2) node (x, y), row-major
    edges: tuple            # ((u, v, distance), ...) with u < v
    adjacency: np.ndarray   # (n, n) symmetric 0/1
    neighbors: tuple        # sorted neighbor indices per node

    @property
    def n(self) -> int:
        return self.rows * self.cols

    def node(self, i):
        """Return (row, col, x, y) for node ``i``."""
        r, c = divmod(i, self.cols)
        return r, c, float(self.coords[i, 0]), float(self.coords[i, 1])

    def distance(self, u, v) -> float:
        return float(np.hypot(*(self.coords[u] - self.coords[v])))


@dataclass(frozen=True)
class CentralityVector:
    c: np.ndarray
    eigenvalue: float
    n_iter: int


def build_grid_graph(coords, rows: int, cols: int, diagonal: bool = False) -> GridGraph:
    """Connect 4-neighbor lattice pairs (8-neighbor with ``diagonal``)."""
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
    if len(coords) == 0:
        raise ValueError("empty coordinate list")
    if rows * cols != len(coords):
        raise ValueError(f"{len(coords)} coordinates do not fill a {rows}x{cols} grid")
    steps = [(0, 1), (1, 0)]
    if diagonal:
        steps += [(1, 1), (1, -1)]
    n = rows * cols
    adjacency = np.zeros((n, n))
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dr, dc in steps:
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    v = rr * cols + cc
                    d = float(np.hypot(*(coords[u] - coords[v])))
                    edges.append((u, v, d))
                    adjacency[u, v] = adjacency[v, u] = 1.0
    neighbors = tuple(tuple(int(j) for j in np.flatnonzero(adjacency[i])) for i in range(n))
    return GridGraph(rows, cols, coords, tuple(edges), adjacency, neighbors)


def neighborhood(graph: GridGraph, v: int, steps: int = 1) -> list:
    """One-step neighbors of ``v``, or (u, z) two-step paths with z != v."""
    if not 0 <= v < graph.n:
        raise IndexError(f"node {v} outside graph of {graph.n} nodes")
    if steps == 1:
        return list(graph.neighbors[v])
    if steps == 2:
        return [(u, z) for u in graph.neighbors[v] for z in graph.neighbors[u] if z != v]
    raise ValueError("steps must be 1 or 2")


def power_centrality(adjacency, max_iter: int = 1000, tol: float = 1e-10) -> CentralityVector:
    """Principal eigenvector of a connected graph's adjacency matrix.

    Iterates on A + I so bipartite graphs do not oscillate; the eigenvectors
    are those of A.
    """
    a = np.asarray(adjacency, dtype=np.float64)
    n = a.shape[0]
    shifted = a + np.eye(n)
    c = np.full(n, 1.0 / np.sqrt(n))
    for it in range(1, max_iter + 1):
        nxt = shifted @ c
        nxt /= np.linalg.norm(nxt)
        delta = np.linalg.norm(nxt - c)
        c = nxt
        if delta < tol:
            return CentralityVector(c, float(c @ a @ c), it)
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def eigenvector_centrality(graph: GridGraph, max_iter: int = 1000,
                           tol: float = 1e-10) -> CentralityVector:
    return power_centrality(graph.adjacency, max_iter, tol)


def graph_to_json(graph: GridGraph, centrality: CentralityVector = None) -> dict:
    nodes = []
    for i in range(graph.n):
        r, c, x, y = graph.node(i)
        nodes.append({"id": i, "row": r, "col": c, "x": x, "y": y,
                      "centrality": None if centrality is None else float(centrality.c[i])})
    return {
        "rows": graph.rows,
        "cols": graph.cols,
        "nodes": nodes,
        "edges": [{"u": u, "v": v, "distance": d} for u, v, d in graph.edges],
    }
