"""Image -> grid-graph -> embedding vector, composed from the stage modules."""

from dataclasses import dataclass

import numpy as np

from gridvec.clustering import project_grid
from gridvec.config import Config
from gridvec.embed import node_embeddings, readout
from gridvec.features import feature_matrix
from gridvec.graph import CentralityVector, GridGraph, build_grid_graph, eigenvector_centrality
from gridvec.ingest import Image, resize_bilinear, to_gray
from gridvec.keypoints import fast_detect, orient, select_keypoints


@dataclass
class GraphStage:
    """Everything up to (and including) node features; shared by all variants."""

    keypoints: list
    graph: GridGraph
    features: np.ndarray
    centrality: CentralityVector


def prepare(image: Image, cfg: Config) -> Image:
    if cfg.image.width and cfg.image.height:
        return resize_bilinear(image, cfg.image.width, cfg.image.height)
    return image


def build_stage(image: Image, cfg: Config, features=None) -> GraphStage:
    """Detect, select, project, build the graph and extract node features.

    ``features`` overrides extraction with an externally computed matrix.
    """
    image = prepare(image, cfg)
    gray = to_gray(image)
    kc = cfg.keypoints
    detections = fast_detect(gray, kc.threshold, kc.arc)
    points = select_keypoints(detections, image.width, image.height, cfg.margin,
                              kc.target, seed=cfg.run.seed)
    points = orient(gray, points, kc.moment_radius)
    coords = project_grid(points, cfg.grid.rows, cfg.grid.cols, seed=cfg.run.seed)
    graph = build_grid_graph(coords, cfg.grid.rows, cfg.grid.cols, cfg.grid.diagonal)
    if features is None:
        features = feature_matrix(image, coords, cfg.extractor.kind, cfg.patch.side,
                                  cfg.extractor_params())
    elif len(features) != graph.n:
        raise ValueError(f"imported features have {len(features)} rows, graph has {graph.n}")
    centrality = eigenvector_centrality(graph)
    return GraphStage(points, graph, np.asarray(features, dtype=np.float64), centrality)


def embed_stage(stage: GraphStage, cfg: Config) -> np.ndarray:
    params = cfg.embed_params()
    H = node_embeddings(stage.features, stage.graph, params,
                        stage.centrality if params.uses_centrality else None)
    return readout(H, params.variant)


def embed_image(image: Image, cfg: Config = None, features=None) -> np.ndarray:
    """Full pipeline: one embedding vector per image, deterministic per seed."""
    cfg = cfg or Config()
    return embed_stage(build_stage(image, cfg, features), cfg)
