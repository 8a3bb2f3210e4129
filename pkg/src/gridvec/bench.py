"""Datasets and the variant / patch-size / grid-size ablation harness."""

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gridvec.config import Config
from gridvec.embed import VARIANTS
from gridvec.ingest import Image, load_cifar10_batch, load_ppm, write_ppm
from gridvec.learn import evaluate, mlp_init, train
from gridvec.pipeline import build_stage, embed_stage

SHAPES = ("disk", "square", "stripes")
SHAPE_COLORS = {"disk": (200, 50, 50), "square": (50, 180, 70), "stripes": (60, 80, 210)}
BACKGROUND = (120, 120, 120)
ABLATION_HEADER = "variant,patch,grid,dim,test_acc,test_loss,sec_per_image"
CIFAR_CLASSES = ("airplane", "automobile", "bird", "cat", "deer",
                 "dog", "frog", "horse", "ship", "truck")


@dataclass
class DatasetManifest:
    name: str
    source: str                 # cifar10-binary | image-directory | synthetic
    splits: dict
    classes: list


@dataclass
class Dataset:
    manifest: DatasetManifest
    train_images: list
    train_labels: list
    test_images: list
    test_labels: list


@dataclass
class AblationRow:
    variant: str
    patch: int
    grid: int
    dim: int
    test_acc: float
    test_loss: float
    sec_per_image: float
    history: object = field(default=None, repr=False)

    def csv_line(self) -> str:
        return (f"{self.variant},{self.patch},{self.grid},{self.dim},"
                f"{self.test_acc!r},{self.test_loss!r},{self.sec_per_image:.6g}")


def shape_mask(shape: str, side: int, cx: float, cy: float, r: float, stripe: int = 4):
    """Boolean raster of one shape; disks use pixel centres inside the circle."""
    ys, xs = np.mgrid[0:side, 0:side] + 0.5
    if shape == "disk":
        return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    box = (np.abs(xs - cx) <= r) & (np.abs(ys - cy) <= r)
    if shape == "square":
        return box
    if shape == "stripes":
        return box & ((np.floor(ys - (cy - r)) // stripe) % 2 == 0)
    raise ValueError(f"unknown shape {shape!r}")


def render_shape(shape, side, noise, rng):
    """One image with a single shape over a noise-textured background.

    Returns the image plus the (cx, cy, r) geometry that was drawn.
    """
    bg = np.empty((side, side, 3))
    bg[:] = BACKGROUND
    if noise > 0:
        coarse = rng.normal(0.0, 1.0, size=(side // 8 + 1, side // 8 + 1, 3))
        coarse = np.kron(coarse, np.ones((8, 8, 1)))[:side, :side]
        bg += 255 * noise * (0.5 * coarse + rng.normal(0.0, 1.0, size=bg.shape))
    r = rng.uniform(side / 8, side / 4)
    cx = rng.uniform(r + 1, side - r - 1)
    cy = rng.uniform(r + 1, side - r - 1)
    color = np.array(SHAPE_COLORS[shape], dtype=np.float64)
    if noise > 0:
        color = color + rng.uniform(-20, 20, size=3)
    mask = shape_mask(shape, side, cx, cy, r)
    bg[mask] = color
    pixels = np.clip(np.rint(bg), 0, 255).astype(np.uint8)
    return Image(pixels), (cx, cy, r)


def make_synthetic_dataset(per_class: int, side: int = 96, noise: float = 0.1,
                           seed: int = 0, classes=SHAPES):
    """``per_class`` images for each shape, labels following ``classes`` order."""
    if side < 64:
        raise ValueError("synthetic images must be at least 64 pixels wide")
    if per_class < 1 or not classes:
        raise ValueError("per_class must be >= 1 and classes non-empty")
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for _ in range(per_class):
        for label, shape in enumerate(classes):
            images.append(render_shape(shape, side, noise, rng)[0])
            labels.append(label)
    return images, labels


def synthetic_dataset(train_per_class=100, test_per_class=50, side=96, noise=0.1, seed=0):
    tr_x, tr_y = make_synthetic_dataset(train_per_class, side, noise, seed)
    te_x, te_y = make_synthetic_dataset(test_per_class, side, noise, seed + 1)
    manifest = DatasetManifest("synthetic-shapes", "synthetic",
                               {"train": len(tr_y), "test": len(te_y)}, list(SHAPES))
    return Dataset(manifest, tr_x, tr_y, te_x, te_y)


def cifar_dataset(train_paths, test_path, limit_train=None, limit_test=None):
    train_recs = []
    for p in train_paths:
        train_recs += load_cifar10_batch(Path(p).read_bytes())
    test_recs = load_cifar10_batch(Path(test_path).read_bytes())
    train_recs = train_recs[:limit_train]
    test_recs = test_recs[:limit_test]
    manifest = DatasetManifest("cifar10", "cifar10-binary",
                               {"train": len(train_recs), "test": len(test_recs)},
                               list(CIFAR_CLASSES))
    return Dataset(manifest, [im for _, im in train_recs], [lab for lab, _ in train_recs],
                   [im for _, im in test_recs], [lab for lab, _ in test_recs])


def read_labels_csv(path):
    """Rows of ``path,label``; returns [(relative path, label string)]."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["path", "label"]:
            raise ValueError(f"{path}: expected header 'path,label', got {header}")
        return [(row[0], row[1]) for row in reader if row]


def load_image_directory(root):
    """Images listed in ``root/labels.csv``: [(Image, label string)] in file order."""
    root = Path(root)
    return [(load_ppm((root / rel).read_bytes()), lab)
            for rel, lab in read_labels_csv(root / "labels.csv")]


def image_directory_dataset(root, seed: int = 0, test_fraction: float = 1 / 3):
    """``root/train`` + ``root/test`` if present, else a seeded split of ``root``."""
    root = Path(root)
    if (root / "train" / "labels.csv").exists() and (root / "test" / "labels.csv").exists():
        train_items = load_image_directory(root / "train")
        test_items = load_image_directory(root / "test")
    else:
        items = load_image_directory(root)
        order = np.random.default_rng(seed).permutation(len(items))
        n_test = max(1, int(round(len(items) * test_fraction)))
        test_items = [items[i] for i in sorted(order[:n_test])]
        train_items = [items[i] for i in sorted(order[n_test:])]
    classes = sorted({lab for _, lab in train_items + test_items}, key=_label_key)
    index = {c: i for i, c in enumerate(classes)}
    manifest = DatasetManifest(root.name, "image-directory",
                               {"train": len(train_items), "test": len(test_items)}, classes)
    return Dataset(manifest, [im for im, _ in train_items], [index[l] for _, l in train_items],
                   [im for im, _ in test_items], [index[l] for _, l in test_items])


def _label_key(label):
    return (0, int(label), "") if label.lstrip("-").isdigit() else (1, 0, label)


def write_image_directory(root, images, labels, prefix="img"):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rows = ["path,label"]
    width = max(5, len(str(len(images))))
    for i, (image, label) in enumerate(zip(images, labels)):
        ext = "ppm" if image.channels == 3 else "pgm"
        name = f"{prefix}{i:0{width}d}.{ext}"
        (root / name).write_bytes(write_ppm(image))
        rows.append(f"{name},{label}")
    (root / "labels.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def _build_all(images, cfg, workers):
    def one(image):
        start = time.perf_counter()
        stage = build_stage(image, cfg)
        return stage, time.perf_counter() - start

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, images))
    return [one(im) for im in images]


def _embed_all(stages, cfg):
    vectors, seconds = [], []
    for stage, _ in stages:
        start = time.perf_counter()
        vectors.append(embed_stage(stage, cfg))
        seconds.append(time.perf_counter() - start)
    return np.vstack(vectors), np.array(seconds)


def run_ablation(dataset: Dataset, variants=VARIANTS, patch_sizes=(32,), grid_sizes=(5,),
                 cfg: Config = None, seed: int = None, workers: int = 1):
    """Embed, train and evaluate every (variant, patch, grid) cell.

    Rows come out variant-major, then patch size, then grid size. The graph
    stages before aggregation do not depend on the variant, so they run once
    per (patch, grid) pair; each row's time is that shared per-image cost plus
    the variant's own aggregation cost. Decoding and file I/O are excluded.
    """
    base = deepcopy(cfg or Config())
    if seed is not None:
        base.run.seed = seed
    k = len(dataset.manifest.classes)
    stages = {}
    for patch in patch_sizes:
        for grid in grid_sizes:
            c = deepcopy(base)
            c.patch.side = patch
            c.grid.rows = c.grid.cols = grid
            stages[patch, grid] = (c, _build_all(dataset.train_images, c, workers),
                                   _build_all(dataset.test_images, c, workers))

    rows = []
    for variant in variants:
        for patch in patch_sizes:
            for grid in grid_sizes:
                c, tr_stages, te_stages = stages[patch, grid]
                c = deepcopy(c)
                c.embed.variant = variant
                c.validate()
                Xtr, tr_sec = _embed_all(tr_stages, c)
                Xte, te_sec = _embed_all(te_stages, c)
                shared = np.array([t for _, t in tr_stages + te_stages])
                per_image = float(np.mean(shared + np.concatenate([tr_sec, te_sec])))
                t = c.train
                model = mlp_init([Xtr.shape[1], t.hidden, k], seed=c.run.seed)
                model, hist = train(model, (Xtr, dataset.train_labels),
                                    (Xte, dataset.test_labels), t.epochs, t.batch, t.lr,
                                    seed=c.run.seed, momentum=t.momentum)
                acc, loss = evaluate(model, Xte, dataset.test_labels)
                rows.append(AblationRow(variant, patch, grid, Xtr.shape[1], acc, loss,
                                        per_image, hist))
    return rows


def ablation_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(ABLATION_HEADER + "\n")
    for row in rows:
        buf.write(row.csv_line() + "\n")
    return buf.getvalue()
