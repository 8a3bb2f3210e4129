"""Command-line entry point: ``gridvec <command> [options]``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from gridvec import bench
from gridvec.config import Config, ConfigError, iter_keys, load_config, set_value
from gridvec.embed import VARIANTS
from gridvec.features import read_feature_file, write_feature_file
from gridvec.graph import graph_to_json
from gridvec.ingest import FormatError, load_cifar10_batch, load_ppm
from gridvec.learn import evaluate, mlp_init, pca2, read_model, train, write_model
from gridvec.pipeline import build_stage, embed_stage

log = logging.getLogger("gridvec")

COMMANDS = ("embed", "train", "eval", "bench", "graph", "pca", "dataset")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_config_flags(p):
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="INI-style config file")
    for section, key, typ, default in iter_keys():
        g.add_argument(f"--{section}.{key}", dest=f"cfg:{section}.{key}", default=None,
                       metavar=getattr(typ, "__name__", str(typ)).upper(),
                       help=f"default: {default}")


def _config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    for name, value in vars(args).items():
        if name.startswith("cfg:") and value is not None:
            section, key = name[4:].split(".", 1)
            set_value(cfg, section, key, value)
    return cfg.validate()


def build_parser():
    parser = _Parser(prog="gridvec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("embed", help="images -> FGV1 embedding matrix + labels CSV")
    p.add_argument("--in", dest="inp", required=True,
                   help="image directory, single PPM/PGM, or CIFAR-10 .bin batch")
    p.add_argument("--out", required=True, help="output FGV1 file")
    p.add_argument("--labels-out", help="labels CSV (default: <out stem>.labels.csv)")

    p = sub.add_parser("train", help="FGV1 vectors -> FGM1 classifier checkpoint")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--test-in")
    p.add_argument("--test-labels")
    p.add_argument("--out", required=True, help="output FGM1 checkpoint")
    p.add_argument("--history", help="per-epoch history CSV")

    p = sub.add_parser("eval", help="score a checkpoint on FGV1 vectors")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", help="metrics CSV (default: stdout)")

    p = sub.add_parser("bench", help="ablation over variants, patch sizes and grid sizes")
    p.add_argument("--dataset", default="synthetic",
                   help="'synthetic', an image directory, or cifar:TRAIN.bin[,..]:TEST.bin")
    p.add_argument("--variants", default=",".join(VARIANTS))
    p.add_argument("--patches", default="32")
    p.add_argument("--grids", default="5")
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--test-per-class", type=int, default=50)
    p.add_argument("--side", type=int, default=96)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--limit", type=int, help="cap on images per split")
    p.add_argument("--out", required=True, help="ablation CSV")

    p = sub.add_parser("graph", help="dump one image's grid-graph as JSON")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pca", help="FGV1 vectors -> 2-D PCA projection CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--labels")
    p.add_argument("--out", required=True)

    p = sub.add_parser("dataset", help="generate synthetic data or unpack CIFAR-10 to PPM")
    p.add_argument("kind", choices=("synthetic", "cifar"))
    p.add_argument("--in", dest="inp", help="CIFAR-10 .bin batch (kind=cifar)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--side", type=int, default=96)
    p.add_argument("--noise", type=float, default=0.1)

    for name in COMMANDS:
        _add_config_flags(sub.choices[name])
    return parser


def _read_inputs(path):
    """Return [(name, Image, label string)] from a directory, PPM/PGM or CIFAR batch."""
    path = Path(path)
    if path.is_dir():
        if (path / "labels.csv").exists():
            rows = bench.read_labels_csv(path / "labels.csv")
            return [(Path(rel).stem, load_ppm((path / rel).read_bytes()), lab) for rel, lab in rows]
        files = sorted(p for p in path.iterdir() if p.suffix.lower() in (".ppm", ".pgm"))
        return [(p.stem, load_ppm(p.read_bytes()), "") for p in files]
    data = path.read_bytes()
    if path.suffix.lower() == ".bin":
        return [(f"{i:05d}", im, str(lab)) for i, (lab, im) in enumerate(load_cifar10_batch(data))]
    return [(path.stem, load_ppm(data), "")]


def _read_index_labels(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "index,label":
        raise FormatError(f"{path}: expected header 'index,label'")
    return [line.split(",", 1)[1] for line in lines[1:] if line]


def _label_ids(labels, classes=None):
    if classes is None:
        if all(l.lstrip("-").isdigit() for l in labels):
            return np.array([int(l) for l in labels]), None
        classes = sorted(set(labels))
    index = {c: i for i, c in enumerate(classes)}
    missing = sorted(set(labels) - set(index))
    if missing:
        raise FormatError(f"unknown labels {missing}")
    return np.array([index[l] for l in labels]), classes


def cmd_embed(args, cfg):
    items = _read_inputs(args.inp)
    if not items:
        raise FormatError(f"no images found in {args.inp}")
    vectors = []
    for name, image, _ in items:
        features = None
        if cfg.extractor.kind == "fgv1":
            fpath = Path(cfg.extractor.import_dir) / f"{name}.fgv1"
            features = read_feature_file(fpath.read_bytes())
        vectors.append(embed_stage(build_stage(image, cfg, features), cfg))
    out = Path(args.out)
    out.write_bytes(write_feature_file(np.vstack(vectors)))
    labels_out = Path(args.labels_out) if args.labels_out else out.with_suffix(".labels.csv")
    rows = ["index,label"] + [f"{i},{lab}" for i, (_, _, lab) in enumerate(items)]
    labels_out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    log.info("embedded %d images -> %s", len(items), out)


def cmd_train(args, cfg):
    X = read_feature_file(Path(args.inp).read_bytes())
    y, classes = _label_ids(_read_index_labels(args.labels))
    if len(y) != len(X):
        raise FormatError(f"{len(X)} vectors but {len(y)} labels")
    if args.test_in:
        Xte = read_feature_file(Path(args.test_in).read_bytes())
        yte, _ = _label_ids(_read_index_labels(args.test_labels or args.labels), classes)
        if len(yte) != len(Xte):
            raise FormatError(f"{len(Xte)} test vectors but {len(yte)} labels")
    else:
        Xte, yte = X, y
    k = max(2, int(max(y.max(), yte.max())) + 1)
    t = cfg.train
    model = mlp_init([X.shape[1], t.hidden, k], seed=cfg.run.seed)
    model, history = train(model, (X, y), (Xte, yte), t.epochs, t.batch, t.lr,
                           seed=cfg.run.seed, momentum=t.momentum)
    Path(args.out).write_bytes(write_model(model))
    if args.history:
        Path(args.history).write_text(history.to_csv(), encoding="utf-8")


def cmd_eval(args, cfg):
    model = read_model(Path(args.model).read_bytes())
    X = read_feature_file(Path(args.inp).read_bytes())
    y, _ = _label_ids(_read_index_labels(args.labels))
    if len(y) != len(X):
        raise FormatError(f"{len(X)} vectors but {len(y)} labels")
    try:
        acc, loss = evaluate(model, X, y)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    text = f"accuracy,loss\n{acc!r},{loss!r}\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _bench_dataset(args, cfg):
    source = args.dataset
    if source == "synthetic":
        return bench.synthetic_dataset(args.train_per_class, args.test_per_class, args.side,
                                       args.noise, cfg.run.seed)
    if source.startswith("cifar:"):
        parts = source.split(":")
        if len(parts) != 3:
            raise UsageError("--dataset cifar:TRAIN.bin[,TRAIN2.bin]:TEST.bin")
        return bench.cifar_dataset(parts[1].split(","), parts[2], args.limit, args.limit)
    ds = bench.image_directory_dataset(source, seed=cfg.run.seed)
    if args.limit:
        ds.train_images, ds.train_labels = ds.train_images[:args.limit], ds.train_labels[:args.limit]
        ds.test_images, ds.test_labels = ds.test_images[:args.limit], ds.test_labels[:args.limit]
    return ds


def _int_list(text, flag):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated integers, got {text!r}") from None


def cmd_bench(args, cfg):
    variants = tuple(v.strip() for v in args.variants.split(","))
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise UsageError(f"unknown variants {unknown}")
    patches = _int_list(args.patches, "--patches")
    grids = _int_list(args.grids, "--grids")
    dataset = _bench_dataset(args, cfg)
    rows = bench.run_ablation(dataset, variants, patches, grids, cfg,
                              workers=cfg.run.workers)
    Path(args.out).write_text(bench.ablation_csv(rows), encoding="utf-8")


def cmd_graph(args, cfg):
    items = _read_inputs(args.inp)
    if len(items) != 1:
        raise FormatError("graph expects a single image")
    stage = build_stage(items[0][1], cfg)
    doc = graph_to_json(stage.graph, stage.centrality)
    Path(args.out).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def cmd_pca(args, cfg):
    X = read_feature_file(Path(args.inp).read_bytes())
    labels = _read_index_labels(args.labels) if args.labels else [""] * len(X)
    if len(labels) != len(X):
        raise FormatError(f"{len(X)} vectors but {len(labels)} labels")
    pts = pca2(X.astype(np.float64))
    rows = ["x,y,label"] + [f"{x!r},{y!r},{lab}" for (x, y), lab in zip(pts.tolist(), labels)]
    Path(args.out).write_text("\n".join(rows) + "\n", encoding="utf-8")


def cmd_dataset(args, cfg):
    if args.kind == "synthetic":
        images, labels = bench.make_synthetic_dataset(args.per_class, args.side, args.noise,
                                                      cfg.run.seed)
        bench.write_image_directory(args.out, images, labels)
        return
    if not args.inp:
        raise UsageError("dataset cifar requires --in")
    records = load_cifar10_batch(Path(args.inp).read_bytes())
    bench.write_image_directory(args.out, [im for _, im in records], [lab for lab, _ in records])


HANDLERS = {"embed": cmd_embed, "train": cmd_train, "eval": cmd_eval, "bench": cmd_bench,
            "graph": cmd_graph, "pca": cmd_pca, "dataset": cmd_dataset}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing command; choose one of " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        cfg = _config(args)
        HANDLERS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
