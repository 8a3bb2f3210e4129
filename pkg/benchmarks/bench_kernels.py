"""Compare the compiled and numpy kernel backends on a 438x640 image.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on both backends with identical inputs; the last block
times the whole embedding pipeline with each backend swapped in.
"""

import argparse
import time

import numpy as np

from gridvec import kernels
from gridvec.config import Config
from gridvec.ingest import Image, resize_bilinear, to_gray
from gridvec.pipeline import embed_image


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def scene(seed=0):
    rng = np.random.default_rng(seed)
    small = Image(rng.integers(0, 256, size=(24, 35, 3), dtype=np.uint8))
    base = resize_bilinear(small, 640, 438).pixels + rng.normal(0, 12, size=(438, 640, 3))
    return Image(np.clip(np.rint(base), 0, 255).astype(np.uint8))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    image = scene()
    gray = np.ascontiguousarray(to_gray(image).values, dtype=np.float64)
    rng = np.random.default_rng(1)
    patch = np.ascontiguousarray(gray[:32, :32])
    xs = rng.uniform(0, 640, 250)
    init = np.sort(xs[:5]).copy()

    names = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    mods = {n: kernels.backend_module(n) for n in names}
    scores = mods["python"].fast_scores(gray, 20 / 255, 9)
    cases = {
        "fast_scores": lambda m: m.fast_scores(gray, 20 / 255, 9),
        "nonmax_suppress": lambda m: m.nonmax_suppress(scores),
        "hog_cells x25": lambda m: [m.hog_cells(patch, 8, 9) for _ in range(25)],
        "lloyd_1d x20": lambda m: [m.lloyd_1d(xs, init.copy(), 100, 1e-6) for _ in range(20)],
    }
    print(f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names) + "     speed-up")
    for label, fn in cases.items():
        t = {n: best_of(lambda: fn(mods[n]), args.repeat) for n in names}
        ratio = f"{t['python'] / t['cython']:>10.1f}x" if "cython" in t else ""
        print(f"{label:<18}" + "".join(f"{1e3 * t[n]:>10.2f}ms" for n in names) + ratio)

    cfg = Config()
    pipeline = {}
    for n in names:
        for attr in ("fast_scores", "nonmax_suppress", "hog_cells", "lloyd_1d"):
            setattr(kernels, attr, getattr(mods[n], attr))
        embed_image(image, cfg)
        pipeline[n] = best_of(lambda: embed_image(image, cfg), args.repeat)
    ratio = f"{pipeline['python'] / pipeline['cython']:>10.1f}x" if "cython" in pipeline else ""
    print(f"{'embed_image':<18}" + "".join(f"{1e3 * pipeline[n]:>10.2f}ms" for n in names) + ratio)


if __name__ == "__main__":
    main()
