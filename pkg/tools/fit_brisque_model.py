#!/usr/bin/env python3
"""Fit the bundled linear quality model on a synthetic corpus.

Procedure: generate procedural scenes, derive degraded variants with known
severities, assign each variant a target on the 0 (pristine) .. 100 (bad)
scale proportional to the degradation strength, then ridge-regress the
standardized 36-dim natural-scene-statistics features onto the targets.

Absolute scores are not meaningful — the search only needs ordering
fidelity (cleaner image => lower score). Held-out ordering checks run at
the end and the script refuses to write a model that fails them.

Usage: python tools/fit_brisque_model.py [--out src/evoimage/data/brisque_model.json]
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from evoimage import brisque_features, degrade, synthetic_image, to_luma  # noqa: E402
from evoimage._filters import quantize_u8  # noqa: E402
from evoimage.image import Image  # noqa: E402

TRAIN_SEEDS = range(1000, 1040)
HELDOUT_SEEDS = range(2000, 2010)
RIDGE_LAMBDA = 4.0

# (kind, strength) -> quality target; clean scenes sit near 10.
VARIANTS = [
    (None, 0.0, 10.0),
    ("noise", 0.02, 25.0),
    ("noise", 0.05, 38.0),
    ("noise", 0.10, 55.0),
    ("noise", 0.20, 72.0),
    ("blur", 0.75, 30.0),
    ("blur", 1.50, 50.0),
    ("blur", 3.00, 72.0),
    ("fog", 0.20, 30.0),
    ("fog", 0.40, 45.0),
    ("fog", 0.60, 62.0),
]


def variant_image(img: Image, kind, strength, seed) -> Image:
    if kind is not None:
        img = degrade(img, kind, strength, seed=seed)
    # mirror the scorer: features are extracted from the 8-bit artifact
    return Image(quantize_u8(img.data) / 255.0)


def collect(seeds):
    feats, targets, tags = [], [], []
    for seed in seeds:
        img = synthetic_image(seed, (128, 128))
        for kind, strength, target in VARIANTS:
            v = variant_image(img, kind, strength, seed=seed * 31 + 7)
            feats.append(brisque_features(to_luma(v)))
            targets.append(target)
            tags.append((seed, kind, strength))
    return np.array(feats), np.array(targets), tags


def fit(feats, targets):
    means = feats.mean(axis=0)
    scales = feats.std(axis=0)
    scales = np.maximum(scales, 1e-6)
    z = (feats - means) / scales
    n, d = z.shape
    gram = z.T @ z + RIDGE_LAMBDA * np.eye(d)
    weights = np.linalg.solve(gram, z.T @ (targets - targets.mean()))
    bias = float(targets.mean())
    return means, scales, weights, bias


def score(feats, means, scales, weights, bias):
    return np.clip(bias + ((feats - means) / scales) @ weights, 0.0, 100.0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(
            Path(__file__).resolve().parent.parent
            / "src/evoimage/data/brisque_model.json"
        ),
    )
    args = parser.parse_args()

    print(f"collecting features for {len(TRAIN_SEEDS)} scenes x {len(VARIANTS)} variants ...")
    feats, targets, _ = collect(TRAIN_SEEDS)
    means, scales, weights, bias = fit(feats, targets)

    train_pred = score(feats, means, scales, weights, bias)
    rmse = float(np.sqrt(np.mean((train_pred - targets) ** 2)))
    print(f"train RMSE: {rmse:.2f}")

    print("held-out ordering checks ...")
    failures = 0
    for seed in HELDOUT_SEEDS:
        img = synthetic_image(seed, (128, 128))
        clean = score(
            brisque_features(to_luma(img))[None, :], means, scales, weights, bias
        )[0]
        for kind, strength in [("noise", 0.1), ("blur", 3.0), ("fog", 0.4)]:
            bad = variant_image(img, kind, strength, seed=seed + 5)
            worse = score(
                brisque_features(to_luma(bad))[None, :], means, scales, weights, bias
            )[0]
            ok = worse > clean
            failures += not ok
            print(f"  seed {seed} {kind:5s}: clean {clean:6.2f}  degraded {worse:6.2f}  {'ok' if ok else 'FAIL'}")
    if failures:
        print(f"{failures} ordering checks failed; model not written")
        return 1

    model = {
        "means": [float(v) for v in means],
        "scales": [float(v) for v in scales],
        "weights": [float(v) for v in weights],
        "bias": bias,
    }
    Path(args.out).write_text(json.dumps(model, indent=1) + "\n")
    print(f"model written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
