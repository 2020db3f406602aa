"""Export small multiclass datasets from scikit-learn to the CSV layout the
harness reads: 1-based label first, standardized features after, no header."""

import sys
from pathlib import Path

import numpy as np
from sklearn import datasets

LOADERS = {
    "iris": datasets.load_iris,
    "wine": datasets.load_wine,
    "breast_cancer": datasets.load_breast_cancer,
    "digits": datasets.load_digits,
}


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, load in LOADERS.items():
        bunch = load()
        x = np.asarray(bunch.data, dtype=float)
        sd = x.std(axis=0)
        sd[sd == 0] = 1.0
        x = (x - x.mean(axis=0)) / sd
        y = np.asarray(bunch.target, dtype=int) + 1
        with open(out / f"{name}.csv", "w") as fh:
            for label, row in zip(y, x):
                fh.write(",".join([str(label)] + [f"{v:.6g}" for v in row]) + "\n")
        print(f"{name}: n={len(y)} K={y.max()} d={x.shape[1]}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
