#!/usr/bin/env python3
"""Write the three binary iris subsets used by the benchmark harness.

The source is the copy of Fisher's iris table bundled with scikit-learn.
Each output file has a header row with the four feature names and a
`label` column: the first class of the pair is written as 0, the second
as 1 (the loader maps 0 -> +1 and 1 -> -1).

Other datasets (vertebral column, seeds, ecoli, glass, breast tissue,
breast cancer, accent recognition, leaf) come from the UCI repository and
need the same treatment: keep two classes, drop identifier columns, write
the numeric features followed by a 0/1 `label` column.
"""
import argparse
import csv
import os

import sklearn

FEATURES = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
PAIRS = {
    "iris_setosa_versicolor": (0, 1),
    "iris_setosa_virginica": (0, 2),
    "iris_versicolor_virginica": (1, 2),
}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = parser.parse_args()

    src = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data", "iris.csv")
    with open(src) as f:
        rows = list(csv.reader(f))[1:]

    os.makedirs(args.out, exist_ok=True)
    for name, (first, second) in PAIRS.items():
        with open(os.path.join(args.out, name + ".csv"), "w", newline="") as f:
            out = csv.writer(f, lineterminator="\n")
            out.writerow(FEATURES + ["label"])
            for row in rows:
                cls = int(row[4])
                if cls in (first, second):
                    out.writerow(row[:4] + [0 if cls == first else 1])


if __name__ == "__main__":
    main()
