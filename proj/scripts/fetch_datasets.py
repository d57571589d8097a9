#!/usr/bin/env python3
"""Prepare the benchmark CSV files used by the acceptance suite and the README examples.

Writes into data/ (next to this script's parent directory):
  wine.csv           UCI Wine, 178 x 13 numeric features (bundled with scikit-learn)
  breast_cancer.csv  UCI Breast Cancer Wisconsin (Diagnostic), 569 x 30 (bundled with scikit-learn)
  glass.csv          UCI Glass Identification, 214 x 10 (downloaded from the UCI archive)

Glass is not redistributed with scikit-learn, so it is fetched from
archive.ics.uci.edu. Following the common convention for this dataset the Id
column is dropped and the glass-type column is kept as a numeric feature,
giving 10 columns. If the download fails (no network), the script reports it
and still writes the other files.
"""
import csv
import io
import os
import sys
import urllib.request

OUT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")

GLASS_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/glass/glass.data"
GLASS_COLUMNS = ["RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe", "Type"]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
    print(f"wrote {path} ({len(rows)} rows x {len(header)} cols)")


def sanitize(name):
    return name.strip().replace(",", "_").replace(" ", "_")


def fetch_sklearn():
    from sklearn.datasets import load_breast_cancer, load_wine

    wine = load_wine()
    write_csv(os.path.join(OUT_DIR, "wine.csv"),
              [sanitize(n) for n in wine.feature_names], wine.data)

    bc = load_breast_cancer()
    write_csv(os.path.join(OUT_DIR, "breast_cancer.csv"),
              [sanitize(n) for n in bc.feature_names], bc.data)


def fetch_glass():
    with urllib.request.urlopen(GLASS_URL, timeout=30) as resp:
        text = resp.read().decode("ascii")
    rows = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 11:
            raise ValueError(f"unexpected glass.data row: {line!r}")
        rows.append([float(v) for v in cells[1:]])  # drop the Id column
    if len(rows) != 214:
        raise ValueError(f"expected 214 glass rows, got {len(rows)}")
    write_csv(os.path.join(OUT_DIR, "glass.csv"), GLASS_COLUMNS, rows)


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    fetch_sklearn()
    try:
        fetch_glass()
    except Exception as exc:  # network may be unavailable
        print(f"WARNING: could not fetch glass.csv from UCI ({exc}).", file=sys.stderr)
        print("         Re-run this script on a machine with network access.", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
