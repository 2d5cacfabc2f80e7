#!/usr/bin/env python3
"""Materialise the benchmark datasets as headered CSV files under data/.

Every dataset is first requested from the UCI repository. When that fails
(no network, host unreachable) a copy bundled in a PyPI package is used where
one exists:

  wine, bcd   scikit-learn (installed)
  bco         rdatasets (MASS::biopsy)
  mm          keel-ds (KEEL copy; rows with missing values already removed)
  spth        imbalanced-databases (SPECTF train + test)

Blood Transfusion, Forest Type, HCV, Indian Liver, Somerville Happiness and
Urban Land Cover have no bundled copy; they are skipped with a message when
UCI is unreachable.

Output layout: one header row, feature columns in source order, the label in
a final column named "class". Missing cells are written as "?".
"""

from __future__ import annotations

import argparse
import csv
import glob
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

WHEELS = {
    "rdatasets": "rdatasets==0.2.10",
    "keel": "keel-ds==0.2.5",
    "imbdb": "imbalanced-databases==0.1.1",
}


def fetch_url(url: str, timeout: float) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def clean(cell: str) -> str:
    cell = cell.strip()
    return "?" if cell in ("", "?", "NA", "nan") else cell


def split_rows(text: str, sep: str = ",") -> list[list[str]]:
    return [[clean(c) for c in line.split(sep)] for line in text.splitlines() if line.strip()]


def label_last(rows: list[list[str]], label_index: int) -> list[list[str]]:
    return [r[:label_index] + r[label_index + 1:] + [r[label_index]] for r in rows]


class Wheels:
    """Lazily downloaded PyPI wheels holding offline copies."""

    def __init__(self, directory: str | None) -> None:
        self.directory = directory or tempfile.mkdtemp(prefix="plknn-wheels-")

    def open(self, key: str) -> zipfile.ZipFile:
        spec = WHEELS[key]
        stem = spec.split("==")[0].replace("-", "_")
        found = glob.glob(os.path.join(self.directory, f"{stem}-*.whl"))
        if not found:
            subprocess.run(
                [sys.executable, "-m", "pip", "download", "--no-deps", "--timeout", "600",
                 "-d", self.directory, spec],
                check=True,
            )
            found = glob.glob(os.path.join(self.directory, f"{stem}-*.whl"))
        return zipfile.ZipFile(found[0])


# ---------------------------------------------------------------------------
# UCI readers


def uci_wine(t):
    rows = split_rows(fetch_url(f"{UCI}/wine/wine.data", t).decode())
    return [f"f{i}" for i in range(1, 14)] + ["class"], label_last(rows, 0)


def uci_bcd(t):
    rows = split_rows(fetch_url(f"{UCI}/breast-cancer-wisconsin/wdbc.data", t).decode())
    return ["id"] + [f"f{i}" for i in range(1, 31)] + ["class"], label_last(rows, 1)


def uci_bco(t):
    url = f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data"
    rows = split_rows(fetch_url(url, t).decode())
    header = ["id", "clump", "size_uniformity", "shape_uniformity", "adhesion", "epithelial",
              "bare_nuclei", "chromatin", "nucleoli", "mitoses", "class"]
    return header, rows


def uci_mm(t):
    url = f"{UCI}/mammographic-masses/mammographic_masses.data"
    rows = split_rows(fetch_url(url, t).decode())
    return ["birads", "age", "shape", "margin", "density", "class"], rows


def uci_spth(t):
    rows = []
    for part in ("SPECTF.train", "SPECTF.test"):
        rows += split_rows(fetch_url(f"{UCI}/spect/{part}", t).decode())
    return [f"f{i}" for i in range(1, 45)] + ["class"], label_last(rows, 0)


def uci_bt(t):
    url = f"{UCI}/blood-transfusion/transfusion.data"
    rows = split_rows(fetch_url(url, t).decode())[1:]
    return ["recency", "frequency", "monetary", "time", "class"], rows


def uci_il(t):
    url = f"{UCI}/00225/Indian%20Liver%20Patient%20Dataset%20(ILPD).csv"
    rows = split_rows(fetch_url(url, t).decode())
    header = ["age", "gender", "tb", "db", "alkphos", "sgpt", "sgot", "tp", "alb", "ag_ratio",
              "class"]
    return header, rows


def uci_hcv(t):
    text = fetch_url(f"{UCI}/00571/hcvdat0.csv", t).decode()
    table = list(csv.reader(io.StringIO(text)))
    header = ["id"] + table[0][2:] + ["class"]
    rows = [[clean(c) for c in [r[0]] + r[2:] + [r[1]]] for r in table[1:] if r]
    return header, rows


def zipped_pair(url: str, t: float, members: tuple[str, ...]):
    archive = zipfile.ZipFile(io.BytesIO(fetch_url(url, t)))
    header, rows = None, []
    for member in members:
        name = next(n for n in archive.namelist() if n.lower().endswith(member))
        table = list(csv.reader(io.StringIO(archive.read(name).decode())))
        header = header or [h.strip() for h in table[0]]
        rows += [[clean(c) for c in r] for r in table[1:] if r]
    return header[1:] + ["class"], label_last(rows, 0)


def uci_ft(t):
    return zipped_pair(f"{UCI}/00333/ForestTypes.zip", t, ("training.csv", "testing.csv"))


def uci_ulc(t):
    # The 168-sample training file only, matching the published sample count.
    return zipped_pair(f"{UCI}/00295/Urban%20land%20cover.zip", t, ("training.csv",))


def uci_sh(t):
    raw = fetch_url(f"{UCI}/00479/SomervilleHappinessSurvey2015.txt", t)
    text = raw.decode("utf-16") if raw[:2] in (b"\xff\xfe", b"\xfe\xff") else raw.decode()
    rows = split_rows(text)[1:]
    return ["x1", "x2", "x3", "x4", "x5", "x6", "class"], label_last(rows, 0)


# ---------------------------------------------------------------------------
# Offline copies


def local_wine(_):
    from sklearn.datasets import load_wine

    d = load_wine()
    rows = [[repr(float(v)) for v in x] + [str(int(y) + 1)] for x, y in zip(d.data, d.target)]
    return [f"f{i}" for i in range(1, 14)] + ["class"], rows


def local_bcd(_):
    from sklearn.datasets import load_breast_cancer

    d = load_breast_cancer()
    rows = [[str(i + 1)] + [repr(float(v)) for v in x] + ["B" if y else "M"]
            for i, (x, y) in enumerate(zip(d.data, d.target))]
    return ["id"] + [f"f{i}" for i in range(1, 31)] + ["class"], rows


def local_bco(wheels: Wheels):
    import pandas as pd

    raw = wheels.open("rdatasets").read("rdatasets/_data/MASS/biopsy.pkl.compress")
    df = pd.read_pickle(io.BytesIO(raw), compression="xz")
    rows = []
    for _, rec in df.iterrows():
        values = [rec["ID"]] + [rec[f"V{i}"] for i in range(1, 10)]
        cells = ["?" if pd.isna(v) else str(int(v)) for v in values]
        rows.append(cells + ["2" if rec["class"] == "benign" else "4"])
    header = ["id", "clump", "size_uniformity", "shape_uniformity", "adhesion", "epithelial",
              "bare_nuclei", "chromatin", "nucleoli", "mitoses", "class"]
    return header, rows


def local_mm(wheels: Wheels):
    text = wheels.open("keel").read("keel_ds/data/balanced/raw/mammographic.dat").decode()
    return ["birads", "age", "shape", "margin", "density", "class"], split_rows(text)


def local_spth(wheels: Wheels):
    z = wheels.open("imbdb")
    rows = []
    for part in ("SPECTF.train.txt", "SPECTF.test.txt"):
        rows += split_rows(z.read(f"imbalanced_databases/data/spect_f/{part}").decode())
    return [f"f{i}" for i in range(1, 45)] + ["class"], label_last(rows, 0)


DATASETS = {
    "bt": (uci_bt, None),
    "bcd": (uci_bcd, local_bcd),
    "bco": (uci_bco, local_bco),
    "ft": (uci_ft, None),
    "hcv": (uci_hcv, None),
    "il": (uci_il, None),
    "mm": (uci_mm, local_mm),
    "sh": (uci_sh, None),
    "spth": (uci_spth, local_spth),
    "ulc": (uci_ulc, None),
    "wine": (uci_wine, local_wine),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    parser.add_argument("--wheels", help="directory with (or for) the fallback wheels")
    parser.add_argument("--timeout", type=float, default=20.0)
    parser.add_argument("--offline", action="store_true", help="skip the UCI download attempts")
    parser.add_argument("names", nargs="*", default=sorted(DATASETS))
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    wheels = Wheels(args.wheels)
    missing = []
    for name in args.names:
        online, offline = DATASETS[name]
        result, source = None, None
        if not args.offline:
            try:
                result, source = online(args.timeout), "uci"
            except Exception as exc:  # network errors of every flavour
                print(f"{name}: UCI download failed ({exc.__class__.__name__})", file=sys.stderr)
        if result is None and offline is not None:
            result, source = offline(wheels), "bundled copy"
        if result is None:
            missing.append(name)
            print(f"{name}: unavailable", file=sys.stderr)
            continue
        header, rows = result
        write_csv(os.path.join(args.out, f"{name}.csv"), header, rows)
        print(f"{name}: {len(rows)} rows from {source}")
    return 1 if missing else 0


if __name__ == "__main__":
    sys.exit(main())
