#!/usr/bin/env python3
"""Fetch and convert the UCI datasets used by the end-to-end acceptance tests.

Produces, under data/ (or the directory given as the first argument):
    ionosphere_features.csv  351 rows x 34 columns
    ionosphere_labels.csv    351 rows, class ids (good=0, bad=1)
    mfeat_fou.csv            2000 rows x 76 columns (Fourier coefficients)
    mfeat_kar.csv            2000 rows x 64 columns (Karhunen-Loeve coefficients)
    mfeat_labels.csv         2000 rows, digit class ids (row i -> i // 200)

Needs network access to archive.ics.uci.edu.
"""

import io
import os
import sys
import urllib.request
import zipfile

LEGACY = "https://archive.ics.uci.edu/ml/machine-learning-databases"
STATIC = "https://archive.ics.uci.edu/static/public"


def _get(url: str, timeout: float = 60.0) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def _fetch_text(candidates: list[str], zip_member: str | None = None) -> str:
    last_err = None
    for url in candidates:
        try:
            raw = _get(url)
        except Exception as exc:  # try the next mirror
            last_err = exc
            continue
        if url.endswith(".zip"):
            with zipfile.ZipFile(io.BytesIO(raw)) as zf:
                names = [n for n in zf.namelist() if n.endswith(zip_member)]
                if not names:
                    last_err = FileNotFoundError(f"{zip_member} not in {url}")
                    continue
                return zf.read(names[0]).decode()
        return raw.decode()
    raise SystemExit(f"could not fetch {zip_member or candidates}: {last_err}")


def fetch_ionosphere(out_dir: str) -> None:
    text = _fetch_text(
        [f"{LEGACY}/ionosphere/ionosphere.data", f"{STATIC}/52/ionosphere.zip"],
        zip_member="ionosphere.data",
    )
    features, labels = [], []
    for line in text.strip().splitlines():
        parts = line.strip().split(",")
        if len(parts) != 35:
            continue
        features.append(",".join(parts[:34]))
        labels.append("0" if parts[34] == "g" else "1")
    if len(features) != 351:
        raise SystemExit(f"expected 351 ionosphere rows, got {len(features)}")
    with open(os.path.join(out_dir, "ionosphere_features.csv"), "w") as fh:
        fh.write("\n".join(features) + "\n")
    with open(os.path.join(out_dir, "ionosphere_labels.csv"), "w") as fh:
        fh.write("\n".join(labels) + "\n")


def fetch_mfeat(out_dir: str) -> None:
    for member, out_name, width in (
        ("mfeat-fou", "mfeat_fou.csv", 76),
        ("mfeat-kar", "mfeat_kar.csv", 64),
    ):
        text = _fetch_text(
            [f"{LEGACY}/mfeat/{member}", f"{STATIC}/72/multiple+features.zip"],
            zip_member=member,
        )
        rows = []
        for line in text.strip().splitlines():
            vals = line.split()
            if len(vals) != width:
                raise SystemExit(f"{member}: row with {len(vals)} values, expected {width}")
            rows.append(",".join(vals))
        if len(rows) != 2000:
            raise SystemExit(f"{member}: expected 2000 rows, got {len(rows)}")
        with open(os.path.join(out_dir, out_name), "w") as fh:
            fh.write("\n".join(rows) + "\n")
    with open(os.path.join(out_dir, "mfeat_labels.csv"), "w") as fh:
        fh.write("\n".join(str(i // 200) for i in range(2000)) + "\n")


def main() -> None:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data"
    )
    os.makedirs(out_dir, exist_ok=True)
    fetch_ionosphere(out_dir)
    fetch_mfeat(out_dir)
    print(f"done; files written to {out_dir}")


if __name__ == "__main__":
    main()
