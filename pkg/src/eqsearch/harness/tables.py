"""Flat result tables and the run manifest.

Floats are written with ``repr`` so that a table round-trips exactly and two
runs with the same inputs produce identical bytes.
"""
import csv
import json
from pathlib import Path

from .. import __version__
from ..regret import BACKEND


def build_id():
    return f"eqsearch-{__version__}+{BACKEND}"


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_table(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_table(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def write_manifest(out_dir, kind, config, seed, tables):
    """``manifest.json`` recording what produced the tables in ``out_dir``."""
    return write_json(Path(out_dir) / "manifest.json", {
        "kind": kind,
        "config": config,
        "seed": seed,
        "build": build_id(),
        "tables": sorted(tables),
    })
