"""Loading of simulator export files (CSV sweeps, JSON curves).

plotkit consumes only the exported files; it never imports the simulator.
Every loader checks the schema version and returns plain dicts/arrays plus
a short content hash used for figure provenance.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Raised when an input file is missing or declares the wrong schema."""


def file_hash(path: str, length: int = 12) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()[:length]


def load_json(path: str) -> tuple[dict, str]:
    if not os.path.exists(path):
        raise SchemaError(f"input file does not exist: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema_version {data.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )
    return data, file_hash(path)


def load_sweep_csv(path: str) -> tuple[list[dict], dict, str]:
    if not os.path.exists(path):
        raise SchemaError(f"input file does not exist: {path}")
    meta: dict = {}
    records: list[dict] = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rec = {}
            for col, raw in zip(header, line.split(",")):
                if raw == "":
                    rec[col] = None
                elif col in ("row", "col"):
                    rec[col] = int(raw)
                elif col in ("phase", "lindblad_label", "error"):
                    rec[col] = raw
                else:
                    rec[col] = float(raw)
            records.append(rec)
    if "schema_version" not in meta or int(meta["schema_version"]) != SCHEMA_VERSION:
        raise SchemaError(f"{path}: missing or mismatched schema_version")
    if "system" in meta:
        meta["system"] = json.loads(meta["system"])
    return records, meta, file_hash(path)


def sweep_grid(records: list[dict]):
    """Arrange sweep records into (inv_kappa values, inv_gamma values, nbar grid)."""
    rows = sorted({r["row"] for r in records})
    cols = sorted({r["col"] for r in records})
    inv_kappa = np.full(len(rows), np.nan)
    inv_gamma = np.full(len(cols), np.nan)
    nbar = np.full((len(rows), len(cols)), np.nan)
    label = np.empty((len(rows), len(cols)), dtype=object)
    for r in records:
        i, j = rows.index(r["row"]), cols.index(r["col"])
        inv_kappa[i] = r["inv_kappa_c_ms"]
        inv_gamma[j] = r["inv_gamma_c_us"]
        nbar[i, j] = r["nbar"] if r["nbar"] is not None else np.nan
        label[i, j] = r.get("lindblad_label") or r.get("phase")
    return inv_kappa, inv_gamma, nbar, label
