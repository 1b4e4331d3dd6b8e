"""Export of sweep records, distributions, curves and traces.

Tabular records go to CSV with '#'-prefixed metadata lines (schema version,
source hash-able provenance, the fully resolved system parameters as JSON);
everything else goes to structured JSON with a schema_version field.  Floats
are written with Python's shortest round-trip representation so files
re-read bit-identically.
"""

from __future__ import annotations

import json
import os

import numpy as np

SCHEMA_VERSION = 1

# wall-clock timing stays in the checkpoint records; the CSV holds only
# deterministic columns so exports are byte-identical across runs
SWEEP_COLUMNS = (
    "inv_kappa_c_ms",
    "inv_gamma_c_us",
    "nbar",
    "sz_h",
    "phase",
    "residual",
    "tail_mass",
    "row",
    "col",
    "gamma_c_per_ms",
    "g_c_khz",
    "lindblad_label",
    "nbar_meanfield",
    "nbar_ratio",
    "growth_rate_per_ms",
    "error",
)


class ExportError(IOError):
    """Raised when an export target cannot be written or re-read."""


def _ensure_dir(path: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(payload: dict, path: str, spec_dict: dict | None = None):
    body = {"schema_version": SCHEMA_VERSION}
    if spec_dict is not None:
        body["system"] = _jsonify(spec_dict)
    body.update(_jsonify(payload))
    _ensure_dir(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=1)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ExportError(f"{path}: schema_version {data.get('schema_version')!r} != {SCHEMA_VERSION}")
    return data


def write_sweep_csv(records: list[dict], path: str, spec_dict: dict):
    """Deterministic CSV: records sorted by (row, col), metadata in comments."""
    _ensure_dir(path)
    ordered = sorted(records, key=lambda r: (r["row"], r["col"]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write("# system: " + json.dumps(_jsonify(spec_dict), sort_keys=True) + "\n")
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for rec in ordered:
            fh.write(",".join(_fmt(rec.get(col)) for col in SWEEP_COLUMNS) + "\n")


def read_sweep_csv(path: str) -> tuple[list[dict], dict]:
    """Read a sweep CSV back into typed records plus its metadata."""
    meta: dict = {}
    records: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        header: list[str] | None = None
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            values = line.split(",")
            rec: dict = {}
            for col, raw in zip(header, values):
                if raw == "":
                    rec[col] = None
                elif col in ("row", "col"):
                    rec[col] = int(raw)
                elif col in ("phase", "lindblad_label", "error"):
                    rec[col] = raw
                else:
                    rec[col] = float(raw)
            records.append(rec)
    if "schema_version" in meta:
        if int(meta["schema_version"]) != SCHEMA_VERSION:
            raise ExportError(f"{path}: schema_version mismatch")
    if "system" in meta:
        meta["system"] = json.loads(meta["system"])
    return records, meta
