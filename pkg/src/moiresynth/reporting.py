"""Summaries of a synthesis manifest."""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("index", "seed_stream", "clean_path", "pattern_path", "output_path", "blend", "metrics")
STAT_COLUMNS = ("metric", "count", "mean", "min", "p5", "p50", "p95", "max")


@dataclass
class ManifestReadResult:
    records: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (line number, message)


def _decode(v):
    if v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def read_manifest(path):
    """Parse a JSON-lines manifest, collecting (line, message) for bad lines."""
    result = ManifestReadResult()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                result.errors.append((lineno, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(rec, dict):
                result.errors.append((lineno, "record is not an object"))
                continue
            missing = [k for k in REQUIRED_KEYS if k not in rec]
            if missing:
                result.errors.append((lineno, f"missing keys {missing}"))
                continue
            rec["metrics"] = {k: _decode(v) for k, v in rec["metrics"].items()}
            result.records.append(rec)
    for lineno, msg in result.errors:
        logger.error("%s:%d: %s", path, lineno, msg)
    return result


def _flatten(rec):
    values = {}
    for k, v in rec["metrics"].items():
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            values[k] = float(v)
    for k in ("omega_m", "r_m", "r_g"):
        values[k] = float(rec["blend"][k])
    pattern = rec.get("pattern") or {}
    for k in ("sharpness", "colorfulness"):
        if pattern.get(k) is not None:
            values[f"pattern_{k}"] = float(pattern[k])
    return values


def summarize(records):
    """Per-quantity count, mean, min, 5/50/95th percentiles and max."""
    columns = {}
    for rec in records:
        for k, v in _flatten(rec).items():
            columns.setdefault(k, []).append(v)
    summary = {}
    for name in sorted(columns):
        arr = np.asarray(columns[name])
        finite = arr[np.isfinite(arr)]
        pct = np.percentile(finite, [5, 50, 95]) if finite.size else [math.nan] * 3
        summary[name] = {
            "count": int(arr.size),
            "mean": float(arr.mean()),
            "min": float(arr.min()),
            "p5": float(pct[0]),
            "p50": float(pct[1]),
            "p95": float(pct[2]),
            "max": float(arr.max()),
        }
    return summary


def report(manifest_path, out_dir, bins=10):
    """Write ``summary.csv``, ``param_hist.csv`` and ``scatter.csv``.

    Returns
    -------
    summary : dict
    errors : list of (line number, message)
    """
    parsed = read_manifest(manifest_path)
    if not parsed.records:
        logger.warning("manifest %s has no valid records", manifest_path)
    summary = summarize(parsed.records)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STAT_COLUMNS)
        for name, stats in summary.items():
            writer.writerow([name] + [repr(stats[c]) for c in STAT_COLUMNS[1:]])

    with open(out / "param_hist.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["param", "bin_lo", "bin_hi", "count"])
        for name in ("omega_m", "r_g", "r_m"):
            values = [float(r["blend"][name]) for r in parsed.records]
            if not values:
                continue
            counts, edges = np.histogram(values, bins=bins)
            for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
                writer.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])

    with open(out / "scatter.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "pattern_path", "sharpness", "colorfulness"])
        for r in parsed.records:
            p = r.get("pattern") or {}
            writer.writerow([r["index"], r["pattern_path"], p.get("sharpness"), p.get("colorfulness")])

    return summary, parsed.errors
