"""Report bundle: one artifact file per figure/table plus a run manifest.

Everything is written with sorted keys, fixed float formatting and no
timestamps, so a bundle is a pure function of (inputs, config, seed).
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .hazard import HazardSeries
from .survival import DAYS_PER_YEAR, SurvivalCurve


def _round(x, digits=10):
    if x is None:
        return None
    if isinstance(x, float):
        if np.isnan(x):
            return None
        return round(float(x), digits)
    return x


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False,
                  default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        val = float(obj)
        return None if np.isnan(val) else val
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_km_curve(path, curve: SurvivalCurve) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_years", "survival", "at_risk", "events",
                         "ci_lo", "ci_hi"])
        for row in curve.to_rows(time_scale=DAYS_PER_YEAR):
            writer.writerow([
                f"{row['time_years']:.6f}", f"{row['survival']:.8f}",
                row["at_risk"], row["events"],
                "" if row["ci_lo"] == "" or np.isnan(row["ci_lo"])
                else f"{row['ci_lo']:.8f}",
                "" if row["ci_hi"] == "" or np.isnan(row["ci_hi"])
                else f"{row['ci_hi']:.8f}",
            ])


def write_hazard_table(path, yearly: HazardSeries, trend: np.ndarray,
                       peaks: list[int]) -> None:
    peak_set = set(peaks)
    low_conf = yearly.low_confidence()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "rate", "at_risk", "events", "trend",
                         "is_peak", "low_confidence"])
        for i, year in enumerate(yearly.index):
            writer.writerow([
                int(year), f"{yearly.rate[i]:.8f}", int(yearly.at_risk[i]),
                int(yearly.events[i]), f"{trend[i]:.8f}",
                str(int(year) in peak_set).lower(),
                str(bool(low_conf[i])).lower(),
            ])


def write_group_table(path, frame: pd.DataFrame) -> None:
    out = frame.copy()
    for col in out.columns:
        if out[col].dtype.kind == "f":
            out[col] = out[col].map(lambda v: f"{v:.8f}" if pd.notna(v) else "")
    out.to_csv(path, index=False)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: Path, config: dict, input_paths: dict,
                   artifacts: list[str]) -> None:
    config_blob = json.dumps(config, sort_keys=True, default=str)
    manifest = {
        "package_version": __version__,
        "config": json.loads(config_blob),
        "config_sha256": hashlib.sha256(config_blob.encode()).hexdigest(),
        "inputs": {name: sha256_file(p) for name, p in sorted(input_paths.items())},
        "artifacts": sorted(artifacts),
    }
    write_json(out_dir / "manifest.json", manifest)
