"""
Writers for sweep datasets and their metadata, plus the console summary
printed at the end of a run.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional

import numpy as np
import pandas as pd

from fermi_thermometry import __version__
from fermi_thermometry.config import RunConfig

logger = logging.getLogger(__name__)

STATUS_OK = "ok"


def header_lines(config: RunConfig) -> list:
    """'#'-prefixed description of the run; contains nothing run-dependent."""
    lines = [f"# fermi-thermometry {__version__}", f"# command: {config.command}"]
    for key, value in sorted(config.to_dict().items()):
        if key in ("command", "verbose", "jobs", "out"):
            continue
        lines.append(f"# {key}: {value}")
    return lines


def write_dataset(df: pd.DataFrame, config: RunConfig, path: Optional[Path] = None) -> Path:
    """
    Write one row per grid cell.

    CSV files start with a '#' header block followed by the column-name row;
    JSON files hold an array of records.
    """
    path = Path(path or config.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    if config.format == "json":
        path.write_text(df.to_json(orient="records", indent=2, double_precision=15) + "\n")
    else:
        with path.open("w", newline="") as handle:
            handle.write("\n".join(header_lines(config)) + "\n")
            df.to_csv(handle, index=False)
    logger.debug("wrote %d rows to %s", len(df), path)
    return path


def metadata_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def build_flags(df: pd.DataFrame) -> Dict[str, object]:
    """Boundary-optimum and convergence flags found in a dataset."""
    flags: Dict[str, object] = {}
    if "status" in df.columns:
        counts = df["status"].value_counts()
        flags["status_counts"] = {str(k): int(v) for k, v in sorted(counts.items())}
        flags["all_ok"] = bool((df["status"] == STATUS_OK).all())
    if "boundary_flag" in df.columns:
        bounded = df["boundary_flag"].fillna("").astype(str)
        flags["boundary_optima"] = int((bounded != "").sum())
    if "passed" in df.columns:
        flags["checks_failed"] = int((~df["passed"].astype(bool)).sum())
    return flags


def write_metadata(config: RunConfig, df: pd.DataFrame, wall_time: float,
                   extra: Optional[Mapping[str, object]] = None,
                   path: Optional[Path] = None) -> Path:
    """Sidecar `<out>.meta.json` with the resolved config, tolerances, version and flags."""
    path = metadata_path(path or config.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "version": __version__,
        "config": {k: _jsonable(v) for k, v in config.to_dict().items()},
        "tolerances": {
            "rel_tol": config.rel_tol,
            "abs_tol": config.abs_tol,
            "max_panels": config.quad.max_panels,
            "fermi_cutoff": config.quad.fermi_cutoff,
        },
        "rows": int(len(df)),
        "wall_time_s": round(float(wall_time), 6),
        "flags": build_flags(df),
    }
    if extra:
        meta["extra"] = {k: _jsonable(v) for k, v in extra.items()}
    with path.open("w") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True, default=_jsonable)
        handle.write("\n")
    return path


def print_summary(config: RunConfig, df: pd.DataFrame, data_path: Path, wall_time: float) -> None:
    """Print a short report of a finished run."""
    flags = build_flags(df)

    print("\n" + "=" * 60)
    print(f"RUN SUMMARY: {config.command}")
    print("=" * 60)

    print(f"\nRows written: {len(df)}")
    print(f"  Data: {data_path}")
    print(f"  Metadata: {metadata_path(data_path)}")
    print(f"  Wall time: {wall_time:.2f} s")

    if "status_counts" in flags:
        print("\nCell status:")
        for status, count in flags["status_counts"].items():
            mark = "✓" if status == STATUS_OK else "✗"
            print(f"  {mark} {status}: {count}")

    if flags.get("boundary_optima"):
        print(f"\nOptima at a search boundary: {flags['boundary_optima']}")

    if "passed" in df.columns:
        print("\nChecks:")
        for _, row in df.iterrows():
            mark = "✓" if row["passed"] else "✗"
            print(f"  {mark} {row['check']}: {row['value']:.3e} (tol {row['tolerance']:.1e})")

    print("=" * 60 + "\n")
