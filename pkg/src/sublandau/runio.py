"""CSV and run-manifest output.

Numbers are written with 17 significant digits so the CSV round-trips
float64 exactly and byte-level checksums are meaningful. Each CSV gets a
JSON manifest written next to it recording the seed, the command, the
parameter map, library versions and a sha256 per output file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

__all__ = ["format_value", "write_csv", "sha256_file", "write_manifest", "manifest_path"]


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def manifest_path(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".manifest.json")


def _package_version() -> str:
    try:
        return metadata.version("sublandau")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_manifest(
    csv_path: Path,
    *,
    seed: int,
    command: str,
    parameters: dict,
    outputs: list[Path],
) -> Path:
    """Write the JSON manifest next to csv_path, covering every output
    file's checksum. Identical (seed, parameters) produce bit-identical
    CSVs; the manifest itself carries a timestamp."""
    doc = {
        "master_seed": int(seed),
        "command": command,
        "parameters": parameters,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "sublandau": _package_version(),
        },
    }
    out = manifest_path(csv_path)
    with out.open("w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
