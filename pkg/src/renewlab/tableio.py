"""Flat-file emission: decimal CSV tables with JSON run metadata.

Every writer is deterministic: the same arrays and the same metadata
produce byte-identical files (sorted JSON keys, fixed float formatting,
newline-terminated). Floats are written with 17 significant digits,
which round-trips binary64 exactly, so a reloaded table compares equal
with ==, not approx.
"""

from __future__ import annotations

import json
import pathlib
import subprocess
from typing import Optional, Union

import numpy as np

from . import __version__
from .renewal import ConvolutionTable

__all__ = [
    "fmt17",
    "build_tag",
    "write_metadata",
    "write_profile",
    "read_profile",
    "write_renewal_table",
    "read_renewal_table",
]

PathLike = Union[str, pathlib.Path]


def fmt17(x: float) -> str:
    """Decimal form of a float with 17 significant digits (lossless)."""
    return format(float(x), ".17g")


def build_tag() -> str:
    """git describe of the working tree, or the package version.

    Identifies the build that produced a data file. Falls back to the
    installed version string when the tree is not a git checkout (for
    example when running from an installed wheel).
    """
    root = pathlib.Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=root,
            capture_output=True,
            text=True,
            timeout=10.0,
        )
    except (OSError, subprocess.TimeoutExpired):
        return f"renewlab-{__version__}"
    if out.returncode != 0:
        return f"renewlab-{__version__}"
    return out.stdout.strip()


def write_metadata(path: PathLike, metadata: dict) -> pathlib.Path:
    """Write a metadata dict as JSON with sorted keys and a final newline."""
    path = pathlib.Path(path)
    path.write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n")
    return path


def write_profile(path: PathLike, x, value,
                  metadata: Optional[dict] = None) -> pathlib.Path:
    """Two-column (x, value) CSV plus an optional .json metadata sidecar."""
    path = pathlib.Path(path)
    x = np.asarray(x, dtype=float)
    value = np.asarray(value, dtype=float)
    if x.shape != value.shape or x.ndim != 1:
        raise ValueError("x and value must be 1-d arrays of equal length")
    lines = ["x,value"]
    lines.extend(f"{fmt17(a)},{fmt17(b)}" for a, b in zip(x, value))
    path.write_text("\n".join(lines) + "\n")
    if metadata is not None:
        write_metadata(path.with_suffix(".json"), metadata)
    return path


def read_profile(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Reload a (x, value) CSV written by ``write_profile``."""
    rows = pathlib.Path(path).read_text().strip().splitlines()
    if rows[0] != "x,value":
        raise ValueError(f"unexpected header {rows[0]!r}")
    parsed = [r.split(",") for r in rows[1:]]
    x = np.array([float(a) for a, _ in parsed])
    value = np.array([float(b) for _, b in parsed])
    return x, value


def write_renewal_table(path: PathLike, table: ConvolutionTable) -> pathlib.Path:
    """Sparse (k, m, prob) CSV of a convolution table, with JSON sidecar.

    Only nonzero cells are written (off-lattice slots are exact zeros and
    would quadruple the file for period 2). The sidecar carries the law
    parameters, the table dimensions, and the per-row overflow masses, so
    probs[k].sum() + overflow[k] == 1 stays checkable from the files alone.
    """
    path = pathlib.Path(path)
    lines = ["k,m,prob"]
    ks, ms = np.nonzero(table.probs)
    for k, m in zip(ks, ms):
        lines.append(f"{k},{m},{fmt17(table.probs[k, m])}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = {
        "K": table.K,
        "M": table.M,
        "gamma": table.law.gamma,
        "overflow": [float(v) for v in table.overflow],
        "p": table.law.p,
        "xi": table.law.xi,
    }
    write_metadata(path.with_suffix(".json"), sidecar)
    return path


def read_renewal_table(path: PathLike) -> tuple[np.ndarray, np.ndarray, dict]:
    """Reload (probs, overflow, sidecar) written by ``write_renewal_table``."""
    path = pathlib.Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    probs = np.zeros((sidecar["K"] + 1, sidecar["M"] + 1))
    rows = path.read_text().strip().splitlines()
    if rows[0] != "k,m,prob":
        raise ValueError(f"unexpected header {rows[0]!r}")
    for row in rows[1:]:
        k, m, prob = row.split(",")
        probs[int(k), int(m)] = float(prob)
    overflow = np.array(sidecar["overflow"])
    return probs, overflow, sidecar
