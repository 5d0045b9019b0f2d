"""JSON matrix encoding and deterministic CSV writing."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch


def fmt(x) -> str:
    """Locale-free float text with 17 significant digits."""
    return format(float(x), ".17g")


def encode_matrix(m) -> list:
    """Row-major list of rows, each entry an ``[re, im]`` pair."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(
            "matrix must be a square list of rows of [re, im] pairs"
        )
    return a[..., 0] + 1j * a[..., 1]


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def decode_vector(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise DimensionMismatch("vector must be a list of [re, im] pairs")
    return a[:, 0] + 1j * a[:, 1]


def write_csv(path, header, rows, trailer=None) -> Path:
    """Write rows with '\\n' line endings; floats go through :func:`fmt`."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    if trailer is not None:
        buf.write(trailer + "\n")
    path = Path(path)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path
