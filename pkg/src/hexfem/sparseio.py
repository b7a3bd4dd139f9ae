"""Byte accounting for the two sparse formats, and Matrix Market files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assemble import LowerCscMatrix, TripletMatrix, triplet_to_csc
from .errors import MeshFormatError

__all__ = [
    "MemoryModel",
    "MEMORY_MODEL",
    "triplet_memory",
    "csc_memory",
    "memory_saving",
    "format_mb",
    "format_percent",
    "export_matrix_market",
    "import_matrix_market",
]


@dataclass(frozen=True)
class MemoryModel:
    """Fixed byte model: value + two 32-bit indices per triplet entry,
    value + 64-bit row index per compressed entry, 64-bit column pointers,
    decimal megabytes."""

    triplet_bytes_per_entry: int = 16
    csc_bytes_per_entry: int = 16
    csc_bytes_per_colptr: int = 8
    megabyte: int = 10**6


MEMORY_MODEL = MemoryModel()


def triplet_memory(nnz_triplet: int) -> float:
    """Megabytes used by nnz triplet entries."""
    if nnz_triplet < 0:
        raise ValueError("nnz must be non-negative")
    return nnz_triplet * MEMORY_MODEL.triplet_bytes_per_entry / MEMORY_MODEL.megabyte


def csc_memory(nnz_csc: int, dim: int) -> float:
    """Megabytes used by a compressed lower triangle of the given order."""
    if nnz_csc < 0 or dim < 0:
        raise ValueError("nnz and dim must be non-negative")
    model = MEMORY_MODEL
    return (nnz_csc * model.csc_bytes_per_entry + (dim + 1) * model.csc_bytes_per_colptr) / model.megabyte


def memory_saving(triplet_mb: float, csc_mb: float) -> float:
    """Fractional saving of compressed storage over triplet storage."""
    if not triplet_mb > 0:
        raise ValueError(f"triplet memory must be positive, got {triplet_mb!r}")
    return 1.0 - csc_mb / triplet_mb


def format_mb(mb: float) -> str:
    """Megabytes at the published rounding: two decimals below 10 MB, one above."""
    return f"{mb:.2f}" if mb < 10 else f"{mb:.1f}"


def format_percent(fraction: float) -> str:
    """A fraction as a percentage with one decimal, e.g. 0.568 -> '56.8%'."""
    return f"{fraction * 100:.1f}%"


def export_matrix_market(m: LowerCscMatrix, destination) -> None:
    """Write the lower triangle as a 1-based symmetric coordinate file.

    Entries appear in column-major order; values carry 17 significant digits
    so a re-import reproduces every double exactly.
    """
    out = ["%%MatrixMarket matrix coordinate real symmetric"]
    out.append(f"{m.dim} {m.dim} {m.nnz}")
    col_ptr = m.col_ptr
    row_idx = m.row_idx
    vals = m.vals
    for col in range(m.dim):
        for k in range(col_ptr[col], col_ptr[col + 1]):
            out.append(f"{row_idx[k] + 1} {col + 1} {vals[k]:.17g}")
    Path(destination).write_text("\n".join(out) + "\n")


def import_matrix_market(source) -> LowerCscMatrix:
    """Read a symmetric coordinate file produced by export_matrix_market."""
    lines = Path(source).read_text().splitlines()
    if not lines:
        raise MeshFormatError("empty file", line_number=1)
    banner = lines[0].split()
    expected = ["%%MatrixMarket", "matrix", "coordinate", "real", "symmetric"]
    if [tok.lower() for tok in banner] != [tok.lower() for tok in expected]:
        raise MeshFormatError(
            "expected banner '%%MatrixMarket matrix coordinate real symmetric'", line_number=1
        )

    pos = 1
    while pos < len(lines) and lines[pos].startswith("%"):
        pos += 1
    if pos >= len(lines):
        raise MeshFormatError("missing size line", line_number=len(lines))
    size = lines[pos].split()
    try:
        n_rows, n_cols, nnz = (int(tok) for tok in size)
    except ValueError:
        raise MeshFormatError("unparseable size line", line_number=pos + 1) from None
    if n_rows != n_cols:
        raise MeshFormatError(f"matrix must be square, got {n_rows}x{n_cols}", line_number=pos + 1)
    if len(lines) - pos - 1 < nnz:
        raise MeshFormatError(f"expected {nnz} entries", line_number=len(lines))

    rows = np.empty(nnz, dtype=np.int32)
    cols = np.empty(nnz, dtype=np.int32)
    vals = np.empty(nnz)
    for k in range(nnz):
        line_no = pos + 2 + k
        parts = lines[pos + 1 + k].split()
        if len(parts) != 3:
            raise MeshFormatError("expected 'row col value'", line_number=line_no)
        try:
            r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MeshFormatError("unparseable entry", line_number=line_no) from None
        if not (1 <= r <= n_rows and 1 <= c <= n_cols):
            raise MeshFormatError(f"entry ({r}, {c}) outside the matrix", line_number=line_no)
        if r < c:
            raise MeshFormatError(
                f"entry ({r}, {c}) lies above the diagonal; symmetric storage is lower-triangular",
                line_number=line_no,
            )
        rows[k], cols[k], vals[k] = r - 1, c - 1, v

    return triplet_to_csc(TripletMatrix(rows=rows, cols=cols, vals=vals, dim=n_rows))
