"""Local-to-global mapping and triplet -> compressed-column conversion.

Two interchangeable strategies produce the lower triangle of the global
matrix: a generic conversion of explicit (row, col, value) triplets, and a
direct connectivity-driven assembly that never materializes the index
arrays. Duplicate positions are summed in element order in both, so results
are deterministic bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .element import PACK_COLS, PACK_ROWS
from .errors import MeshValidationError
from .integrate import LocalValuesBatch

__all__ = [
    "TripletMatrix",
    "LowerCscMatrix",
    "map_local_to_global",
    "connectivity_index_arrays",
    "build_triplet",
    "triplet_to_csc",
    "DirectAssembler",
    "assemble_direct",
    "nnz_compression",
]

# Elements are swept in fixed-size slabs so the direct path only ever holds
# slab-sized index scratch in addition to the bucketed output.
_SLAB = 16384


@dataclass(frozen=True)
class TripletMatrix:
    """(row, col, value) entries, duplicates permitted, lower triangle only."""

    rows: np.ndarray  # (36 * n_el,) int32
    cols: np.ndarray  # (36 * n_el,) int32
    vals: np.ndarray  # (36 * n_el,) float64
    dim: int

    @property
    def nnz(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class LowerCscMatrix:
    """Compressed sparse columns of the lower triangle (diagonal included)."""

    col_ptr: np.ndarray  # (dim + 1,) int64
    row_idx: np.ndarray  # (nnz,) int64, strictly increasing within a column
    vals: np.ndarray  # (nnz,) float64
    dim: int

    @property
    def nnz(self) -> int:
        return self.row_idx.shape[0]


def map_local_to_global(element_nodes, dofxn: int = 1):
    """Global (row, col) targets of the packed local entries of one element.

    Entry order matches the packed lower-triangle order; each pair is swapped
    to (max, min) so every target lies in the global lower triangle. For
    dofxn > 1 local degrees of freedom are node-major blocks, giving
    (8*dofxn)(8*dofxn + 1)/2 pairs; the scalar problem uses dofxn = 1.
    """
    nodes = np.asarray(element_nodes, dtype=np.int64)
    if nodes.shape != (8,):
        raise ValueError(f"expected 8 node ids, got shape {nodes.shape}")
    if dofxn < 1:
        raise ValueError(f"dofxn must be at least 1, got {dofxn}")
    ndof = 8 * dofxn
    dofs = (nodes[:, None] * dofxn + np.arange(dofxn)[None, :]).reshape(ndof)
    li, lj = np.tril_indices(ndof)
    gr = dofs[li]
    gc = dofs[lj]
    return np.stack([np.maximum(gr, gc), np.minimum(gr, gc)], axis=1)


def connectivity_index_arrays(mesh, lo: int = 0, hi: int | None = None):
    """Lower-triangle (rows, cols) for elements [lo, hi), packed order, int32."""
    conn = mesh.connectivity[lo:hi].astype(np.int32, copy=False)
    gr = conn[:, PACK_ROWS]
    gc = conn[:, PACK_COLS]
    rows = np.maximum(gr, gc).reshape(-1)
    cols = np.minimum(gr, gc).reshape(-1)
    return rows, cols


def build_triplet(mesh, values: LocalValuesBatch, rows=None, cols=None) -> TripletMatrix:
    """Combine mapped indices and integrated values into triplet storage.

    Entry 36*e + p carries the p-th packed pair and value of element e.
    Precomputed (rows, cols) may be passed in when the index generation ran
    concurrently with the integration stage.
    """
    if values.values.shape != (mesh.n_el, 36):
        raise ValueError(f"values must be ({mesh.n_el}, 36), got {values.values.shape}")
    if rows is None or cols is None:
        rows, cols = connectivity_index_arrays(mesh)
    return TripletMatrix(rows=rows, cols=cols, vals=values.values.reshape(-1), dim=mesh.n_nodes)


def triplet_to_csc(t: TripletMatrix) -> LowerCscMatrix:
    """Convert triplets to compressed columns, summing duplicates.

    A stable sort by (col, row) preserves original entry order inside each
    duplicate run, so the floating-point sums are deterministic. Entries
    whose sum is zero stay stored: the structure equals the mesh adjacency.
    """
    _check_indices(t.rows, t.cols, t.dim)
    if t.nnz == 0:
        return LowerCscMatrix(
            col_ptr=np.zeros(t.dim + 1, dtype=np.int64),
            row_idx=np.empty(0, dtype=np.int64),
            vals=np.empty(0),
            dim=t.dim,
        )
    order = np.lexsort((t.rows, t.cols))
    rows = t.rows[order]
    cols = t.cols[order]
    vals = t.vals[order]

    is_start = np.empty(rows.shape[0], dtype=bool)
    is_start[0] = True
    is_start[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.flatnonzero(is_start)

    summed = np.add.reduceat(vals, starts)
    row_idx = rows[starts].astype(np.int64)
    col_counts = np.bincount(cols[starts], minlength=t.dim)
    col_ptr = np.zeros(t.dim + 1, dtype=np.int64)
    np.cumsum(col_counts, out=col_ptr[1:])
    return LowerCscMatrix(col_ptr=col_ptr, row_idx=row_idx, vals=summed, dim=t.dim)


def _check_indices(rows, cols, dim):
    if rows.size == 0:
        return
    if rows.min() < 0 or rows.max() >= dim or cols.min() < 0:
        raise MeshValidationError(f"triplet index outside [0, {dim})")
    if (rows < cols).any():
        raise MeshValidationError("triplet entry above the diagonal")


class DirectAssembler:
    """Connectivity-driven assembly that streams integrated values.

    The column structure is counted from connectivity alone (pass one), so
    value groups can be scattered into per-column buckets as they arrive
    (pass two) and compressed once at the end. The full (rows, cols) index
    arrays of the triplet path are never materialized. Groups must arrive in
    ascending element order; the per-position accumulation order is then the
    element order, matching the stable-sorted triplet conversion.
    """

    def __init__(self, mesh):
        self._mesh = mesh
        self.dim = mesh.n_nodes
        counts = np.zeros(self.dim, dtype=np.int64)
        for lo in range(0, mesh.n_el, _SLAB):
            _, cols = connectivity_index_arrays(mesh, lo, min(lo + _SLAB, mesh.n_el))
            counts += np.bincount(cols, minlength=self.dim)
        self._dup_counts = counts
        offsets = np.zeros(self.dim + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        self._cursor = offsets[:-1].copy()
        total = 36 * mesh.n_el
        self._bucket_rows = np.empty(total, dtype=np.int64)
        self._bucket_vals = np.empty(total)
        self._next_element = 0

    def consume(self, element_range, values: np.ndarray) -> None:
        """Scatter one contiguous group of element values into the buckets."""
        lo, hi = element_range
        if lo != self._next_element:
            raise ValueError(f"groups must arrive in order; expected {self._next_element}, got {lo}")
        self._next_element = hi
        for slab_lo in range(lo, hi, _SLAB):
            slab_hi = min(slab_lo + _SLAB, hi)
            rows, cols = connectivity_index_arrays(self._mesh, slab_lo, slab_hi)
            vals = np.asarray(values[slab_lo - lo : slab_hi - lo]).reshape(-1)
            order = np.argsort(cols, kind="stable")
            sorted_cols = cols[order]
            is_start = np.empty(sorted_cols.shape[0], dtype=bool)
            is_start[0] = True
            is_start[1:] = sorted_cols[1:] != sorted_cols[:-1]
            starts = np.flatnonzero(is_start)
            lengths = np.diff(np.append(starts, sorted_cols.shape[0]))
            within = np.arange(sorted_cols.shape[0]) - np.repeat(starts, lengths)
            pos = self._cursor[sorted_cols] + within
            self._bucket_rows[pos] = rows[order]
            self._bucket_vals[pos] = vals[order]
            touched = sorted_cols[starts]
            self._cursor[touched] += lengths

    def finish(self) -> LowerCscMatrix:
        """Sort each column bucket by row and sum duplicate runs in place."""
        if self._next_element != self._mesh.n_el:
            raise ValueError(
                f"only {self._next_element} of {self._mesh.n_el} elements were consumed"
            )
        col_of = np.repeat(np.arange(self.dim, dtype=np.int64), self._dup_counts)
        order = np.lexsort((self._bucket_rows, col_of))
        rows = self._bucket_rows[order]
        vals = self._bucket_vals[order]
        cols = col_of[order]
        if rows.size == 0:
            return LowerCscMatrix(
                col_ptr=np.zeros(self.dim + 1, dtype=np.int64),
                row_idx=np.empty(0, dtype=np.int64),
                vals=np.empty(0),
                dim=self.dim,
            )
        is_start = np.empty(rows.shape[0], dtype=bool)
        is_start[0] = True
        is_start[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(is_start)
        summed = np.add.reduceat(vals, starts)
        row_idx = rows[starts]
        col_counts = np.bincount(cols[starts], minlength=self.dim)
        col_ptr = np.zeros(self.dim + 1, dtype=np.int64)
        np.cumsum(col_counts, out=col_ptr[1:])
        return LowerCscMatrix(col_ptr=col_ptr, row_idx=row_idx, vals=summed, dim=self.dim)


def assemble_direct(mesh, values: LocalValuesBatch) -> LowerCscMatrix:
    """Assemble the lower-triangular CSC matrix straight from connectivity."""
    if values.values.shape != (mesh.n_el, 36):
        raise ValueError(f"values must be ({mesh.n_el}, 36), got {values.values.shape}")
    assembler = DirectAssembler(mesh)
    assembler.consume((0, mesh.n_el), values.values)
    return assembler.finish()


def nnz_compression(t: TripletMatrix, m: LowerCscMatrix) -> float:
    """Fraction of entries removed by duplicate summation: 1 - nnz_csc/nnz_triplet."""
    return 1.0 - m.nnz / t.nnz
