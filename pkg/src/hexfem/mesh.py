"""Hexahedral meshes: structured cube generation and a plain-text file format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MeshFormatError, MeshValidationError

__all__ = [
    "Mesh",
    "StructuredGridSpec",
    "generate_cube_mesh",
    "save_mesh",
    "load_mesh",
    "validate_mesh",
]


@dataclass(frozen=True)
class Mesh:
    """An 8-node hexahedral mesh.

    Attributes
    ----------
    coords : (n_nodes, 3) float64
        Node positions.
    connectivity : (n_el, 8) int32
        Global node ids of each element, in the fixed local ordering
        (counterclockwise bottom face, then counterclockwise top face).
    coefficient : (n_el,) float64
        Per-element material coefficient, strictly positive.

    Treated as immutable after construction; safe to share across workers.
    """

    coords: np.ndarray
    connectivity: np.ndarray
    coefficient: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_el(self) -> int:
        return self.connectivity.shape[0]


@dataclass(frozen=True)
class StructuredGridSpec:
    """Element counts per axis, edge length, and a uniform coefficient."""

    nx: int
    ny: int
    nz: int
    h: float = 1.0
    c0: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise MeshValidationError(f"{name} must be a positive integer, got {v!r}")
        if not self.h > 0:
            raise MeshValidationError(f"edge length h must be positive, got {self.h!r}")
        if not self.c0 > 0:
            raise MeshValidationError(f"coefficient c0 must be positive, got {self.c0!r}")


def generate_cube_mesh(spec: StructuredGridSpec) -> Mesh:
    """Generate a structured box of nx*ny*nz axis-aligned hex elements.

    Node (i, j, k) sits at (i*h, j*h, k*h) with global id
    i + j*(nx+1) + k*(nx+1)*(ny+1); node and element numbering are both
    x-fastest, so the layout (and hence the assembled sparsity pattern)
    is fully deterministic.
    """
    nx, ny, nz, h = spec.nx, spec.ny, spec.nz, spec.h
    sx, sy = nx + 1, ny + 1
    n_nodes = sx * sy * (nz + 1)

    ids = np.arange(n_nodes)
    i = ids % sx
    j = (ids // sx) % sy
    k = ids // (sx * sy)
    coords = np.stack([i * h, j * h, k * h], axis=1).astype(np.float64)

    ez, ey, ex = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    origin = ex.ravel() + ey.ravel() * sx + ez.ravel() * sx * sy
    layer = sx * sy
    local = np.array([0, 1, 1 + sx, sx, layer, 1 + layer, 1 + sx + layer, sx + layer])
    connectivity = (origin[:, None] + local[None, :]).astype(np.int32)

    coefficient = np.full(nx * ny * nz, float(spec.c0))
    return Mesh(coords=coords, connectivity=connectivity, coefficient=coefficient)


def validate_mesh(mesh: Mesh) -> None:
    """Check index bounds, per-element node distinctness, and coefficient signs."""
    conn = mesh.connectivity
    if conn.ndim != 2 or conn.shape[1] != 8:
        raise MeshValidationError(f"connectivity must be (n_el, 8), got {conn.shape}")
    if conn.size and (conn.min() < 0 or conn.max() >= mesh.n_nodes):
        bad = int(np.flatnonzero((conn < 0).any(axis=1) | (conn >= mesh.n_nodes).any(axis=1))[0])
        raise MeshValidationError(
            f"element {bad} references node outside [0, {mesh.n_nodes})"
        )
    if conn.size:
        sorted_nodes = np.sort(conn, axis=1)
        dup = (np.diff(sorted_nodes, axis=1) == 0).any(axis=1)
        if dup.any():
            raise MeshValidationError(f"element {int(np.flatnonzero(dup)[0])} has repeated nodes")
    if mesh.coefficient.shape != (mesh.n_el,):
        raise MeshValidationError("coefficient array length must equal n_el")
    if mesh.coefficient.size and not (mesh.coefficient > 0).all():
        bad = int(np.flatnonzero(~(mesh.coefficient > 0))[0])
        raise MeshValidationError(f"element {bad} has non-positive coefficient")


def save_mesh(mesh: Mesh, destination) -> None:
    """Write the plain-text mesh format.

    Header ``hexmesh <n_nodes> <n_el>``, then one ``x y z`` line per node,
    then one line of 8 node ids and the coefficient per element. Floats are
    written in shortest round-trip form so load(save(m)) is exact.
    """
    lines = [f"hexmesh {mesh.n_nodes} {mesh.n_el}"]
    for x, y, z in mesh.coords:
        lines.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for nodes, c in zip(mesh.connectivity, mesh.coefficient):
        lines.append(" ".join(str(int(n)) for n in nodes) + f" {float(c)!r}")
    Path(destination).write_text("\n".join(lines) + "\n")


def load_mesh(source) -> Mesh:
    """Parse the plain-text mesh format; accepts LF and CRLF endings."""
    text = Path(source).read_text()
    lines = text.splitlines()
    if not lines:
        raise MeshFormatError("empty file", line_number=1)

    header = lines[0].split()
    if len(header) != 3 or header[0] != "hexmesh":
        raise MeshFormatError("expected header 'hexmesh <n_nodes> <n_el>'", line_number=1)
    try:
        n_nodes, n_el = int(header[1]), int(header[2])
    except ValueError:
        raise MeshFormatError("non-integer counts in header", line_number=1) from None
    if n_nodes < 0 or n_el < 0:
        raise MeshFormatError("negative counts in header", line_number=1)
    if len(lines) < 1 + n_nodes + n_el:
        raise MeshFormatError(
            f"expected {1 + n_nodes + n_el} lines, file has {len(lines)}",
            line_number=len(lines),
        )

    coords = np.empty((n_nodes, 3), dtype=np.float64)
    for n in range(n_nodes):
        line_no = 2 + n
        parts = lines[1 + n].split()
        if len(parts) != 3:
            raise MeshFormatError(f"expected 3 coordinates, got {len(parts)}", line_number=line_no)
        try:
            coords[n] = [float(p) for p in parts]
        except ValueError:
            raise MeshFormatError("unparseable coordinate", line_number=line_no) from None

    connectivity = np.empty((n_el, 8), dtype=np.int32)
    coefficient = np.empty(n_el, dtype=np.float64)
    for e in range(n_el):
        line_no = 2 + n_nodes + e
        parts = lines[1 + n_nodes + e].split()
        if len(parts) != 9:
            raise MeshFormatError(
                f"expected 8 node ids and a coefficient, got {len(parts)} fields",
                line_number=line_no,
            )
        try:
            connectivity[e] = [int(p) for p in parts[:8]]
            coefficient[e] = float(parts[8])
        except ValueError:
            raise MeshFormatError("unparseable element line", line_number=line_no) from None

    mesh = Mesh(coords=coords, connectivity=connectivity, coefficient=coefficient)
    validate_mesh(mesh)
    return mesh
