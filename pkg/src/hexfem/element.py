"""The 8-node brick reference element.

Trilinear shape functions on [-1, 1]^3, the 2x2x2 Gauss rule, closed-form
3x3 Jacobian algebra, and the per-element stiffness integration that stores
only the 36 lower-triangular entries of the symmetric 8x8 matrix.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DegenerateElementError

# TBB probing is noisy on boxes with an old TBB; the built-in layer is
# always available and fork-safe. An explicit NUMBA_THREADING_LAYER wins.
if os.environ.get("NUMBA_THREADING_LAYER") is None:
    numba.config.THREADING_LAYER = "workqueue"

__all__ = [
    "NODE_NATURAL_COORDS",
    "PACK_ROWS",
    "PACK_COLS",
    "GaussRule",
    "ElementGeometry",
    "PackedLowerStiffness",
    "shape_functions",
    "shape_gradients",
    "gauss_rule",
    "jacobian",
    "local_stiffness",
    "stiffness_batch",
    "set_worker_threads",
    "pack_lower",
    "unpack_lower",
    "element_geometry",
]

# Local node a sits at natural coordinates NODE_NATURAL_COORDS[a]:
# counterclockwise bottom face (t=-1), then counterclockwise top face (t=+1).
NODE_NATURAL_COORDS = np.array(
    [
        (-1.0, -1.0, -1.0),
        (+1.0, -1.0, -1.0),
        (+1.0, +1.0, -1.0),
        (-1.0, +1.0, -1.0),
        (-1.0, -1.0, +1.0),
        (+1.0, -1.0, +1.0),
        (+1.0, +1.0, +1.0),
        (-1.0, +1.0, +1.0),
    ]
)
NODE_NATURAL_COORDS.setflags(write=False)

# Row-major lower triangle (incl. diagonal): (0,0),(1,0),(1,1),(2,0),...,(7,7).
PACK_ROWS, PACK_COLS = np.tril_indices(8)
PACK_ROWS.setflags(write=False)
PACK_COLS.setflags(write=False)


@dataclass(frozen=True)
class GaussRule:
    """2x2x2 tensor-product Gauss rule: 8 points, unit combined weights."""

    points: np.ndarray  # (8, 3) natural coordinates
    weights: np.ndarray  # (8,)


@dataclass(frozen=True)
class ElementGeometry:
    """The 8 node positions of one element, gathered from the mesh."""

    node_coords: np.ndarray  # (8, 3)

    def __post_init__(self):
        pts = np.asarray(self.node_coords, dtype=np.float64)
        if pts.shape != (8, 3):
            raise ValueError(f"node_coords must be (8, 3), got {pts.shape}")
        if np.unique(pts, axis=0).shape[0] != 8:
            raise ValueError("element nodes must be 8 distinct points")
        object.__setattr__(self, "node_coords", pts)


@dataclass(frozen=True)
class PackedLowerStiffness:
    """36 lower-triangular entries of the symmetric 8x8 element matrix."""

    values: np.ndarray  # (36,)

    def unpack(self) -> np.ndarray:
        return unpack_lower(self.values)


def shape_functions(r, s, t) -> np.ndarray:
    """Trilinear basis N_a = (1 + r_a r)(1 + s_a s)(1 + t_a t) / 8 at one point."""
    ra, sa, ta = NODE_NATURAL_COORDS.T
    return 0.125 * (1.0 + ra * r) * (1.0 + sa * s) * (1.0 + ta * t)


def shape_gradients(r, s, t) -> np.ndarray:
    """Natural-coordinate gradients; row d holds dN_a/d(r,s,t)_d, shape (3, 8)."""
    ra, sa, ta = NODE_NATURAL_COORDS.T
    return np.stack(
        [
            0.125 * ra * (1.0 + sa * s) * (1.0 + ta * t),
            0.125 * sa * (1.0 + ra * r) * (1.0 + ta * t),
            0.125 * ta * (1.0 + ra * r) * (1.0 + sa * s),
        ]
    )


# +-1/sqrt(3): roots of the degree-2 Legendre polynomial 3x^2 - 1.
_GAUSS_1D = 1.0 / math.sqrt(3.0)
# Tensor order: r slowest, t fastest. Frozen for bitwise reproducibility.
_GAUSS_POINTS = np.array(
    [(r, s, t) for r in (-_GAUSS_1D, _GAUSS_1D) for s in (-_GAUSS_1D, _GAUSS_1D) for t in (-_GAUSS_1D, _GAUSS_1D)]
)
_GAUSS_WEIGHTS = np.ones(8)
_GAUSS_POINTS.setflags(write=False)
_GAUSS_WEIGHTS.setflags(write=False)

# N and dN at the 8 Gauss points, computed once and shared read-only.
_N_AT_GP = np.stack([shape_functions(*p) for p in _GAUSS_POINTS])  # (8, 8)
_DN_AT_GP = np.stack([shape_gradients(*p) for p in _GAUSS_POINTS])  # (8, 3, 8)
_N_AT_GP.setflags(write=False)
_DN_AT_GP.setflags(write=False)

_PACK_I = PACK_ROWS.astype(np.int64)
_PACK_J = PACK_COLS.astype(np.int64)
_PACK_I.setflags(write=False)
_PACK_J.setflags(write=False)


def gauss_rule() -> GaussRule:
    return GaussRule(points=_GAUSS_POINTS.copy(), weights=_GAUSS_WEIGHTS.copy())


def jacobian(geom: ElementGeometry, dN: np.ndarray):
    """Jacobian of the isoparametric map at one integration point.

    Returns (J, detJ, invJ) with J = dN @ node_coords; the determinant and
    inverse use the closed 3x3 formulas. Raises DegenerateElementError when
    detJ <= 0.
    """
    J = np.asarray(dN, dtype=np.float64) @ geom.node_coords
    c00 = J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
    c01 = J[1, 2] * J[2, 0] - J[1, 0] * J[2, 2]
    c02 = J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]
    det = J[0, 0] * c00 + J[0, 1] * c01 + J[0, 2] * c02
    if not det > 0.0:
        raise DegenerateElementError(det=float(det))
    inv = np.array(
        [
            [c00, J[0, 2] * J[2, 1] - J[0, 1] * J[2, 2], J[0, 1] * J[1, 2] - J[0, 2] * J[1, 1]],
            [c01, J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0], J[0, 2] * J[1, 0] - J[0, 0] * J[1, 2]],
            [c02, J[0, 1] * J[2, 0] - J[0, 0] * J[2, 1], J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]],
        ]
    )
    return J, float(det), inv / det


def pack_lower(matrix: np.ndarray) -> np.ndarray:
    """Extract the 36 packed lower-triangular entries of an 8x8 matrix."""
    m = np.asarray(matrix)
    if m.shape != (8, 8):
        raise ValueError(f"expected an 8x8 matrix, got {m.shape}")
    return m[PACK_ROWS, PACK_COLS].copy()


def unpack_lower(values: np.ndarray) -> np.ndarray:
    """Rebuild the symmetric 8x8 matrix from its 36 packed entries."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (36,):
        raise ValueError(f"expected 36 packed values, got shape {v.shape}")
    full = np.zeros((8, 8))
    full[PACK_ROWS, PACK_COLS] = v
    full[PACK_COLS, PACK_ROWS] = v
    return full


def local_stiffness(geom: ElementGeometry, c: float) -> PackedLowerStiffness:
    """Integrate one element's stiffness; only the lower triangle is stored.

    The coefficient c is constant per element and multiplies the quadrature
    sum of B^T B |J| with unit weights.
    """
    if not c > 0:
        raise ValueError(f"coefficient must be positive, got {c!r}")
    values = stiffness_batch(np.asarray(geom.node_coords)[None, :, :], np.array([float(c)]))
    return PackedLowerStiffness(values=values[0])


def element_geometry(mesh, e: int) -> ElementGeometry:
    """Gather the node positions of element e from a mesh."""
    return ElementGeometry(node_coords=mesh.coords[mesh.connectivity[e]])


def set_worker_threads(workers: int) -> int:
    """Set the kernel's thread count, clamped to the runtime maximum.

    Thread count never changes results: every element is an independent
    scalar computation. Returns the effective count.
    """
    effective = max(1, min(workers, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(effective)
    return effective


def stiffness_batch(coords: np.ndarray, coeff: np.ndarray, element_offset: int = 0,
                    out: np.ndarray | None = None) -> np.ndarray:
    """Element stiffness for a batch: coords (n, 8, 3), coeff (n,) -> (n, 36).

    Elements are computed concurrently (see set_worker_threads); each one is
    a pure scalar function of its own 8 node positions and coefficient with
    a fixed operation order, so the output is bitwise identical for any
    batching or thread count. element_offset only labels
    DegenerateElementError with the caller's global element id. Each
    element's thread writes only its own row of out, which may be a view
    into a larger caller-owned array.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    coeff = np.ascontiguousarray(coeff, dtype=np.float64)
    n = coords.shape[0]
    if coords.shape != (n, 8, 3) or coeff.shape != (n,):
        raise ValueError(f"bad batch shapes {coords.shape}, {coeff.shape}")
    if out is None:
        out = np.empty((n, 36))
    elif out.shape != (n, 36) or out.dtype != np.float64:
        raise ValueError(f"out must be float64 ({n}, 36), got {out.dtype} {out.shape}")
    fail_gauss_point = np.empty(n, dtype=np.int32)
    fail_det = np.empty(n)
    _stiffness_kernel(coords, coeff, out, fail_gauss_point, fail_det)
    failed = np.flatnonzero(fail_gauss_point >= 0)
    if failed.size:
        first = int(failed[0])
        raise DegenerateElementError(
            element_id=element_offset + first,
            gauss_point=int(fail_gauss_point[first]),
            det=float(fail_det[first]),
        )
    return out


@numba.njit(cache=True, parallel=True)
def _stiffness_kernel(coords, coeff, out, fail_gauss_point, fail_det):
    """One thread per element: J, |J|, J^-1, B, then the packed lower k_e."""
    n = coords.shape[0]
    for e in numba.prange(n):
        x = coords[e]
        ke = out[e]
        for p in range(36):
            ke[p] = 0.0
        fail_gauss_point[e] = -1
        B = np.empty((3, 8))
        for gp in range(8):
            dn = _DN_AT_GP[gp]

            # J = dn @ x, three rows unrolled
            j00 = 0.0; j01 = 0.0; j02 = 0.0
            j10 = 0.0; j11 = 0.0; j12 = 0.0
            j20 = 0.0; j21 = 0.0; j22 = 0.0
            for a in range(8):
                j00 += dn[0, a] * x[a, 0]; j01 += dn[0, a] * x[a, 1]; j02 += dn[0, a] * x[a, 2]
                j10 += dn[1, a] * x[a, 0]; j11 += dn[1, a] * x[a, 1]; j12 += dn[1, a] * x[a, 2]
                j20 += dn[2, a] * x[a, 0]; j21 += dn[2, a] * x[a, 1]; j22 += dn[2, a] * x[a, 2]

            # determinant by cofactors of the first row
            c00 = j11 * j22 - j12 * j21
            c01 = j12 * j20 - j10 * j22
            c02 = j10 * j21 - j11 * j20
            det = j00 * c00 + j01 * c01 + j02 * c02
            if not det > 0.0:
                fail_gauss_point[e] = gp
                fail_det[e] = det
                break

            # adjugate / det
            i00 = c00 / det; i01 = (j02 * j21 - j01 * j22) / det; i02 = (j01 * j12 - j02 * j11) / det
            i10 = c01 / det; i11 = (j00 * j22 - j02 * j20) / det; i12 = (j02 * j10 - j00 * j12) / det
            i20 = c02 / det; i21 = (j01 * j20 - j00 * j21) / det; i22 = (j00 * j11 - j01 * j10) / det

            # physical gradients B = J^-1 @ dn
            for a in range(8):
                B[0, a] = i00 * dn[0, a] + i01 * dn[1, a] + i02 * dn[2, a]
                B[1, a] = i10 * dn[0, a] + i11 * dn[1, a] + i12 * dn[2, a]
                B[2, a] = i20 * dn[0, a] + i21 * dn[1, a] + i22 * dn[2, a]

            # c |J| W with W = 1 for the 2x2x2 rule
            scale = coeff[e] * det
            for p in range(36):
                i = _PACK_I[p]
                j = _PACK_J[p]
                ke[p] += scale * (B[0, i] * B[0, j] + B[1, i] * B[1, j] + B[2, i] * B[2, j])
