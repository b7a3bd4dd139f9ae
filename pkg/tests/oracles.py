"""Independent verification routes used by the tests.

Everything here deliberately avoids the library's own integration and
conversion code paths: gradients are re-derived from the trilinear product
form, Jacobian algebra goes through numpy.linalg, quadrature points come
from numpy's Gauss-Legendre tables, and sparse conversion cross-checks use
scipy. Expected values asserted in the tests were computed with these
routines and frozen there.
"""

import math

import numpy as np
import scipy.sparse

# Natural corner coordinates, bottom face counterclockwise then top face.
CORNERS = np.array(
    [
        (-1, -1, -1),
        (1, -1, -1),
        (1, 1, -1),
        (-1, 1, -1),
        (-1, -1, 1),
        (1, -1, 1),
        (1, 1, 1),
        (-1, 1, 1),
    ],
    dtype=float,
)


def trilinear_gradients(r, s, t):
    """Gradients of the trilinear basis, written out independently."""
    out = np.empty((3, 8))
    for a, (ra, sa, ta) in enumerate(CORNERS):
        out[0, a] = ra * (1 + sa * s) * (1 + ta * t) / 8.0
        out[1, a] = sa * (1 + ra * r) * (1 + ta * t) / 8.0
        out[2, a] = ta * (1 + ra * r) * (1 + sa * s) / 8.0
    return out


def quadrature_stiffness(node_coords, c, order):
    """Full 8x8 element matrix by an order^3 Gauss-Legendre rule.

    Uses numpy.linalg for the Jacobian determinant and inverse, so none of
    the library's closed-form 3x3 algebra is exercised.
    """
    pts, wts = np.polynomial.legendre.leggauss(order)
    ke = np.zeros((8, 8))
    for r, wr in zip(pts, wts):
        for s, ws in zip(pts, wts):
            for t, wt in zip(pts, wts):
                dN = trilinear_gradients(r, s, t)
                J = dN @ node_coords
                det = np.linalg.det(J)
                B = np.linalg.inv(J) @ dN
                ke += c * (B.T @ B) * det * wr * ws * wt
    return ke


def analytic_unit_cube_stiffness():
    """Exact unit-cube element matrix for c = 1.

    Integrating the trilinear gradient products over [0, 1]^3 gives 1/3 on
    the diagonal, 0 for edge neighbours, and -1/12 for face and body
    diagonals (nodes differing in two or three natural coordinates).
    """
    ke = np.empty((8, 8))
    for i in range(8):
        for j in range(8):
            differing = int(np.sum(CORNERS[i] != CORNERS[j]))
            ke[i, j] = {0: 1.0 / 3.0, 1: 0.0, 2: -1.0 / 12.0, 3: -1.0 / 12.0}[differing]
    return ke


def structural_nnz_formula(nx, ny, nz):
    """Lower-triangle structural count for a structured grid of hex elements."""
    nodes = [nx + 1, ny + 1, nz + 1]
    return (math.prod(3 * n - 2 for n in nodes) + math.prod(nodes)) // 2


def structural_nnz_bruteforce(mesh):
    """Count distinct lower-triangle positions by explicit set enumeration."""
    seen = set()
    for element in mesh.connectivity:
        for gi in element:
            for gj in element:
                if gi >= gj:
                    seen.add((int(gi), int(gj)))
    return len(seen)


def serial_reference_values(mesh):
    """(n_el, 36) values from a plain single-threaded per-element loop."""
    from hexfem import element_geometry, local_stiffness

    out = np.empty((mesh.n_el, 36))
    for e in range(mesh.n_el):
        out[e] = local_stiffness(element_geometry(mesh, e), mesh.coefficient[e]).values
    return out


def csc_via_scipy(rows, cols, vals, dim):
    """Duplicate-summing triplet -> CSC conversion through scipy."""
    m = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsc()
    m.sort_indices()
    return m


def dense_from_lower(matrix):
    """Reconstruct the full symmetric operator from lower-triangular CSC."""
    full = np.zeros((matrix.dim, matrix.dim))
    for col in range(matrix.dim):
        for k in range(matrix.col_ptr[col], matrix.col_ptr[col + 1]):
            row = matrix.row_idx[k]
            full[row, col] = matrix.vals[k]
            full[col, row] = matrix.vals[k]
    return full


def random_valid_hexahedron(rng, distortion=0.15):
    """A perturbed unit cube; small distortions keep the Jacobian positive."""
    return (CORNERS + 1.0) / 2.0 + rng.uniform(-distortion, distortion, size=(8, 3))


def random_parallelepiped(rng):
    """An affine image of the reference cube with positive orientation."""
    while True:
        A = rng.uniform(-1.0, 1.0, size=(3, 3)) + 2.0 * np.eye(3)
        if np.linalg.det(A) > 0.5:
            break
    b = rng.uniform(-5.0, 5.0, size=3)
    return CORNERS @ A.T + b
