import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexfem import (
    MeshFormatError,
    MeshValidationError,
    StructuredGridSpec,
    gauss_rule,
    generate_cube_mesh,
    jacobian,
    load_mesh,
    save_mesh,
    shape_gradients,
    validate_mesh,
)
from hexfem.element import ElementGeometry


def mesh_equal(a, b):
    return (
        np.array_equal(a.coords, b.coords)
        and np.array_equal(a.connectivity, b.connectivity)
        and np.array_equal(a.coefficient, b.coefficient)
    )


class TestGenerateCubeMesh:
    @pytest.mark.parametrize(
        "n,expected_nodes,expected_elements",
        [(10, 1331, 1000), (1, 8, 1), (20, 9261, 8000)],
    )
    def test_published_sizes(self, n, expected_nodes, expected_elements):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=n, ny=n, nz=n))
        assert mesh.n_nodes == expected_nodes
        assert mesh.n_el == expected_elements

    def test_node_placement_and_numbering(self):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=2, ny=3, nz=4, h=0.5))
        sx, sy = 3, 4
        for i in (0, 1, 2):
            for j in (0, 3):
                for k in (0, 4):
                    node = i + j * sx + k * sx * sy
                    np.testing.assert_array_equal(mesh.coords[node], [i * 0.5, j * 0.5, k * 0.5])

    def test_uniform_coefficient(self):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=2, ny=2, nz=2, c0=3.5))
        np.testing.assert_array_equal(mesh.coefficient, 3.5)

    def test_node_ids_are_a_bijection(self):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=3, ny=4, nz=5))
        used = np.unique(mesh.connectivity)
        np.testing.assert_array_equal(used, np.arange(mesh.n_nodes))

    def test_interior_node_in_eight_elements_corner_in_one(self):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=4, ny=4, nz=4))
        counts = np.bincount(mesh.connectivity.ravel(), minlength=mesh.n_nodes)
        interior = 2 + 2 * 5 + 2 * 25  # grid point (2, 2, 2)
        assert counts[interior] == 8
        for corner in (0, 4, 120, 124):
            assert counts[corner] == 1

    def test_positive_jacobians_and_volume_sum(self):
        spec = StructuredGridSpec(nx=3, ny=2, nz=4, h=0.7)
        mesh = generate_cube_mesh(spec)
        rule = gauss_rule()
        volume = 0.0
        for e in range(mesh.n_el):
            geom = ElementGeometry(node_coords=mesh.coords[mesh.connectivity[e]])
            for p, w in zip(rule.points, rule.weights):
                _, det, _ = jacobian(geom, shape_gradients(*p))
                volume += det * w
        expected = spec.nx * spec.ny * spec.nz * spec.h**3
        assert abs(volume - expected) <= 1e-12 * expected

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(nx=0, ny=1, nz=1),
            dict(nx=1, ny=-2, nz=1),
            dict(nx=1, ny=1, nz=1, h=0.0),
            dict(nx=1, ny=1, nz=1, h=-1.0),
            dict(nx=1, ny=1, nz=1, c0=0.0),
        ],
    )
    def test_rejects_bad_specs(self, kwargs):
        with pytest.raises(MeshValidationError):
            StructuredGridSpec(**kwargs)


class TestMeshFile:
    def test_single_element_round_trip(self, tmp_path):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=1, ny=1, nz=1, h=0.3, c0=2.0))
        path = tmp_path / "one.mesh"
        save_mesh(mesh, path)
        assert mesh_equal(load_mesh(path), mesh)

    def test_generated_cube_round_trip(self, tmp_path):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=10, ny=10, nz=10))
        path = tmp_path / "cube.mesh"
        save_mesh(mesh, path)
        assert mesh_equal(load_mesh(path), mesh)

    def test_header_format(self, tmp_path):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=1, ny=1, nz=1))
        path = tmp_path / "one.mesh"
        save_mesh(mesh, path)
        assert path.read_text().splitlines()[0] == "hexmesh 8 1"

    def test_accepts_crlf_line_endings(self, tmp_path):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=2, ny=1, nz=1))
        path = tmp_path / "unix.mesh"
        save_mesh(mesh, path)
        crlf = tmp_path / "dos.mesh"
        crlf.write_bytes(path.read_text().replace("\n", "\r\n").encode())
        assert mesh_equal(load_mesh(crlf), mesh)

    def test_out_of_range_node_is_a_validation_error(self, tmp_path):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=1, ny=1, nz=1))
        path = tmp_path / "bad.mesh"
        save_mesh(mesh, path)
        text = path.read_text().splitlines()
        text[-1] = "0 1 2 3 4 5 6 9 1.0"  # node 9 in an 8-node mesh
        path.write_text("\n".join(text) + "\n")
        with pytest.raises(MeshValidationError, match="node"):
            load_mesh(path)

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.mesh"
        path.write_text("hexmesh 2 0\n0.0 0.0 0.0\n0.0 oops 0.0\n")
        with pytest.raises(MeshFormatError) as info:
            load_mesh(path)
        assert info.value.line_number == 3
        assert "line 3" in str(info.value)

    def test_truncated_file_is_a_format_error(self, tmp_path):
        path = tmp_path / "short.mesh"
        path.write_text("hexmesh 4 1\n0.0 0.0 0.0\n")
        with pytest.raises(MeshFormatError):
            load_mesh(path)

    def test_bad_header_is_a_format_error(self, tmp_path):
        path = tmp_path / "weird.mesh"
        path.write_text("trimesh 3 1\n")
        with pytest.raises(MeshFormatError) as info:
            load_mesh(path)
        assert info.value.line_number == 1

    def test_duplicate_node_in_element_is_a_validation_error(self, tmp_path):
        path = tmp_path / "dup.mesh"
        coords = "\n".join(f"{float(i)!r} 0.0 0.0" for i in range(8))
        path.write_text(f"hexmesh 8 1\n{coords}\n0 1 2 3 4 5 6 6 1.0\n")
        with pytest.raises(MeshValidationError, match="repeated"):
            load_mesh(path)

    def test_non_positive_coefficient_is_a_validation_error(self, tmp_path):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=1, ny=1, nz=1))
        path = tmp_path / "coef.mesh"
        save_mesh(mesh, path)
        text = path.read_text().replace(" 1.0", " -1.0")
        path.write_text(text)
        with pytest.raises(MeshValidationError, match="coefficient"):
            load_mesh(path)

    @settings(max_examples=25, deadline=None)
    @given(
        nx=st.integers(1, 3),
        ny=st.integers(1, 3),
        nz=st.integers(1, 3),
        h=st.floats(0.01, 10, allow_nan=False),
        c0=st.floats(0.01, 100, allow_nan=False),
    )
    def test_round_trip_is_exact_for_any_grid(self, tmp_path_factory, nx, ny, nz, h, c0):
        mesh = generate_cube_mesh(StructuredGridSpec(nx=nx, ny=ny, nz=nz, h=h, c0=c0))
        path = tmp_path_factory.mktemp("meshes") / "grid.mesh"
        save_mesh(mesh, path)
        assert mesh_equal(load_mesh(path), mesh)

    def test_validate_accepts_generated_meshes(self):
        validate_mesh(generate_cube_mesh(StructuredGridSpec(nx=2, ny=2, nz=2)))
