"""Tests for mesh generation, validation and the text mesh format."""

import numpy as np
import pytest

from dpflow.errors import InvalidArgumentError, MeshParseError, UnsupportedError
from dpflow.mesh import (
    Mesh,
    axis_coordinates,
    generate_annulus,
    generate_box,
    generate_interval,
    get_cell,
    read_mesh,
    write_mesh,
)


class TestGenerators:
    """Test the structured mesh generators."""

    def test_interval_nodes_and_tags(self):
        """Test a uniform interval partition."""
        mesh = generate_interval(1.0, 10)

        assert mesh.dim == 1
        assert mesh.kind == "segment"
        assert mesh.n_elements == 10
        assert mesh.n_nodes == 11
        assert mesh.boundary_tags() == ["left", "right"]
        assert mesh.h_max == pytest.approx(0.1)
        mesh.validate()

    def test_interval_rejects_bad_arguments(self):
        """Test that non-positive lengths and cell counts are rejected."""
        with pytest.raises(InvalidArgumentError):
            generate_interval(0.0, 4)
        with pytest.raises(InvalidArgumentError):
            generate_interval(1.0, 0)

    def test_unit_square_quadrilaterals(self):
        """Test an 8x8 quadrilateral mesh of the unit square."""
        mesh = generate_box([1.0, 1.0], [8, 8])

        assert mesh.kind == "quadrilateral"
        assert mesh.n_elements == 64
        assert mesh.n_nodes == 81
        assert mesh.boundary_tags() == ["bottom", "left", "right", "top"]
        assert mesh.n_facets == 32
        assert mesh.element_measures().sum() == pytest.approx(1.0)
        mesh.validate()

    def test_cube_hexahedra(self):
        """Test a 4x4x4 hexahedral cube with six tagged faces."""
        mesh = generate_box([1.0, 1.0, 1.0], [4, 4, 4])

        assert mesh.kind == "hexahedron"
        assert mesh.n_elements == 64
        assert mesh.n_nodes == 125
        assert mesh.boundary_tags() == ["back", "bottom", "front", "left", "right", "top"]
        for tag in mesh.boundary_tags():
            assert mesh.facets_with_tag(tag).size == 16
        assert mesh.element_measures().sum() == pytest.approx(1.0)
        mesh.validate()

    def test_channel_with_two_holes(self):
        """Test that holes remove cells and get their own boundary tags."""
        holes = [((2.8, 0.3), (3.2, 0.7)), ((6.8, 0.3), (7.2, 0.7))]
        mesh = generate_box([10.0, 1.0], [100, 10], holes)

        assert mesh.n_elements == 1000 - 2 * 16
        assert "hole_1" in mesh.boundary_tags()
        assert "hole_2" in mesh.boundary_tags()
        assert mesh.facets_with_tag("hole_1").size == 16
        assert len(mesh.holes) == 2
        assert mesh.element_measures().sum() == pytest.approx(10.0 - 2 * 0.16)
        mesh.validate()

    def test_overlapping_holes_rejected(self):
        """Test that touching holes are an error."""
        holes = [((0.2, 0.2), (0.5, 0.5)), ((0.5, 0.2), (0.7, 0.5))]
        with pytest.raises(InvalidArgumentError, match="overlap"):
            generate_box([1.0, 1.0], [10, 10], holes)

    def test_hole_touching_boundary_rejected(self):
        """Test that a hole must lie strictly inside the domain."""
        with pytest.raises(InvalidArgumentError):
            generate_box([1.0, 1.0], [10, 10], [((0.0, 0.2), (0.3, 0.5))])

    def test_annulus(self):
        """Test the annulus generator tags and area."""
        mesh = generate_annulus(0.3, 1.0, 8, 32)

        assert mesh.n_elements == 8 * 32
        assert mesh.boundary_tags() == ["inner", "outer"]
        radii = np.linalg.norm(mesh.nodes, axis=1)
        assert radii.min() == pytest.approx(0.3)
        assert radii.max() == pytest.approx(1.0)
        # polygonal approximation of pi (1 - 0.09)
        assert mesh.element_measures().sum() == pytest.approx(np.pi * 0.91, rel=1e-2)
        mesh.validate()

    def test_annulus_rejects_bad_radii(self):
        """Test that inverted radii are rejected."""
        with pytest.raises(InvalidArgumentError):
            generate_annulus(1.0, 0.5, 4, 8)


class TestGridLines:
    """Test axes forced through prescribed coordinates."""

    def test_axis_passes_through_lines(self):
        """Test a piecewise-uniform axis with two interior lines."""
        axis = axis_coordinates(1.0, 16, [0.6, 0.8])

        assert axis.size == 17
        assert axis[0] == 0.0
        assert axis[-1] == 1.0
        assert np.all(np.diff(axis) > 0)
        assert np.min(np.abs(axis - 0.6)) < 1e-14
        assert np.min(np.abs(axis - 0.8)) < 1e-14

    def test_segments_split_in_proportion(self):
        """Test the cell shares of each segment."""
        axis = axis_coordinates(1.0, 16, [0.6, 0.8])

        assert np.sum(axis < 0.6 - 1e-12) == 8
        assert np.sum((axis > 0.6 + 1e-12) & (axis < 0.8 - 1e-12)) == 3

    def test_doubling_nests(self):
        """Test that every coarse grid line survives refinement."""
        coarse = axis_coordinates(1.0, 16, [0.6, 0.8])
        fine = axis_coordinates(1.0, 32, [0.6, 0.8])

        assert fine.size == 33
        for x in coarse:
            assert np.min(np.abs(fine - x)) < 1e-14

    def test_no_lines_is_uniform(self):
        """Test that an axis without lines is uniform."""
        np.testing.assert_allclose(axis_coordinates(2.0, 4), [0.0, 0.5, 1.0, 1.5, 2.0])

    def test_lines_outside_rejected(self):
        """Test that lines on or outside the ends are rejected."""
        with pytest.raises(InvalidArgumentError):
            axis_coordinates(1.0, 8, [1.0])
        with pytest.raises(InvalidArgumentError):
            axis_coordinates(1.0, 8, [-0.1])

    def test_too_few_cells_rejected(self):
        """Test that every segment needs a cell."""
        with pytest.raises(InvalidArgumentError):
            axis_coordinates(1.0, 2, [0.3, 0.6])

    def test_box_with_grid_lines(self):
        """Test that a box mesh has nodes on every requested line."""
        mesh = generate_box([1.0, 1.0], [8, 8], grid_lines=[[0.6, 0.8], [0.6, 0.8]])

        assert mesh.n_elements == 64
        assert mesh.element_measures().sum() == pytest.approx(1.0)
        for a in range(2):
            assert np.min(np.abs(mesh.nodes[:, a] - 0.6)) < 1e-14
            assert np.min(np.abs(mesh.nodes[:, a] - 0.8)) < 1e-14
        mesh.validate()

    def test_grid_lines_need_every_axis(self):
        """Test that a partial grid-line list is rejected."""
        with pytest.raises(InvalidArgumentError, match="one entry per axis"):
            generate_box([1.0, 1.0], [8, 8], grid_lines=[[0.5]])

    def test_interval_rejects_grid_lines(self):
        """Test that 1D boxes take no grid lines."""
        with pytest.raises(InvalidArgumentError):
            generate_box([1.0], [8], grid_lines=[[0.5]])


class TestMeshValidation:
    """Test structural invariants."""

    def test_facet_not_on_owner_rejected(self):
        """Test that a facet must belong to its owner element."""
        with pytest.raises(InvalidArgumentError):
            Mesh(
                dim=1,
                kind="segment",
                nodes=np.array([[0.0], [0.5], [1.0]]),
                elements=np.array([[0, 1], [1, 2]]),
                facet_nodes=np.array([[0], [2]]),
                facet_owner=np.array([1, 1]),
                facet_tags=np.array(["left", "right"], dtype=object),
            )

    def test_untagged_boundary_rejected(self):
        """Test that every boundary facet needs a tag."""
        mesh = Mesh(
            dim=1,
            kind="segment",
            nodes=np.array([[0.0], [0.5], [1.0]]),
            elements=np.array([[0, 1], [1, 2]]),
            facet_nodes=np.array([[0]]),
            facet_owner=np.array([0]),
            facet_tags=np.array(["left"], dtype=object),
        )
        with pytest.raises(InvalidArgumentError, match="carry no tag"):
            mesh.validate()

    def test_arrays_are_read_only(self):
        """Test that mesh arrays cannot be modified in place."""
        mesh = generate_interval(1.0, 2)
        with pytest.raises(ValueError):
            mesh.nodes[0, 0] = 5.0

    def test_unknown_cell_kind(self):
        """Test that unknown element kinds raise UnsupportedError."""
        with pytest.raises(UnsupportedError):
            get_cell("prism")


class TestMeshFormat:
    """Test the plain-text mesh format."""

    @pytest.mark.parametrize(
        "mesh",
        [
            generate_interval(2.0, 7),
            generate_box([1.0, 0.5], [3, 2]),
            generate_box([1.0, 1.0, 1.0], [2, 2, 2]),
            generate_annulus(0.3, 1.0, 2, 6),
        ],
        ids=["interval", "quad", "hex", "annulus"],
    )
    def test_write_read_reproduces_mesh(self, mesh):
        """Test that a written mesh reads back identically."""
        again = read_mesh(write_mesh(mesh))

        assert again.same_as(mesh)
        assert write_mesh(again) == write_mesh(mesh)

    def test_triangles_accepted(self):
        """Test a two-triangle square read from text."""
        text = """dpp-mesh v1 dim=2
        nodes 4
        0 0
        1 0
        1 1
        0 1
        elements 2
        triangle 0 1 2
        triangle 0 2 3
        facets 4
        bottom 0 0 1
        right 0 1 2
        top 1 2 3
        left 1 3 0
        """
        mesh = read_mesh(text)

        assert mesh.kind == "triangle"
        assert mesh.element_measures().sum() == pytest.approx(1.0)
        mesh.validate()

    def test_comments_are_ignored(self):
        """Test that '#' starts a comment."""
        text = write_mesh(generate_interval(1.0, 2)).replace("nodes 3", "nodes 3  # three nodes")
        assert read_mesh(text).n_nodes == 3

    def test_bad_header_reports_line(self):
        """Test that a bad header is reported on line 1."""
        with pytest.raises(MeshParseError) as info:
            read_mesh("mesh v2\n")
        assert info.value.line_number == 1

    def test_out_of_range_node_reports_line(self):
        """Test that an element referencing a missing node names its line."""
        text = "dpp-mesh v1 dim=1\nnodes 2\n0\n1\nelements 1\nsegment 0 5\nfacets 0\n"
        with pytest.raises(MeshParseError) as info:
            read_mesh(text)
        assert info.value.line_number == 6

    def test_truncated_document(self):
        """Test that a missing facets section is an error."""
        text = "dpp-mesh v1 dim=1\nnodes 2\n0\n1\nelements 1\nsegment 0 1\n"
        with pytest.raises(MeshParseError, match="facets"):
            read_mesh(text)

    def test_facet_with_wrong_owner_reports_its_line(self):
        """Test that an owner mismatch is traced back to the facet line."""
        text = (
            "dpp-mesh v1 dim=1\nnodes 3\n0\n0.5\n1\nelements 2\n"
            "segment 0 1\nsegment 1 2\nfacets 2\nleft 1 0\nright 1 2\n"
        )
        with pytest.raises(MeshParseError) as info:
            read_mesh(text)
        assert info.value.line_number == 10
