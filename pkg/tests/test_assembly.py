"""Tests for the flow, Nitsche and transport assemblers."""

import numpy as np
import pytest

from dpflow.assembly import (
    STABILIZATION,
    FlowAssembler,
    assemble_galerkin,
    assemble_stab_norm_weights,
    assemble_stabilized,
    assemble_transient_step,
    assemble_transport_step,
    nitsche_terms,
    project_trace,
    strong_velocity_rows,
    supg_parameter,
)
from dpflow.drivers import total_mass
from dpflow.errors import InvalidArgumentError, UnsupportedError
from dpflow.fespace import ElementGeometry, build_dofmap, interpolate
from dpflow.linsolve import solve_direct
from dpflow.mesh import generate_annulus, generate_box, generate_interval
from dpflow.models.types import (
    BoundarySpec,
    MaterialData,
    NetworkBoundary,
    TransientData,
    TransportBoundary,
    TransportData,
)


def pressure_everywhere(mesh, value=0.0):
    """Boundary data prescribing pressure on every tag of both networks."""
    pressure = {tag: value for tag in mesh.boundary_tags()}
    return BoundarySpec(NetworkBoundary(pressure=dict(pressure)), NetworkBoundary(pressure=dict(pressure)))


def sampled_configurations():
    """Meshes, orders and materials for the coercivity identity."""
    rng = np.random.default_rng(11)
    configurations = []
    for k in range(20):
        choice = k % 5
        if choice == 0:
            mesh = generate_interval(float(rng.uniform(0.5, 2.0)), int(rng.integers(2, 6)))
        elif choice == 1:
            mesh = generate_box(rng.uniform(0.5, 2.0, size=2), rng.integers(1, 4, size=2))
        elif choice == 2:
            mesh = generate_annulus(0.3, 1.0, int(rng.integers(1, 3)), int(rng.integers(6, 10)))
        elif choice == 3:
            mesh = generate_box(rng.uniform(0.5, 1.5, size=3), [1, 2, 1])
        else:
            mesh = generate_box([1.0, 1.0], [2, 2])
        order = int(rng.integers(1, 3 if mesh.dim == 3 else 4))
        d = mesh.dim
        k1 = np.diag(rng.uniform(0.1, 10.0, size=d))
        k2 = np.diag(rng.uniform(0.01, 1.0, size=d))
        material = MaterialData(mu=float(rng.uniform(0.5, 2.0)), beta=float(rng.uniform(0.0, 3.0)), K1=k1, K2=k2)
        configurations.append((mesh, order, material))
    return configurations


class TestStabilizedForm:
    """Test the stabilized operator against the stability norm."""

    @pytest.mark.parametrize("mesh,order,material", sampled_configurations())
    def test_quadratic_form_equals_stab_norm(self, mesh, order, material):
        """Test x^T A x = ||x||_stab^2 for random coefficient vectors."""
        dofmap = build_dofmap(mesh, order)
        assembler = FlowAssembler(dofmap, material, pressure_everywhere(mesh))
        matrix = assembler.matrix()
        weights = assemble_stab_norm_weights(mesh, dofmap, material, assembler.geometry)
        rng = np.random.default_rng(order + mesh.n_elements)
        for _ in range(100):
            x = rng.standard_normal(dofmap.n_dofs)
            form = float(x @ (matrix @ x))
            assert form == pytest.approx(weights.squared(x), rel=1e-10)
            assert form >= -1e-12 * float(x @ x)

    @pytest.mark.parametrize("order", [1, 2])
    def test_form_bounded_by_stab_norms(self, order):
        """Test |x^T A y| <= 2 ||x||_stab ||y||_stab for fields with zero normal velocity."""
        mesh = generate_box([1.0, 0.8], [3, 2])
        dofmap = build_dofmap(mesh, order)
        walls = {tag: 0.0 for tag in mesh.boundary_tags()}
        spec = BoundarySpec(NetworkBoundary(velocity=dict(walls)), NetworkBoundary(velocity=dict(walls)))
        material = MaterialData(mu=1.5, beta=0.7, K1=np.diag([2.0, 0.5]), K2=np.diag([0.1, 0.05]))
        assembler = FlowAssembler(dofmap, material, spec)
        matrix = assembler.matrix()
        weights = assemble_stab_norm_weights(mesh, dofmap, material, assembler.geometry)
        rows, _ = strong_velocity_rows(dofmap, spec)
        rng = np.random.default_rng(order)
        for _ in range(100):
            x, y = rng.standard_normal((2, dofmap.n_dofs))
            x[rows] = 0.0
            y[rows] = 0.0
            bound = 2.0 * weights.norm(x) * weights.norm(y)
            assert abs(float(x @ (matrix @ y))) <= bound * (1 + 1e-10) + 1e-9

    def test_stabilization_weight(self):
        """Test the stabilization weight."""
        assert STABILIZATION == 0.5

    def test_galerkin_form_has_no_pressure_gradient_part(self):
        """Test that the Galerkin quadratic form vanishes for equal pressures and zero velocity."""
        mesh = generate_box([1.0, 1.0], [2, 2])
        dofmap = build_dofmap(mesh, 1)
        system = assemble_galerkin(mesh, dofmap, MaterialData(K2=0.1), pressure_everywhere(mesh))
        x = interpolate(dofmap, p1=lambda x: x[..., 0], p2=lambda x: x[..., 0])
        assert float(x @ (system.matrix @ x)) == pytest.approx(0.0, abs=1e-13)

    def test_datum_multiplier_added_without_pressure_data(self):
        """Test that a pure velocity problem gets one multiplier row."""
        mesh = generate_box([1.0, 1.0], [2, 2])
        dofmap = build_dofmap(mesh, 1)
        velocity = {tag: 0.0 for tag in mesh.boundary_tags()}
        spec = BoundarySpec(NetworkBoundary(velocity=dict(velocity)), NetworkBoundary(velocity=dict(velocity)))
        system = assemble_stabilized(mesh, dofmap, MaterialData(), spec)

        assert system.constraint is not None
        assert system.size == dofmap.n_dofs + 1
        np.testing.assert_allclose(system.constraint.weights.sum(), 1.0)

    def test_no_multiplier_with_pressure_data(self):
        """Test that pressure data fixes the datum."""
        mesh = generate_interval(1.0, 4)
        dofmap = build_dofmap(mesh, 1)
        system = assemble_stabilized(mesh, dofmap, MaterialData(), pressure_everywhere(mesh, 1.0))
        assert system.constraint is None
        assert system.size == dofmap.n_dofs

    def test_unknown_formulation(self):
        """Test that unknown formulations are rejected."""
        mesh = generate_interval(1.0, 2)
        with pytest.raises(InvalidArgumentError):
            FlowAssembler(build_dofmap(mesh, 1), MaterialData(), pressure_everywhere(mesh), "mixed")

    def test_incomplete_boundary_data(self):
        """Test that every tag needs data in both networks."""
        mesh = generate_interval(1.0, 2)
        spec = BoundarySpec(NetworkBoundary(pressure={"left": 1.0}), NetworkBoundary(pressure={"left": 1.0}))
        with pytest.raises(InvalidArgumentError, match="no boundary data"):
            assemble_stabilized(mesh, build_dofmap(mesh, 1), MaterialData(), spec)

    def test_transient_step_adds_inertia(self):
        """Test that the transient drag exceeds the steady drag by rho/dt times the mass."""
        mesh = generate_interval(1.0, 3)
        dofmap = build_dofmap(mesh, 1)
        spec = pressure_everywhere(mesh)
        transient = TransientData.from_fractions(0.3, 0.2, 2.0, dt=0.1, T=1.0)
        zeros = np.zeros(dofmap.n_scalar)
        step = assemble_transient_step(mesh, dofmap, MaterialData(), transient, spec, zeros, zeros)
        x = interpolate(dofmap, u1=1.0)
        # alpha = 1 + rho1/dt = 7 in network 1; form = (alpha - alpha^2/(2 alpha)) |u|^2 = alpha/2
        assert float(x @ (step.matrix @ x)) == pytest.approx(0.5 * (1.0 + 0.6 / 0.1))


class TestVelocityConditions:
    """Test strong and weak velocity data."""

    def test_strong_rows_on_square(self):
        """Test that wall data fixes the normal component only."""
        mesh = generate_box([1.0, 1.0], [2, 2])
        dofmap = build_dofmap(mesh, 1)
        spec = BoundarySpec(
            NetworkBoundary(pressure={"left": 1.0, "right": 0.0}, velocity={"bottom": 0.0, "top": 2.0}),
            NetworkBoundary(pressure={tag: 0.0 for tag in mesh.boundary_tags()}),
        )
        rows, values = strong_velocity_rows(dofmap, spec)
        n = dofmap.n_scalar
        # u1_y block on bottom and top nodes
        assert set(np.unique(rows) // n) == {1}
        bottom = dofmap.nodes_with_tag("bottom")
        assert set(bottom + n) <= set(rows.tolist())
        top_values = values[np.isin(rows, dofmap.nodes_with_tag("top") + n)]
        np.testing.assert_allclose(top_values, 2.0)

    def test_inward_normal_sign(self):
        """Test that u.n data on a left edge becomes -u_x."""
        mesh = generate_box([1.0, 1.0], [1, 1])
        dofmap = build_dofmap(mesh, 1)
        spec = BoundarySpec(
            NetworkBoundary(pressure={"right": 0.0, "top": 0.0, "bottom": 0.0}, velocity={"left": -3.0}),
            NetworkBoundary(pressure={tag: 0.0 for tag in mesh.boundary_tags()}),
        )
        rows, values = strong_velocity_rows(dofmap, spec)
        np.testing.assert_allclose(values, 3.0)

    def test_curved_boundary_needs_nitsche(self):
        """Test that strong data on a non-axis-aligned boundary is refused."""
        mesh = generate_annulus(0.3, 1.0, 2, 8)
        dofmap = build_dofmap(mesh, 1)
        spec = BoundarySpec(
            NetworkBoundary(pressure={"inner": 1.0, "outer": 0.0}),
            NetworkBoundary(velocity={"inner": 0.0, "outer": 0.0}),
        )
        with pytest.raises(UnsupportedError, match="Nitsche"):
            strong_velocity_rows(dofmap, spec)
        rows, _ = strong_velocity_rows(dofmap, spec, weak_tags=["inner", "outer"])
        assert rows.size == 0

    def test_nitsche_matrix_is_symmetric(self):
        """Test the symmetry of the consistency and penalty terms."""
        mesh = generate_annulus(0.3, 1.0, 2, 8)
        dofmap = build_dofmap(mesh, 2)
        spec = BoundarySpec(
            NetworkBoundary(pressure={"inner": 1.0, "outer": 0.0}),
            NetworkBoundary(velocity={"inner": 0.0, "outer": 0.0}),
        )
        matrix, rhs = nitsche_terms(dofmap, spec, ["inner", "outer"], eta=10.0)
        assert abs(matrix - matrix.T).max() < 1e-12
        np.testing.assert_allclose(rhs, 0.0)

    def test_nitsche_penalty_value(self):
        """Test (eta/h) |u.n|^2 over the right edge of the unit square."""
        mesh = generate_box([1.0, 1.0], [2, 2])
        dofmap = build_dofmap(mesh, 1)
        spec = BoundarySpec(
            NetworkBoundary(pressure={"left": 0.0, "top": 0.0, "bottom": 0.0}, velocity={"right": 0.0}),
            NetworkBoundary(pressure={tag: 0.0 for tag in mesh.boundary_tags()}),
        )
        matrix, _ = nitsche_terms(dofmap, spec, ["right"], eta=10.0, consistency=False)
        x = interpolate(dofmap, u1=(1.0, 0.0))
        assert float(x @ (matrix @ x)) == pytest.approx(10.0 / 0.5)

    def test_negative_penalty_rejected(self):
        """Test that a negative penalty is an argument error."""
        mesh = generate_box([1.0, 1.0], [1, 1])
        spec = pressure_everywhere(mesh)
        with pytest.raises(InvalidArgumentError):
            nitsche_terms(build_dofmap(mesh, 1), spec, [], eta=-1.0)


def step_data(x, t):
    return np.where(x[..., 0] < 0.5, 1.0, 0.0)


def top_flux(dofmap, nodes, values):
    """Integral of the linear trace along the top edge."""
    order = np.argsort(dofmap.node_coords[nodes, 0])
    xs = dofmap.node_coords[nodes[order], 0]
    vs = values[order]
    return float(np.sum(0.5 * (vs[1:] + vs[:-1]) * np.diff(xs)))


class TestTraceProjection:
    """Test projected normal-velocity data."""

    def test_step_data_keeps_its_flux(self):
        """Test that a step ending on a node keeps its integral, unlike sampling."""
        mesh = generate_box([1.0, 1.0], [4, 2])
        dofmap = build_dofmap(mesh, 1)
        facets = mesh.facets_with_tag("top")

        nodes, values = project_trace(dofmap, facets, step_data)
        sampled = step_data(dofmap.node_coords[nodes], 0.0)

        assert top_flux(dofmap, nodes, values) == pytest.approx(0.5, rel=1e-10)
        assert top_flux(dofmap, nodes, sampled) == pytest.approx(0.375)

    def test_linear_data_reproduced(self):
        """Test that data in the trace space projects onto itself."""
        mesh = generate_box([1.0, 1.0], [3, 2])
        dofmap = build_dofmap(mesh, 2)
        facets = mesh.facets_with_tag("bottom")

        nodes, values = project_trace(dofmap, facets, lambda x, t: 2.0 * x[..., 0] - 0.5)

        np.testing.assert_allclose(values, 2.0 * dofmap.node_coords[nodes, 0] - 0.5, atol=1e-12)

    def test_projected_rows(self):
        """Test that the projected trace feeds the strong velocity rows."""
        mesh = generate_box([1.0, 1.0], [4, 2])
        dofmap = build_dofmap(mesh, 1)
        spec = BoundarySpec(
            NetworkBoundary(pressure={"left": 0.0, "right": 0.0, "bottom": 0.0}, velocity={"top": step_data}),
            NetworkBoundary(pressure={tag: 0.0 for tag in mesh.boundary_tags()}),
            velocity_trace="project",
        )
        rows, values = strong_velocity_rows(dofmap, spec)
        n = dofmap.n_scalar

        assert set(np.unique(rows) // n) == {1}
        assert top_flux(dofmap, rows - n, values) == pytest.approx(0.5, rel=1e-10)

    def test_unknown_trace_rejected(self):
        """Test that only sampling and projection are accepted."""
        with pytest.raises(InvalidArgumentError, match="velocity trace"):
            BoundarySpec(NetworkBoundary(), NetworkBoundary(), velocity_trace="nearest")


class TestTransport:
    """Test the SUPG transport step."""

    def test_supg_parameter_limits(self):
        """Test the advective and diffusive limits of tau."""
        tau = supg_parameter(np.array([0.0, 2.0, 1e-3]), np.array(0.1), np.array([1.0, 0.0, 1.0]))
        assert tau[0] == 0.0
        assert tau[1] == pytest.approx(0.1 / 4.0)
        assert tau[2] == pytest.approx(0.1**2 / 12.0)

    def test_uniform_state_is_preserved(self):
        """Test that c = 1 stays 1 under uniform flow with inflow value 1."""
        mesh = generate_box([1.0, 0.5], [6, 3])
        dofmap = build_dofmap(mesh, 1)
        transport = TransportData(
            mu0=1.0,
            Rc=0.0,
            D=1e-3,
            boundary={"left": TransportBoundary("dirichlet", 1.0), "right": TransportBoundary("outflow")},
        )
        velocity = np.tile([1.0, 0.0], (dofmap.n_scalar, 1))
        system = assemble_transport_step(mesh, dofmap, velocity, transport, 0.1, np.ones(dofmap.n_scalar))
        c, _ = solve_direct(system)
        np.testing.assert_allclose(c, 1.0, atol=1e-10)

    def test_mass_conserved_without_flow(self):
        """Test that pure diffusion with zero flux keeps the total amount."""
        mesh = generate_interval(1.0, 8)
        dofmap = build_dofmap(mesh, 1)
        transport = TransportData(mu0=1.0, Rc=0.0, D=0.1)
        c0 = np.exp(-((dofmap.node_coords[:, 0] - 0.3) ** 2) / 0.01)
        system = assemble_transport_step(mesh, dofmap, lambda x: np.zeros_like(x), transport, 0.05, c0)
        c, _ = solve_direct(system)
        lumped = np.full(dofmap.n_scalar, 1.0 / 8)
        lumped[[0, -1]] /= 2
        assert lumped @ c == pytest.approx(lumped @ c0, rel=1e-10)

    def test_mass_change_equals_boundary_flux_without_diffusion(self):
        """Test that with D = 0 the amount of solute changes by the net boundary flux."""
        mesh = generate_interval(1.0, 10)
        dofmap = build_dofmap(mesh, 1)
        geometry = ElementGeometry.build(mesh, 1)
        transport = TransportData(
            mu0=1.0,
            Rc=0.0,
            D=0.0,
            boundary={"left": TransportBoundary("flux", -1.0), "right": TransportBoundary("outflow")},
        )
        c0 = 0.5 + 0.3 * np.sin(np.pi * dofmap.node_coords[:, 0])
        dt = 0.05
        system = assemble_transport_step(mesh, dofmap, lambda x: np.ones_like(x), transport, dt, c0)
        c, _ = solve_direct(system)
        outflow = c[dofmap.nodes_with_tag("right")][0]

        change = total_mass(geometry, dofmap, c) - total_mass(geometry, dofmap, c0)
        assert change == pytest.approx(dt * (1.0 - outflow), abs=1e-12)

    def test_gaussian_pulse_is_advected(self):
        """Test that a pulse moves with the flow, keeps its mass and barely undershoots."""
        mesh = generate_interval(1.0, 200)
        dofmap = build_dofmap(mesh, 1)
        geometry = ElementGeometry.build(mesh, 1)
        transport = TransportData(
            mu0=1.0,
            Rc=0.0,
            D=0.0,
            boundary={"left": TransportBoundary("dirichlet", 0.0), "right": TransportBoundary("outflow")},
        )
        x = dofmap.node_coords[:, 0]
        c = np.exp(-0.5 * ((x - 0.3) / 0.05) ** 2)
        mass0 = total_mass(geometry, dofmap, c)
        dt = 0.0025
        for step in range(1, 121):
            system = assemble_transport_step(
                mesh, dofmap, lambda p: np.ones_like(p), transport, dt, c, t=step * dt, geometry=geometry
            )
            c, _ = solve_direct(system)

        assert x[np.argmax(c)] == pytest.approx(0.6, abs=0.01)
        assert 0.6 < c.max() <= 1.0
        assert c.min() > -0.02
        assert total_mass(geometry, dofmap, c) == pytest.approx(mass0, rel=1e-3)

    def test_bad_previous_state(self):
        """Test that prev_c must match the scalar node count."""
        mesh = generate_interval(1.0, 2)
        dofmap = build_dofmap(mesh, 1)
        with pytest.raises(InvalidArgumentError):
            assemble_transport_step(mesh, dofmap, np.zeros((3, 1)), TransportData(1.0, 0.0, 0.0), 0.1, np.zeros(5))
