"""Tests for problem data: material checks, boundary splits and seeded perturbations."""

import numpy as np
import pytest

from dpflow.errors import InvalidArgumentError
from dpflow.mesh import generate_box
from dpflow.models.types import (
    BoundarySpec,
    MaterialData,
    NetworkBoundary,
    QuadratureField,
    TransientData,
    TransportBoundary,
    TransportData,
)
from dpflow.problem import (
    mass_transfer,
    needs_datum_constraint,
    perturbed_permeability,
    random_initial_concentration,
    validate_boundary_spec,
    viscosity_of_concentration,
)

BOX_TAGS = ("bottom", "right", "top", "left")


class TestMassTransfer:
    """Test the exchange and viscosity laws."""

    def test_sign(self):
        """Test that mass leaves the network with the higher pressure."""
        chi = mass_transfer(np.array([2.0, 1.0]), np.array([1.0, 1.0]), 0.5, 2.0)
        np.testing.assert_allclose(chi, [-0.25, 0.0])
        assert not np.signbit(chi[1])

    def test_positive_viscosity(self):
        """Test that mu must be positive."""
        with pytest.raises(InvalidArgumentError):
            mass_transfer(1.0, 0.0, 1.0, 0.0)

    def test_viscosity_law(self):
        """Test mu(c) = mu0 exp(Rc (1 - c))."""
        mu = viscosity_of_concentration(np.array([0.0, 1.0]), 0.001, 3.0)
        np.testing.assert_allclose(mu, [0.001 * np.exp(3.0), 0.001])
        with pytest.raises(InvalidArgumentError):
            viscosity_of_concentration(0.5, 0.0, 3.0)


class TestMaterialData:
    """Test material validation and sampling."""

    def test_sampling_shapes(self):
        """Test that scalar data broadcasts to tensors at the sample points."""
        points = np.zeros((4, 3, 2))
        c = MaterialData(mu=2.0, gamma_b=np.array([0.0, -9.8]), K1=1.0, K2=np.diag([0.1, 0.2])).sample(points)

        assert c.mu.shape == (4, 3)
        assert c.gamma_b.shape == (4, 3, 2)
        np.testing.assert_allclose(c.K1[0, 0], np.eye(2))
        np.testing.assert_allclose(c.permeability(2)[1, 2], np.diag([0.1, 0.2]))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mu": 0.0},
            {"beta": -1.0},
            {"K1": -1.0},
            {"K2": np.array([[1.0, 2.0], [0.0, 1.0]])},
            {"K2": np.array([[1.0, 0.0], [0.0, -1.0]])},
        ],
    )
    def test_invalid(self, kwargs):
        """Test rejected viscosities, exchange coefficients and permeabilities."""
        with pytest.raises(InvalidArgumentError):
            MaterialData(**kwargs)

    def test_callable_permeability_checked_when_sampled(self):
        """Test that a position-dependent tensor is checked at the sample points."""
        material = MaterialData(K1=lambda x: -np.ones(x.shape[:-1]))
        with pytest.raises(InvalidArgumentError):
            material.sample(np.zeros((2, 2)))

    def test_quadrature_viscosity(self):
        """Test viscosity given at quadrature points."""
        values = np.full((3, 4), 2.5)
        material = MaterialData().with_viscosity(QuadratureField(values))
        np.testing.assert_allclose(material.sample(np.zeros((3, 4, 2))).mu, values)
        with pytest.raises(InvalidArgumentError):
            material.sample(np.zeros((2, 4, 2)))


class TestBoundarySpec:
    """Test boundary partitions and the datum decision."""

    def sealed(self, pressure_tags=()):
        pressure = {tag: 0.0 for tag in pressure_tags}
        velocity = {tag: 0.0 for tag in BOX_TAGS if tag not in pressure}
        return NetworkBoundary(pressure=pressure, velocity=velocity)

    def test_complete_partition(self):
        """Test a valid split of every tag."""
        spec = BoundarySpec(self.sealed(("left",)), self.sealed())
        validate_boundary_spec(spec, BOX_TAGS)
        assert spec.network(1).tags == set(BOX_TAGS)

    def test_overlap_rejected(self):
        """Test a tag carrying both kinds of data."""
        macro = NetworkBoundary(pressure={"left": 1.0}, velocity={tag: 0.0 for tag in BOX_TAGS})
        with pytest.raises(InvalidArgumentError, match="both pressure and velocity"):
            validate_boundary_spec(BoundarySpec(macro, self.sealed()), BOX_TAGS)

    def test_unknown_and_missing_tags(self):
        """Test tags absent from the mesh and tags without data."""
        extra = NetworkBoundary(velocity={tag: 0.0 for tag in (*BOX_TAGS, "hole_1")})
        with pytest.raises(InvalidArgumentError, match="unknown boundary tags"):
            validate_boundary_spec(BoundarySpec(self.sealed(), extra), BOX_TAGS)
        partial = NetworkBoundary(velocity={"left": 0.0})
        with pytest.raises(InvalidArgumentError, match="no boundary data"):
            validate_boundary_spec(BoundarySpec(self.sealed(), partial), BOX_TAGS)

    def test_network_index(self):
        """Test that only networks 1 and 2 exist."""
        with pytest.raises(InvalidArgumentError):
            BoundarySpec(self.sealed(), self.sealed()).network(0)

    def test_datum_needed_without_pressure(self):
        """Test the datum decision with and without pressure data."""
        mesh = generate_box([1.0, 1.0], [2, 2])
        assert needs_datum_constraint(BoundarySpec(self.sealed(), self.sealed()), mesh)
        assert not needs_datum_constraint(BoundarySpec(self.sealed(), self.sealed(("top",))), mesh)

    def test_datum_ignores_empty_tags(self):
        """Test that pressure on a tag without facets does not fix the level."""
        mesh = generate_box([1.0, 1.0], [2, 2])
        macro = NetworkBoundary(pressure={"hole_1": 1.0}, velocity={tag: 0.0 for tag in BOX_TAGS})
        assert needs_datum_constraint(BoundarySpec(macro, self.sealed()), mesh)
        assert not needs_datum_constraint(BoundarySpec(macro, self.sealed()))


class TestTransientData:
    """Test the time grid and the density checks."""

    def test_time_grid(self):
        """Test a grid whose last step is shortened to end at T."""
        data = TransientData.from_fractions(0.3, 0.2, 1.0, dt=0.4, T=1.0)
        np.testing.assert_allclose(data.time_grid(), [0.4, 0.8, 1.0])
        assert data.density(1) == pytest.approx(0.3)
        assert data.density(2) == pytest.approx(0.2)

    def test_exact_multiple(self):
        """Test that round-off does not add a tiny extra step."""
        data = TransientData.from_fractions(0.3, 0.2, 1e-12, dt=5e-11, T=6e-8)
        grid = data.time_grid()
        assert grid.size == 1200
        assert grid[-1] == 6e-8

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt": 0.0, "T": 1.0},
            {"dt": 0.5, "T": 0.1},
            {"rho1": -1.0},
        ],
    )
    def test_invalid(self, kwargs):
        """Test rejected steps and densities."""
        base = {"rho1": 0.3, "rho2": 0.2, "phi1": 0.3, "phi2": 0.2, "dt": 0.1, "T": 1.0}
        with pytest.raises(InvalidArgumentError):
            TransientData(**{**base, **kwargs})


class TestTransportData:
    """Test transport data validation."""

    def test_defaults(self):
        """Test the default advecting velocity and boundary kind."""
        data = TransportData(mu0=1.0, Rc=0.0, D=0.0)
        assert data.velocity_mode == "sum"
        assert TransportBoundary().kind == "flux"
        assert TransportBoundary().value == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mu0": 0.0},
            {"D": -1.0},
            {"D": np.array([[1.0, 0.0], [0.0, -1.0]])},
            {"velocity_mode": "micro"},
            {"boundary": {"left": TransportBoundary("robin", 1.0)}},
        ],
    )
    def test_invalid(self, kwargs):
        """Test rejected transport data."""
        base = {"mu0": 1.0, "Rc": 3.0, "D": 1e-3}
        with pytest.raises(InvalidArgumentError):
            TransportData(**{**base, **kwargs})


class TestSeededFields:
    """Test the reproducible perturbations."""

    def test_permeability_perturbation(self):
        """Test determinism, bounds and seed dependence of the permeability field."""
        x = np.random.default_rng(1).uniform(0.0, 1.0, size=(50, 2)) * [1.0, 0.4]
        first = perturbed_permeability(2.0, 0.1, 5, [1.0, 0.4])(x)
        again = perturbed_permeability(2.0, 0.1, 5, [1.0, 0.4])(x)
        other = perturbed_permeability(2.0, 0.1, 6, [1.0, 0.4])(x)

        assert first.shape == (50, 2, 2)
        np.testing.assert_array_equal(first, again)
        assert not np.allclose(first, other)
        diagonal = first[:, 0, 0]
        assert np.all((diagonal >= 1.8 - 1e-12) & (diagonal <= 2.2 + 1e-12))
        np.testing.assert_array_equal(first[:, 0, 1], 0.0)

    def test_permeability_amplitude_range(self):
        """Test that the amplitude must keep the tensor positive."""
        with pytest.raises(InvalidArgumentError):
            perturbed_permeability(1.0, 1.0, 0, [1.0, 1.0])

    def test_initial_concentration(self):
        """Test determinism and bounds of the seeded initial state."""
        x = np.zeros((100, 2))
        c0 = random_initial_concentration(0.0, 0.01, 3)

        np.testing.assert_array_equal(c0(x), c0(x))
        assert np.all(np.abs(c0(x)) <= 0.01)
        assert not np.array_equal(c0(x), random_initial_concentration(0.0, 0.01, 4)(x))
