"""Tests for the case registry, run configuration layering and the built-in cases."""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from dpflow.assembly import project_trace
from dpflow.cases import RunConfig, get_case, list_cases, resolve_config
from dpflow.cases.base import tensor, vector
from dpflow.cases.fingering import GROWTH_THRESHOLD
from dpflow.errors import ConfigError
from dpflow.fespace import build_dofmap

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
CASE_NAMES = [
    "candle",
    "conv1d",
    "conv2d",
    "fingering",
    "patch1d",
    "patch3d",
    "pipebend",
    "sphere_oracle",
    "transient2d",
]


def defaults_of(name, overrides=()):
    return resolve_config(f"[case]\nname = {name}\n", overrides)


class TestRegistry:
    """Test registration and lookup."""

    def test_list_cases(self):
        """Test that every built-in case is registered."""
        assert list_cases() == CASE_NAMES

    def test_unknown_case(self):
        """Test lookup of an unknown name."""
        with pytest.raises(KeyError, match="Unknown case"):
            get_case("nope")

    def test_descriptions(self):
        """Test that every case describes itself."""
        for name in CASE_NAMES:
            case = get_case(name)
            assert case.name == name
            assert case.description


class TestDefaults:
    """Test the data sets carried as case defaults."""

    def test_patch1d(self):
        """Test the constant-flow data set."""
        config = defaults_of("patch1d")
        assert config.material.k1 == [1.0]
        assert config.material.k2 == [0.01]
        assert config.problem["p1_left"] == 10.0
        assert config.problem["p2_right"] == 1.0

    def test_transient2d(self):
        """Test the channel data set."""
        config = defaults_of("transient2d")
        assert config.transient.dt == 5e-11
        assert config.transient.T == 6e-8
        assert config.material.k1 == [10000.0]
        holes = np.asarray(config.mesh.holes()).reshape(-1)
        np.testing.assert_allclose(holes, [2.8, 0.3, 3.2, 0.7, 6.8, 0.3, 7.2, 0.7])

    def test_fingering(self):
        """Test the displacement data set."""
        config = defaults_of("fingering")
        t = config.transport
        assert (t.u_inj, t.mu0, t.Rc, t.D, t.dt, t.T) == (0.004, 0.001, 3.0, 2e-6, 0.5, 150.0)
        assert config.mesh.cells == [128, 64]
        assert config.case.seed == 0

    def test_candle(self):
        """Test the weakly imposed walls of the candle filter."""
        config = defaults_of("candle")
        assert config.nitsche.tags == ["inner", "outer"]
        assert config.nitsche.eta == 10.0
        assert config.nitsche.h is None

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_shipped_configs(self, name):
        """Test that each shipped config file resolves to the case defaults."""
        text = (CONFIG_DIR / f"{name}.ini").read_text(encoding="utf-8")
        assert resolve_config(text).model_dump() == defaults_of(name).model_dump()


class TestRunConfig:
    """Test layering and validation of run configurations."""

    def test_layering(self):
        """Test defaults, then the document, then overrides."""
        text = "[case]\nname = patch1d\n[mesh]\ncells = 20\n[material]\nmu = 2.0\n"
        config = resolve_config(text, ["mesh.cells=40", "problem.p1_left=3"])

        assert config.mesh.cells == [40]
        assert config.material.mu == 2.0
        assert config.material.k2 == [0.01]
        assert config.problem["p1_left"] == 3.0

    def test_case_from_override(self):
        """Test that the case may be chosen by an override alone."""
        assert resolve_config("", ["case.name=conv2d"]).case.name == "conv2d"

    def test_lists(self):
        """Test space- and comma-separated lists."""
        config = defaults_of("conv2d", ["mesh.cells=4, 6", "material.k1=1 0.5"])
        assert config.mesh.cells == [4, 6]
        assert config.material.k1 == [1.0, 0.5]

    @pytest.mark.parametrize(
        "overrides",
        [
            ["mesh.colour=red"],
            ["mesh.cells=0"],
            ["discretization.order=0"],
            ["discretization.formulation=mixed"],
            ["material.beta=-1"],
            ["transport.k_perturbation=1.0"],
            ["missing-dot=1"],
            ["mesh.cells"],
        ],
    )
    def test_invalid_overrides(self, overrides):
        """Test rejected keys, values and override syntax."""
        with pytest.raises(ConfigError):
            defaults_of("patch1d", overrides)

    def test_missing_case(self):
        """Test a document that names no case."""
        with pytest.raises(ConfigError, match="names no case"):
            resolve_config("[mesh]\ncells = 4\n")

    def test_unknown_case(self):
        """Test a document naming an unregistered case."""
        with pytest.raises(KeyError):
            resolve_config("[case]\nname = nope\n")

    def test_malformed_document(self):
        """Test INI syntax errors."""
        with pytest.raises(ConfigError, match="malformed"):
            resolve_config("cells = 4\n")

    def test_ini_round_trip(self):
        """Test that the resolved INI reproduces the configuration."""
        config = defaults_of("candle", ["case.seed=3", "nitsche.h=0.05"])
        again = resolve_config(config.to_ini())
        assert again.model_dump() == config.model_dump()
        assert "h = 0.05" in config.to_ini()

    def test_hole_coordinates(self):
        """Test that hole centres must come in whole points."""
        config = defaults_of("transient2d", ["mesh.hole_centers=3.0 0.5 7.0"])
        with pytest.raises(ConfigError):
            config.mesh.holes()

    def test_model_is_strict(self):
        """Test that unknown sections are rejected."""
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"case": {"name": "patch1d"}, "extras": {}})


class TestConversions:
    """Test permeability and body force conversions."""

    def test_tensor(self):
        """Test scalar, diagonal and full permeabilities."""
        assert tensor([2.0], 2) == 2.0
        np.testing.assert_array_equal(tensor([1.0, 0.5], 2), np.diag([1.0, 0.5]))
        np.testing.assert_array_equal(tensor([1.0, 0.1, 0.1, 2.0], 2), [[1.0, 0.1], [0.1, 2.0]])
        with pytest.raises(ConfigError):
            tensor([1.0, 2.0, 3.0], 2)

    def test_vector(self):
        """Test scalar and full body forces."""
        assert vector([0.0], 3) == 0.0
        np.testing.assert_array_equal(vector([1.0, 1.0], 2), [1.0, 1.0])
        with pytest.raises(ConfigError):
            vector([1.0, 2.0, 3.0], 2)


class TestRuns:
    """Test the built-in cases end to end on small meshes."""

    def test_patch1d_passes(self):
        """Test the one-dimensional patch test."""
        result = get_case("patch1d").run(defaults_of("patch1d"))

        assert result.passed is True
        assert any(line.startswith("PATCH TEST: PASS") for line in result.lines)
        assert result.metrics["max_dev_u1"] < 1e-10
        assert result.to_frame()["case"].tolist() == ["patch1d"]

    def test_patch3d_passes(self):
        """Test the hexahedral patch test with impermeable lateral faces."""
        result = get_case("patch3d").run(defaults_of("patch3d", ["mesh.cells=2"]))
        assert result.passed is True

    def test_patch3d_galerkin_fails(self):
        """Test that the unstabilized equal-order form fails the hexahedral patch test."""
        result = get_case("patch3d").run(defaults_of("patch3d", ["discretization.formulation=galerkin"]))

        assert result.passed is False
        assert any(line.startswith("PATCH TEST: FAIL") for line in result.lines)

    @pytest.mark.parametrize("key,flux", [("star", 0.2), ("prime", 100.0 * 0.2**3 / 6.0)])
    def test_pipebend_windows_carry_exact_flux(self, key, flux):
        """Test that the projected window data carries the window flux on a coarse mesh."""
        case = get_case("pipebend")
        config = defaults_of("pipebend", ["mesh.cells=10 10"])
        mesh = case.mesh(config)
        dofmap = build_dofmap(mesh, 1)
        spec = case.data_sets(config)[key].spec

        for tag, axis, sign in (("left", 1, 1.0), ("bottom", 0, -1.0)):
            nodes, values = project_trace(dofmap, mesh.facets_with_tag(tag), spec.macro.velocity[tag])
            order = np.argsort(dofmap.node_coords[nodes, axis])
            s, v = dofmap.node_coords[nodes[order], axis], values[order]
            assert np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(s)) == pytest.approx(sign * flux, rel=1e-10)

    def test_pipebend_mesh_has_window_grid_lines(self):
        """Test that both window ends are grid lines on both axes."""
        mesh = get_case("pipebend").mesh(defaults_of("pipebend", ["mesh.cells=10 10"]))
        for axis in range(2):
            for end in (0.6, 0.8):
                assert np.min(np.abs(mesh.nodes[:, axis] - end)) < 1e-14

    def test_conv1d_reports_errors(self):
        """Test that a convergence case reports norms but no verdict."""
        result = get_case("conv1d").run(defaults_of("conv1d"))

        assert result.passed is None
        assert result.metrics["l2_p1"] > 0
        assert result.metrics["dofs"] == 44

    def test_sphere_oracle_has_no_mesh(self):
        """Test that the radial-only case refuses to build a mesh."""
        with pytest.raises(ConfigError):
            get_case("sphere_oracle").build(defaults_of("sphere_oracle"))

    def test_candle_needs_two_cell_counts(self):
        """Test the annulus cell specification."""
        with pytest.raises(ConfigError):
            get_case("candle").build(defaults_of("candle", ["mesh.cells=8"]))

    @pytest.mark.slow
    def test_sphere_oracle(self):
        """Test agreement of the two radial solvers for the hollow sphere."""
        result = get_case("sphere_oracle").run(defaults_of("sphere_oracle"))

        assert result.metrics["method_gap_p1"] < 1e-5
        assert result.metrics["wall_u2"] < 1e-8
        assert set(result.tables) == {"radial_collocation.csv", "radial_finite_difference.csv"}

    @pytest.mark.slow
    def test_candle(self):
        """Test the candle filter against the radial solution, and the gain from refinement."""
        coarse = get_case("candle").run(defaults_of("candle"))
        fine = get_case("candle").run(defaults_of("candle", ["mesh.cells=64 128"]))

        assert coarse.metrics["samples"] > 0
        assert "comparison.csv" in coarse.tables
        assert coarse.metrics["max_u2"] > 0
        for name in ("l2_rel_p1", "l2_rel_u1"):
            assert coarse.metrics[name] < 0.02
            assert fine.metrics[name] <= 0.65 * coarse.metrics[name]

    @pytest.mark.slow
    def test_pipebend(self):
        """Test that both data sets are solved and measured."""
        result = get_case("pipebend").run(defaults_of("pipebend", ["mesh.cells=8 8"]))

        assert result.metrics["dissipation_prime"] > 0
        assert result.metrics["dissipation_star"] > 0
        assert np.isfinite(result.metrics["reciprocal_error"])
        assert [suffix for suffix, _, _ in result.fields] == ["prime", "star"]

    @pytest.mark.slow
    def test_pipebend_ladder(self):
        """Test that the reciprocal error and the dissipation fall with h and p."""
        ladders = {1: (16, 32, 64), 2: (16, 32)}
        errors = {}
        dissipations = {}
        for order, ladder in ladders.items():
            results = [
                get_case("pipebend").run(
                    defaults_of("pipebend", [f"mesh.cells={n} {n}", f"discretization.order={order}"])
                )
                for n in ladder
            ]
            errors[order] = [r.metrics["reciprocal_error"] for r in results]
            dissipations[order] = {
                key: [r.metrics[f"dissipation_{key}"] for r in results] for key in ("prime", "star")
            }

        for values in errors.values():
            assert all(fine < coarse for coarse, fine in zip(values, values[1:]))
        # same meshes, higher order
        for linear, quadratic in zip(errors[1], errors[2]):
            assert quadratic < linear
        for values in dissipations[1].values():
            assert values[0] > values[1] > values[2]

    @pytest.mark.slow
    def test_transient2d(self):
        """Test a short run of the channel case."""
        config = defaults_of("transient2d", ["mesh.cells=40 8", "transient.T=1e-9"])
        result = get_case("transient2d").run(config)

        assert result.metrics["steps"] == 20
        assert isinstance(result.passed, bool)
        assert any(line.startswith("SETTLE ORDER:") for line in result.lines)
        assert len(result.tables["history.csv"]) == 21

    @pytest.mark.slow
    def test_transient2d_micro_network_settles_first(self):
        """Test the settle order on the full channel run."""
        result = get_case("transient2d").run(defaults_of("transient2d"))

        assert result.passed is True
        assert result.metrics["settle_time_u2"] < result.metrics["settle_time_u1"]

    @pytest.mark.slow
    def test_transient2d_time_order(self):
        """Test first-order convergence of backward Euler under dt halving."""
        overrides = ["mesh.cells=40 8", "transient.T=1e-9", "transient.self_convergence=true"]
        result = get_case("transient2d").run(defaults_of("transient2d", overrides))

        assert result.metrics["time_order"] >= 0.8

    @pytest.mark.slow
    def test_fingering(self):
        """Test a short seeded displacement run."""
        overrides = [
            "mesh.cells=16 8",
            "transport.T=2.0",
            "transport.early_time=1.0",
            "transport.keep_every=1",
            "case.seed=4",
        ]
        result = get_case("fingering").run(defaults_of("fingering", overrides))

        assert result.metrics["seed"] == 4
        assert result.metrics["variance_early"] > 0
        assert any(line.startswith("FINGERING:") for line in result.lines)
        assert result.fields[0][0] == "final"

    @pytest.mark.slow
    def test_fingering_grows_transverse_variance(self):
        """Test that the unstable displacement grows its transverse variance past the threshold."""
        result = get_case("fingering").run(defaults_of("fingering", ["mesh.cells=64 32"]))

        assert result.metrics["variance_growth"] >= GROWTH_THRESHOLD
        assert any(line.startswith("FINGERING: PRESENT") for line in result.lines)

    @pytest.mark.slow
    def test_stable_displacement_does_not_finger(self):
        """Test that uniform viscosity and permeability give no variance growth."""
        overrides = ["mesh.cells=64 32", "transport.Rc=0", "transport.k_perturbation=0"]
        result = get_case("fingering").run(defaults_of("fingering", overrides))

        assert result.metrics["variance_growth"] < 2.0
