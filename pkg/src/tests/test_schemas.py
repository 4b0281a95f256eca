"""
Tests for run-file validation and preset resolution.
"""
from pathlib import Path

import pytest
import yaml

from src.cli.schemas import build_run_config, dump_run_config, load_run_config
from src.config.settings import TestingConfig
from src.domain.entities.case_spec import CaseName
from src.domain.exceptions import ConfigurationError
from src.domain.value_objects.dissipation import DissipationMode
from src.domain.value_objects.spline_space import Boundary


def from_yaml(text: str, **kwargs):
    return build_run_config(yaml.safe_load(text), **kwargs)


class TestRunConfigSchema:
    """Test RunConfigSchema through build_run_config."""

    def test_case_only_gives_desk_preset(self):
        """Test a file naming only the case resolves the desk parameters."""
        config = from_yaml("case: OrszagTangIdeal\n", output_root="out")
        assert config.case.name is CaseName.ORSZAG_TANG_IDEAL
        assert config.case.cells == (64, 64)
        assert config.case.provenance["preset"] == "desk"
        assert config.case.provenance["overrides"] == []
        assert config.output_dir == Path("out") / "OrszagTangIdeal-desk"

    def test_published_preset(self):
        """Test preset: published keeps the published resolution."""
        config = from_yaml("case: OrszagTangIdeal\npreset: published\n")
        assert config.case.cells == (256, 256)

    def test_overrides_are_recorded(self):
        """Test overridden keys land in the provenance."""
        config = from_yaml(
            "case: CurrentSheet1D\n"
            "geometry: {cells: [64]}\n"
            "time: {dt: 0.05, t_end: 1.0}\n"
            "parameters: {by0: 2.0e-3}\n"
        )
        assert config.case.cells == (64,)
        assert config.case.dt == 0.05
        assert config.case.parameter("by0") == 2e-3
        assert config.case.parameter("t0") == 10.0
        assert config.case.provenance["overrides"] == ["by0", "cells", "dt", "t_end"]

    def test_bare_off_dissipation(self):
        """Test YAML `off` (read as false) switches dissipation off."""
        config = from_yaml("case: OrszagTangIdeal\nphysics: {mu: off, eta: 0.01}\n")
        assert config.case.mu.mode is DissipationMode.OFF
        assert config.case.eta.mode is DissipationMode.CONSTANT

    def test_artificial_dissipation(self):
        """Test the mesh-scaled artificial form."""
        config = from_yaml("case: KelvinHelmholtz\nphysics: {mu: {artificial: 2h2}}\n")
        assert config.case.mu.mode is DissipationMode.ARTIFICIAL and config.case.mu.mesh_scaled

    def test_seed_goes_to_parameters(self):
        """Test the top-level seed reaches the case parameters."""
        config = from_yaml("case: Dispersion1D\nseed: 99\n")
        assert config.case.parameter("seed") == 99

    def test_growth_window_from_case(self):
        """Test the tearing run inherits its fit window unless the file sets one."""
        assert from_yaml("case: CurrentSheet2D\n").growth_window == (15.0, 30.0)
        config = from_yaml("case: CurrentSheet2D\nanalysis: {growth_window: [10, 20]}\n")
        assert config.growth_window == (10.0, 20.0)

    def test_solver_defaults_from_settings(self):
        """Test unset solver values come from the settings class."""
        config = from_yaml("case: OrszagTangIdeal\nsolver: {linear_tol: 1.0e-9}\n",
                           defaults=TestingConfig)
        assert config.linear_tol == 1e-9
        assert config.picard_tol == TestingConfig.NONLINEAR_TOL
        assert config.picard_max_iters == TestingConfig.MAX_NONLINEAR_ITERATIONS
        assert config.invariant_tol == TestingConfig.INVARIANT_TOL

    def test_invariant_bound(self):
        """Test solver.invariant_tol reaches the run configuration and its dump."""
        config = from_yaml("case: OrszagTangIdeal\nsolver: {invariant_tol: 1.0e-6}\n")
        assert config.invariant_tol == 1e-6
        assert config.to_config()["solver"]["invariant_tol"] == 1e-6
        assert from_yaml("case: OrszagTangIdeal\n").invariant_tol == 1e-9

    def test_boundaries_override(self):
        """Test boundary names are parsed into Boundary values."""
        config = from_yaml("case: CurrentSheet2D\ngeometry: {boundaries: [periodic, clamped]}\n")
        assert config.case.boundaries == (Boundary.PERIODIC, Boundary.CLAMPED)

    @pytest.mark.parametrize("text,fragment", [
        ("preset: desk\n", "case"),
        ("case: Tokamak3D\n", "case"),
        ("case: OrszagTangIdeal\npreset: huge\n", "preset"),
        ("case: OrszagTangIdeal\ngeometry: {cells: [8, 8], degrees: [2]}\n", "same length"),
        ("case: OrszagTangIdeal\ngeometry: {domains: [[1.0, 1.0], [0.0, 1.0]]}\n", "empty interval"),
        ("case: OrszagTangIdeal\ngeometry: {cells: [0, 8]}\n", "geometry.cells"),
        ("case: OrszagTangIdeal\ntime: {dt: -0.1}\n", "time.dt"),
        ("case: OrszagTangIdeal\nphysics: {gamma: 1.0}\n", "physics.gamma"),
        ("case: OrszagTangIdeal\nphysics: {mu: lots}\n", "physics.mu"),
        ("case: OrszagTangIdeal\noutput: {snapshot_every: 0}\n", "output.snapshot_every"),
        ("case: OrszagTangIdeal\nsolver: {max_nonlinear_iterations: 0}\n", "solver"),
        ("case: OrszagTangIdeal\nsolver: {invariant_tol: 0.0}\n", "solver.invariant_tol"),
    ])
    def test_invalid_files(self, text, fragment):
        """Test validation messages name the offending entry."""
        with pytest.raises(ConfigurationError) as exc_info:
            from_yaml(text)
        assert fragment in str(exc_info.value)

    def test_geometry_case_mismatch(self):
        """Test a clamped direction where the case needs periodicity."""
        with pytest.raises(ConfigurationError, match="periodic"):
            from_yaml("case: OrszagTangIdeal\ngeometry: {boundaries: [periodic, clamped]}\n")

    def test_dump_reloads_to_same_case(self, tmp_path):
        """Test a dumped configuration loads back to the same case."""
        config = from_yaml("case: Dispersion1D\ngeometry: {cells: [32]}\nseed: 5\n",
                           output_root=str(tmp_path))
        path = tmp_path / "dumped.yaml"
        path.write_text(dump_run_config(config))
        reloaded = load_run_config(path)
        assert reloaded.case.cells == config.case.cells
        assert reloaded.case.mu == config.case.mu
        assert reloaded.case.parameter("seed") == 5
        assert reloaded.output_dir == config.output_dir
