import numpy as np
import pandas as pd
import pytest

from app.core.errors import ConfigError
from app.models.geometry import DomainTag, build_geometry
from app.schemas.reports import MmsRow
from app.solvers.fsi_fixed_point import check_compatibility
from app.utils.helpers.artifacts import input_hash, write_table
from app.utils.helpers.convergence import observed_order, pairwise_orders
from app.utils.helpers.manufactured import build_coupling_data, compatible_data, interior_bump, random_data


class TestConvergence:
    def test_slope_of_a_power_law(self):
        steps = [0.1, 0.05, 0.025]

        assert observed_order(steps, [3.0 * h ** 2 for h in steps]) == pytest.approx(2.0)
        assert pairwise_orders(steps, [h for h in steps])[1:] == pytest.approx([1.0, 1.0])
        assert pairwise_orders(steps, [1.0, 0.0, 1.0]) == [None, None, None]

    def test_nonpositive_errors_are_rejected(self):
        with pytest.raises(ValueError):
            observed_order([0.1, 0.05], [1e-3, 0.0])


class TestArtifacts:
    def test_hash_ignores_key_order(self):
        assert input_hash({"a": 1, "b": 2}, 0) == input_hash({"b": 2, "a": 1}, 0)
        assert input_hash({"a": 1}, 0) != input_hash({"a": 1}, 1)

    def test_tables_keep_full_precision(self, tmp_path):
        rows = [MmsRow(study="temporal", level=4, step=0.1, max_error=1.0 / 3.0)]

        path = write_table(rows, tmp_path / "mms.csv")

        frame = pd.read_csv(path)
        assert frame["max_error"][0] == 1.0 / 3.0
        assert b"\r\n" not in path.read_bytes()


class TestInitialData:
    def test_compatible_data_need_positive_gamma(self, geometry, visc):
        with pytest.raises(ConfigError, match="gamma"):
            compatible_data(geometry, visc, gamma=0.0)

    def test_random_data_stay_compatible(self, geometry, visc, rng):
        data = random_data(geometry, visc, rng, amplitude=0.05)

        report = check_compatibility(data.v0, data.w1, data.R0, data.visc, data.w0)

        assert report.passed
        base = compatible_data(geometry, visc)
        assert np.abs(data.v0.lower.values - base.v0.lower.values).max() > 0.0

    def test_random_data_are_reproducible(self, geometry, visc):
        first = random_data(geometry, visc, np.random.default_rng(4))
        second = random_data(geometry, visc, np.random.default_rng(4))

        np.testing.assert_array_equal(first.v0.upper.values, second.v0.upper.values)

    def test_bump_needs_room(self, visc):
        geometry = build_geometry(1.0, 2.0, 3.0, 8, 8, 6, 8, 8)
        with pytest.raises(ConfigError, match="vertical intervals"):
            interior_bump(geometry, DomainTag.FLUID_LOWER)

    def test_bump_vanishes_near_slab_ends(self, geometry):
        bump = interior_bump(geometry, DomainTag.FLUID_UPPER)

        assert np.all(bump[..., :4] == 0.0) and np.all(bump[..., -4:] == 0.0)
        assert bump.max() > 0.0

    def test_unknown_kind(self, geometry, visc, rng):
        with pytest.raises(ConfigError, match="unknown data kind"):
            build_coupling_data("turbulent", geometry, visc, rng)
