import numpy as np
import pytest

from app.core.errors import ConfigError, DomainMismatchError
from app.models.fields import ScalarField, TimeTrack, VectorField
from app.models.geometry import DomainTag
from app.solvers.channel_fields import (
    boundary_trace, divergence, gradient, l2_norm, l2_time_sobolev_norm, partial, sobolev_norm, spacetime_norm,
    time_sobolev_norm, trace_track,
)

LOWER = DomainTag.FLUID_LOWER


class TestDerivatives:
    def test_in_plane_derivative_is_spectrally_exact(self, geometry):
        f = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: np.sin(2 * y1) * np.cos(y2))
        expected = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: 2 * np.cos(2 * y1) * np.cos(y2))

        np.testing.assert_allclose(partial(f, 0).values, expected.values, atol=1e-12)

    def test_vertical_derivative_is_exact_for_quadratics(self, geometry):
        f = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: y3 ** 2)

        np.testing.assert_allclose(partial(f, 2).values, 2 * f.geometry.coordinates(LOWER)[2], atol=1e-12)

    def test_gradient_index_convention(self, geometry):
        v = VectorField.from_function(
            geometry, LOWER, lambda y1, y2, y3: np.stack([y3, np.zeros_like(y3), np.zeros_like(y3)]))

        G = gradient(v).values
        np.testing.assert_allclose(G[0, 2], 1.0, atol=1e-12)
        np.testing.assert_allclose(G[2, 0], 0.0, atol=1e-12)

    def test_divergence_of_linear_compression(self, geometry):
        v = VectorField.from_function(
            geometry, LOWER, lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), -0.3 * y3]))

        np.testing.assert_allclose(divergence(v).values, -0.3, atol=1e-12)

    def test_plane_fields_have_no_derivatives(self, geometry):
        plane = ScalarField.zeros(geometry, DomainTag.GAMMA_C_LOWER)
        with pytest.raises(DomainMismatchError):
            partial(plane, 0)


class TestTraces:
    def test_interface_trace_picks_the_interface_node(self, geometry):
        f = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: y3)

        trace = boundary_trace(f, DomainTag.GAMMA_C_LOWER)
        assert trace.tag == DomainTag.GAMMA_C_LOWER
        np.testing.assert_allclose(trace.values, geometry.L1)

    def test_trace_on_foreign_plane_is_rejected(self, geometry):
        f = ScalarField.zeros(geometry, LOWER)
        with pytest.raises(DomainMismatchError):
            boundary_trace(f, DomainTag.GAMMA_F_TOP)


class TestSobolevNorms:
    def test_constant_norm_is_root_volume(self, geometry):
        f = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: np.ones_like(y3))

        for s in (0.0, 1.0, 2.25):
            assert sobolev_norm(f, s) == pytest.approx(np.sqrt(geometry.volume(LOWER)), rel=1e-12)

    @pytest.mark.parametrize("k1,k2,s", [(1, 0, 1.0), (2, 1, 0.5), (3, 3, 2.25)])
    def test_single_mode_norm(self, geometry, k1, k2, s):
        f = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: np.cos(k1 * y1 + k2 * y2) + 0 * y3)

        expected = np.sqrt((1 + k1 ** 2 + k2 ** 2) ** s * geometry.volume(LOWER) / 2)
        assert sobolev_norm(f, s) == pytest.approx(expected, rel=1e-12)

    def test_order_zero_matches_quadrature(self, geometry, rng):
        f = ScalarField(geometry=geometry, tag=LOWER, values=rng.standard_normal(geometry.grid_shape(LOWER)))

        assert sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-12)

    def test_norm_grows_with_order(self, geometry, rng):
        f = VectorField(geometry=geometry, tag=LOWER, values=rng.standard_normal((3,) + geometry.grid_shape(LOWER)))

        norms = [sobolev_norm(f, s) for s in (0.0, 0.5, 1.0, 2.0)]
        assert norms == sorted(norms)

    def test_negative_order_is_rejected(self, geometry):
        with pytest.raises(ConfigError, match="nonnegative"):
            sobolev_norm(ScalarField.zeros(geometry, LOWER), -1.0)


class TestSpaceTimeNorms:
    def test_constant_in_time_l2_norm(self, geometry):
        f = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: np.cos(y1) * (1 + y3))
        track = TimeTrack.constant(f, dt=0.01, n_samples=9)

        assert l2_time_sobolev_norm(track, 0.0) == pytest.approx(np.sqrt(track.T) * l2_norm(f), rel=1e-12)
        assert spacetime_norm(track, (0.0, 0.0)) == pytest.approx(l2_time_sobolev_norm(track, 0.0), rel=1e-14)

    def test_time_order_adds_to_spatial_part(self, geometry, rng):
        values = rng.standard_normal((6, 3) + geometry.grid_shape(LOWER))
        track = TimeTrack(geometry=geometry, tag=LOWER, rank=1, dt=0.01, values=values)

        assert spacetime_norm(track, (1.0, 1.0)) >= l2_time_sobolev_norm(track, 1.0)
        assert time_sobolev_norm(track, 1.0) >= time_sobolev_norm(track, 0.0)

    def test_too_few_samples(self, geometry):
        track = TimeTrack.zeros(geometry, LOWER, 1, 0.01, 3)
        with pytest.raises(ConfigError, match="at least 4 samples"):
            time_sobolev_norm(track, 0.5)

    def test_trace_track_lives_on_the_plane(self, geometry):
        track = TimeTrack.zeros(geometry, LOWER, 1, 0.01, 5)

        trace = trace_track(track, DomainTag.GAMMA_C_LOWER)
        assert trace.values.shape == (5, 3, geometry.N1, geometry.N2)
