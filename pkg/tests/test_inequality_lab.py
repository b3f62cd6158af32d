import numpy as np
import pytest
from scipy.signal.windows import hann

from app.core.errors import ConfigError
from app.models.fields import Pair, ScalarField, TimeTrack, VectorField
from app.models.geometry import DomainTag, build_geometry
from app.schemas.run_config import InequalityParams, LemmasConfig
from app.solvers.inequality_lab import (
    FrequencyPoint, check_grid, fit_grid, hidden_regularity_ratio, interpolation_constant, max_ratio, symbol_suite,
    trace_inequality_sides, verify_symbol_inequality, verify_trace_inequality,
)
from app.solvers.wave_elastic import solve_wave
from app.utils.helpers.manufactured import band_limited_field, band_limited_modes, band_limited_track, wave_data

LOWER = DomainTag.FLUID_LOWER


def windowed_power(n_samples, dt, pad=4):
    """|FFT of the Hann window|^2 dt / n_pad together with the angular frequencies."""
    hat = np.fft.fft(hann(n_samples, sym=True), n=pad * n_samples)
    tau = 2.0 * np.pi * np.fft.fftfreq(pad * n_samples, d=dt)
    return tau, np.abs(hat) ** 2 * dt / (pad * n_samples)


class TestTraceInequality:
    def test_sides_of_a_constant_in_time_mode(self, geometry):
        r, theta, dt, n = 1.0, 0.5, 0.02, 9
        field = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: np.cos(y1) + 0 * y3)
        values = np.zeros((n, 3) + geometry.grid_shape(LOWER))
        values[:, 0] = field.values
        u = TimeTrack(geometry=geometry, tag=LOWER, rank=1, dt=dt, values=values)

        lhs, rhs = trace_inequality_sides(u, r, theta)

        tau, power = windowed_power(n, dt)
        plane_sq = 2.0 * np.pi ** 2
        slab_sq = plane_sq * geometry.L1
        expected_lhs = np.sqrt(np.sum((1 + tau ** 2) ** theta * power) * plane_sq)
        A = np.sqrt(u.T * 2.0 ** r * slab_sq)
        B = np.sqrt(np.sum((1 + tau ** 2) ** (2 * theta * r / (2 * r - 1)) * power) * slab_sq)
        expected_rhs = A ** (1 / (2 * r)) * B ** ((2 * r - 1) / (2 * r)) + A
        assert lhs == pytest.approx(expected_lhs, rel=1e-10)
        assert rhs == pytest.approx(expected_rhs, rel=1e-10)

    def test_zero_track_is_skipped(self, geometry):
        row = verify_trace_inequality(TimeTrack.zeros(geometry, LOWER, 1, 0.02, 6), 1.0, 0.5)

        assert row.skipped and row.ratio is None
        assert max_ratio([row]) is None

    def test_scaling_leaves_the_ratio_unchanged(self, geometry, rng):
        u = band_limited_track(geometry, LOWER, 0.02, 9, band_limited_modes(rng))

        base = verify_trace_inequality(u, 1.0, 0.5)
        scaled = verify_trace_inequality(u * 7.5, 1.0, 0.5)

        assert scaled.ratio == pytest.approx(base.ratio, rel=1e-10)

    def test_in_plane_shift_leaves_the_ratio_unchanged(self, geometry, rng):
        u = band_limited_track(geometry, LOWER, 0.02, 9, band_limited_modes(rng))
        shifted = u.with_values(np.roll(u.values, 3, axis=-3))

        assert verify_trace_inequality(shifted, 1.5, 0.25).ratio == pytest.approx(
            verify_trace_inequality(u, 1.5, 0.25).ratio, rel=1e-10)

    def test_ratio_is_stable_under_spatial_refinement(self, rng):
        coarse = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8)
        fine = build_geometry(1.0, 2.0, 3.0, 16, 16, 16, 16, 8)
        for _ in range(5):
            modes = band_limited_modes(rng)
            ratios = [verify_trace_inequality(band_limited_track(g, LOWER, 0.02, 9, modes), 1.0, 0.5).ratio
                      for g in (coarse, fine)]
            assert ratios[1] == pytest.approx(ratios[0], rel=0.2)

    @pytest.mark.parametrize("r,theta", [(0.5, 0.5), (0.3, 0.5), (1.0, -0.1)])
    def test_parameter_ranges(self, geometry, r, theta):
        with pytest.raises(ConfigError):
            trace_inequality_sides(TimeTrack.zeros(geometry, LOWER, 1, 0.02, 6), r, theta)

    def test_elastic_tracks_are_rejected(self, geometry):
        with pytest.raises(ConfigError, match="fluid slab"):
            trace_inequality_sides(TimeTrack.zeros(geometry, DomainTag.ELASTIC, 1, 0.02, 6), 1.0, 0.5)


class TestSymbolInequality:
    def test_grids_are_disjoint(self):
        fit = fit_grid(512)
        check = check_grid(100, exclude=fit)

        assert fit[0] == 0.0 and fit.size == 513
        assert check.size == 100
        assert not np.isin(check, fit).any()

    def test_default_matrix_holds_and_halving_breaks_it(self):
        rows = symbol_suite(LemmasConfig().symbol_matrix)

        assert all(row.violations == 0 for row in rows)
        assert all(row.halved_violations > 0 for row in rows)

    def test_constant_dominates_the_origin(self):
        eps = 0.5
        C = interpolation_constant(1.0, 1.0, 0.5, 0.5, eps)

        assert C >= 1.05 * (1.0 - eps ** 2)

    def test_large_constant_never_fails(self):
        params = InequalityParams(alpha=2.0, beta=1.0, theta_i=1.0, lambda_i=0.25, eps=0.25)

        assert verify_symbol_inequality(params, 1e12) == 0

    @pytest.mark.parametrize("kwargs", [
        {"alpha": 1.0, "beta": 1.0, "theta": 0.8, "lam": 0.5, "eps": 0.5},
        {"alpha": 1.0, "beta": 1.0, "theta": 0.5, "lam": 0.5, "eps": 0.0},
        {"alpha": 1.0, "beta": 1.0, "theta": 1.5, "lam": 0.5, "eps": 0.5},
    ])
    def test_parameter_ranges(self, kwargs):
        with pytest.raises(ConfigError, match="out of range"):
            interpolation_constant(**kwargs)

    def test_frequency_points_must_be_finite(self):
        assert FrequencyPoint(tau=1.0, xi=(3.0, 4.0, 0.0)).xi_magnitude == pytest.approx(5.0)
        with pytest.raises(ValueError):
            FrequencyPoint(tau=float("inf"), xi=(0.0, 0.0, 0.0))


def wave_run(geometry, rng, scale=1.0):
    w0 = band_limited_field(geometry, DomainTag.ELASTIC, band_limited_modes(rng, vertical_max=3))
    w1 = band_limited_field(geometry, DomainTag.ELASTIC, band_limited_modes(rng, vertical_max=3))
    w0, w1 = w0 * scale, w1 * scale
    return solve_wave(w0, w1, wave_data(w0, w1, 0.02, 9))


class TestHiddenRegularity:
    def test_silent_run_is_skipped(self, geometry):
        zero = VectorField.zeros(geometry, DomainTag.ELASTIC)
        run = solve_wave(zero, zero, wave_data(zero, zero, 0.02, 6))

        row = hidden_regularity_ratio(run, 1.0, "energy")

        assert row.skipped and row.rhs == 0.0

    @pytest.mark.parametrize("form,beta", [("energy", 1.0), ("energy", 1.5), ("trace", 1.0)])
    def test_ratio_is_scale_invariant(self, geometry, form, beta):
        base = hidden_regularity_ratio(wave_run(geometry, np.random.default_rng(5)), beta, form)
        scaled = hidden_regularity_ratio(wave_run(geometry, np.random.default_rng(5), scale=3.0), beta, form)

        assert base.ratio > 0.0
        assert scaled.ratio == pytest.approx(base.ratio, rel=1e-8)

    @pytest.mark.parametrize("form,beta", [("energy", 0.5), ("trace", 2.5), ("trace", 0.0), ("sobolev", 1.0)])
    def test_parameter_ranges(self, geometry, rng, form, beta):
        with pytest.raises(ConfigError):
            hidden_regularity_ratio(wave_run(geometry, rng), beta, form)
