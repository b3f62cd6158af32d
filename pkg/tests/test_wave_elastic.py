import numpy as np
import pytest

from app.core.errors import DomainMismatchError
from app.models.fields import Pair, TimeTrack, VectorField
from app.models.geometry import DomainTag, build_geometry
from app.models.states import ElasticState
from app.solvers.wave_elastic import (
    dirichlet_from_velocity, solve_tridiagonal, solve_wave, wave_compatibility, wave_energy,
)
from app.utils.helpers.convergence import observed_order

ELASTIC = DomainTag.ELASTIC


def zero_planes(geometry, dt, n_samples):
    return Pair(lower=TimeTrack.zeros(geometry, DomainTag.GAMMA_C_LOWER, 1, dt, n_samples),
                upper=TimeTrack.zeros(geometry, DomainTag.GAMMA_C_UPPER, 1, dt, n_samples))


def standing_mode(geometry, k1=0, component=0):
    def fn(y1, y2, y3):
        zeta = (y3 - geometry.L1) / (geometry.L2 - geometry.L1)
        values = np.zeros((3,) + y3.shape)
        values[component] = np.cos(k1 * y1) * np.sin(np.pi * zeta)
        return values
    return VectorField.from_function(geometry, ELASTIC, fn)


def mode_frequency(k1, M):
    """Measured angular frequency of a resting standing mode on an elastic slab of unit thickness."""
    geometry = build_geometry(1.0, 2.0, 3.0, 4, 4, 4, 4, M)
    omega = np.sqrt(np.pi ** 2 + k1 ** 2)
    dt = 2.0 * np.pi / omega / (100 * M // 16)
    w0 = standing_mode(geometry, k1=k1)

    run = solve_wave(w0, VectorField.zeros(geometry, ELASTIC), zero_planes(geometry, dt, 11))

    history = run.w.values[:, 0, 0, 0, M // 2] / w0.values[0, 0, 0, M // 2]
    theta = np.arccos(history[1])
    np.testing.assert_allclose(history, np.cos(theta * np.arange(history.size)), atol=1e-10)
    return theta / dt, omega


class TestTridiagonal:
    def test_matches_dense_solve(self, rng):
        n = 9
        diag = 4.0 + rng.random(n)
        rhs = rng.standard_normal((5, n))
        A = np.diag(diag) + np.diag(np.full(n - 1, -1.0), 1) + np.diag(np.full(n - 1, -1.0), -1)

        x = solve_tridiagonal(-1.0, diag, -1.0, rhs)

        np.testing.assert_allclose(x, np.linalg.solve(A, rhs.T).T, rtol=1e-12)


class TestWaveSolve:
    def test_energy_is_conserved_with_clamped_interfaces(self):
        geometry = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 16)
        w0 = standing_mode(geometry, k1=1, component=2)
        w1 = standing_mode(geometry, k1=2, component=0)

        run = solve_wave(w0, w1, zero_planes(geometry, 0.05, 41))

        np.testing.assert_allclose(run.energy, run.energy[0], rtol=1e-10)

    def test_standing_wave_returns_after_one_period(self):
        geometry = build_geometry(1.0, 2.0, 3.0, 4, 4, 4, 4, 16)
        w0 = standing_mode(geometry)
        period = 2.0 * (geometry.L2 - geometry.L1)

        run = solve_wave(w0, VectorField.zeros(geometry, ELASTIC), zero_planes(geometry, period / 100, 101))

        mismatch = np.abs(run.w.values[-1] - w0.values).max() / np.abs(w0.values).max()
        assert mismatch < 0.05

    @pytest.mark.parametrize("k1", [0, 1])
    def test_mode_frequency_within_two_percent(self, k1):
        measured, exact = mode_frequency(k1, 16)

        assert abs(measured - exact) / exact <= 0.02

    def test_frequency_error_is_second_order(self):
        levels = [8, 16, 32]
        errors = [abs(measured - exact) / exact for measured, exact in (mode_frequency(0, M) for M in levels)]

        assert errors[0] > errors[1] > errors[2]
        assert observed_order([1.0 / M for M in levels], errors) == pytest.approx(2.0, abs=0.2)

    def test_energy_drift_over_ten_periods(self):
        geometry = build_geometry(1.0, 2.0, 3.0, 4, 4, 4, 4, 16)
        period = 2.0

        run = solve_wave(standing_mode(geometry), VectorField.zeros(geometry, ELASTIC),
                         zero_planes(geometry, period / 100, 1001))

        assert np.abs(run.energy / run.energy[0] - 1.0).max() <= 1e-10

    def test_solve_is_linear_in_its_data(self, small_geometry, rng):
        geometry = small_geometry
        n = 6

        def random_data():
            w0 = VectorField(geometry=geometry, tag=ELASTIC, values=rng.standard_normal((3,) + geometry.grid_shape(ELASTIC)))
            w1 = VectorField(geometry=geometry, tag=ELASTIC, values=rng.standard_normal((3,) + geometry.grid_shape(ELASTIC)))
            psi = Pair(lower=TimeTrack(geometry=geometry, tag=DomainTag.GAMMA_C_LOWER, rank=1, dt=0.05,
                                       values=rng.standard_normal((n, 3, geometry.N1, geometry.N2))),
                       upper=TimeTrack(geometry=geometry, tag=DomainTag.GAMMA_C_UPPER, rank=1, dt=0.05,
                                       values=rng.standard_normal((n, 3, geometry.N1, geometry.N2))))
            return w0, w1, psi

        def combine(x, y):
            return 2.0 * x.values - 0.5 * y.values

        first, second = random_data(), random_data()
        mixed = (first[0].with_values(combine(first[0], second[0])),
                 first[1].with_values(combine(first[1], second[1])),
                 Pair(lower=first[2].lower.with_values(combine(first[2].lower, second[2].lower)),
                      upper=first[2].upper.with_values(combine(first[2].upper, second[2].upper))))

        runs = [solve_wave(*data) for data in (first, second, mixed)]

        np.testing.assert_allclose(runs[2].w.values, combine(runs[0].w, runs[1].w), rtol=0.0, atol=1e-10)
        np.testing.assert_allclose(runs[2].w_t.values, combine(runs[0].w_t, runs[1].w_t), rtol=0.0, atol=1e-8)
        np.testing.assert_allclose(runs[2].normal_derivative.lower.values,
                                   combine(runs[0].normal_derivative.lower, runs[1].normal_derivative.lower),
                                   rtol=0.0, atol=1e-8)

    def test_dirichlet_rows_are_exact(self, geometry, rng):
        n = 6
        psi_lo = rng.standard_normal((n, 3, geometry.N1, geometry.N2))
        psi_up = rng.standard_normal((n, 3, geometry.N1, geometry.N2))
        psi = Pair(lower=TimeTrack(geometry=geometry, tag=DomainTag.GAMMA_C_LOWER, rank=1, dt=0.01, values=psi_lo),
                   upper=TimeTrack(geometry=geometry, tag=DomainTag.GAMMA_C_UPPER, rank=1, dt=0.01, values=psi_up))

        run = solve_wave(VectorField.zeros(geometry, ELASTIC), VectorField.zeros(geometry, ELASTIC), psi)

        np.testing.assert_array_equal(run.w.values[1:, ..., 0], psi_lo[1:])
        np.testing.assert_array_equal(run.w.values[1:, ..., -1], psi_up[1:])

    def test_normal_derivative_sign_convention(self):
        geometry = build_geometry(1.0, 2.0, 3.0, 4, 4, 4, 4, 8)
        w0 = VectorField.from_function(
            geometry, ELASTIC, lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), y3]))
        psi = dirichlet_from_velocity(
            Pair(lower=VectorField(geometry=geometry, tag=DomainTag.GAMMA_C_LOWER, values=w0.values[..., 0]),
                 upper=VectorField(geometry=geometry, tag=DomainTag.GAMMA_C_UPPER, values=w0.values[..., -1])),
            Pair(lower=TimeTrack.zeros(geometry, DomainTag.FLUID_LOWER, 1, 0.01, 5),
                 upper=TimeTrack.zeros(geometry, DomainTag.FLUID_UPPER, 1, 0.01, 5)))

        run = solve_wave(w0, VectorField.zeros(geometry, ELASTIC), psi)

        np.testing.assert_allclose(run.normal_derivative.lower.values[0, 2], -1.0, atol=1e-12)
        np.testing.assert_allclose(run.normal_derivative.upper.values[0, 2], 1.0, atol=1e-12)

    def test_compatibility_residuals(self, geometry):
        w0 = standing_mode(geometry)
        residuals = wave_compatibility(w0, VectorField.zeros(geometry, ELASTIC), zero_planes(geometry, 0.01, 5))

        assert residuals["w0_trace"] < 1e-12
        assert residuals["w1_trace"] == 0.0

    def test_planes_must_be_interfaces(self, geometry):
        wrong = Pair(lower=TimeTrack.zeros(geometry, DomainTag.GAMMA_F_BOTTOM, 1, 0.01, 5),
                     upper=TimeTrack.zeros(geometry, DomainTag.GAMMA_C_UPPER, 1, 0.01, 5))
        with pytest.raises(DomainMismatchError):
            solve_wave(VectorField.zeros(geometry, ELASTIC), VectorField.zeros(geometry, ELASTIC), wrong)


class TestWaveEnergy:
    def test_zero_state_has_no_energy(self, geometry):
        zero = VectorField.zeros(geometry, ELASTIC)

        assert wave_energy(ElasticState(w=zero, w_t=zero, time=0.0)) == 0.0

    def test_uniform_velocity_is_pure_kinetic_energy(self, geometry):
        c = 0.7
        values = np.zeros((3,) + geometry.grid_shape(ELASTIC))
        values[0] = c
        state = ElasticState(w=VectorField.zeros(geometry, ELASTIC),
                             w_t=VectorField(geometry=geometry, tag=ELASTIC, values=values), time=0.0)

        assert wave_energy(state) == pytest.approx(0.5 * c ** 2 * geometry.volume(ELASTIC), rel=1e-12)
