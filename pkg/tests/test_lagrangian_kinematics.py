import numpy as np
import pytest

from app.core.errors import FloorBreachError, InvalidDensityError
from app.models.fields import ScalarField, TimeTrack, VectorField
from app.models.geometry import DomainTag, build_geometry
from app.models.states import DensityTrack
from app.solvers.channel_fields import gradient_track
from app.utils.helpers.convergence import observed_order
from app.solvers.lagrangian_kinematics import (
    b_difference_report, check_floors, compute_kinematics, density_closed_form, integrate_inverse_gradient,
    integrate_jacobian, kinematic_consistency,
)

LOWER = DomainTag.FLUID_LOWER


def steady(geometry, fn, dt=0.01, n_samples=9):
    field = VectorField.from_function(geometry, LOWER, fn)
    return TimeTrack.constant(field, dt, n_samples)


def ones(geometry, value=1.0):
    return ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: np.full_like(y3, value))


def smooth_flow(amplitude=0.2):
    return lambda y1, y2, y3: amplitude * np.stack([np.sin(y1) * y3, np.cos(y2) * y3, 0.5 * y3 ** 2])


def compression(alpha):
    return lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), -alpha * y3])


def rk4_density(G, R0, dt, n_samples, substeps=4):
    """Joint RK4 of a_t = -a G a and R_t = R a_kj G_jk for a steady gradient G."""

    def rate(a, R):
        aG = np.einsum("ik...,kj...->ij...", a, G)
        return -np.einsum("ik...,kj...->ij...", aG, a), R * np.einsum("kk...->...", aG)

    a = np.broadcast_to(np.eye(3).reshape((3, 3) + (1,) * (G.ndim - 2)), G.shape).copy()
    R = np.array(R0, dtype=float)
    h = dt / substeps
    out = [R.copy()]
    for _ in range(n_samples - 1):
        for _ in range(substeps):
            ka1, kr1 = rate(a, R)
            ka2, kr2 = rate(a + 0.5 * h * ka1, R + 0.5 * h * kr1)
            ka3, kr3 = rate(a + 0.5 * h * ka2, R + 0.5 * h * kr2)
            ka4, kr4 = rate(a + h * ka3, R + h * kr3)
            a = a + h / 6.0 * (ka1 + 2 * ka2 + 2 * ka3 + ka4)
            R = R + h / 6.0 * (kr1 + 2 * kr2 + 2 * kr3 + kr4)
        out.append(R.copy())
    return np.stack(out)


class TestKinematics:
    def test_shear_flow_is_integrated_exactly(self, geometry):
        c = 0.4
        v = steady(geometry, lambda y1, y2, y3: np.stack([c * y3, np.zeros_like(y3), np.zeros_like(y3)]))

        kin = compute_kinematics(v)

        expected_b = np.zeros((3, 3))
        expected_b[0, 2] = -c * kin.a.T
        np.testing.assert_allclose(kin.b.values[-1, :, :, 0, 0, 3], expected_b, atol=1e-12)
        np.testing.assert_allclose(kin.J.values, 1.0, atol=1e-12)

        report = kinematic_consistency(kin.eta, kin.a, kin.J)
        assert report.a_residual < 1e-10
        assert report.J_residual < 1e-10

    def test_motionless_fluid_has_identity_kinematics(self, geometry):
        v = TimeTrack.zeros(geometry, LOWER, 1, 0.01, 5)

        kin = compute_kinematics(v)

        assert np.abs(kin.b.values).max() == 0.0
        np.testing.assert_array_equal(kin.J.values, 1.0)
        np.testing.assert_allclose(kin.eta.values[-1], geometry.coordinates(LOWER))

    def test_compression_shrinks_the_jacobian(self, geometry):
        v = steady(geometry, lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), -0.5 * y3]))

        kin = compute_kinematics(v)

        assert kin.J.values[-1].max() < 1.0
        np.testing.assert_allclose(kin.J.values[-1], 1.0 - 0.5 * v.T, rtol=1e-6)

    @pytest.mark.parametrize("flow", [compression(0.5), smooth_flow()])
    def test_identities_hold_at_fine_steps(self, geometry, flow):
        v = steady(geometry, flow, dt=1e-3, n_samples=101)

        kin = compute_kinematics(v)

        report = kinematic_consistency(kin.eta, kin.a, kin.J)
        assert report.a_residual <= 1e-8
        assert report.J_residual <= 1e-8

    def test_identity_residuals_shrink_at_least_quadratically(self):
        alpha, T = 0.8, 0.5
        steps, a_residuals, J_residuals = [], [], []
        for n, M in [(10, 4), (20, 8), (40, 16)]:
            geometry = build_geometry(1.0, 2.0, 3.0, 4, 4, M, M, 4)
            v = steady(geometry, compression(alpha), dt=T / n, n_samples=n + 1)
            kin = compute_kinematics(v)
            report = kinematic_consistency(kin.eta, kin.a, kin.J)
            steps.append(T / n)
            a_residuals.append(report.a_residual)
            J_residuals.append(report.J_residual)

        assert observed_order(steps, a_residuals) >= 2.0
        assert observed_order(steps, J_residuals) >= 2.0

    def test_compression_matches_the_scalar_solution_to_fourth_order(self, geometry):
        alpha, T = 0.8, 0.5
        steps, a_errors, J_errors = [], [], []
        for n in [10, 20, 40]:
            v = steady(geometry, compression(alpha), dt=T / n, n_samples=n + 1)
            a = integrate_inverse_gradient(v)
            J = integrate_jacobian(v, a)
            t = v.times[-1]
            steps.append(T / n)
            a_errors.append(float(np.max(np.abs(a.values[-1, 2, 2] - 1.0 / (1.0 - alpha * t)))))
            J_errors.append(float(np.max(np.abs(J.values[-1] - (1.0 - alpha * t)))))

        assert observed_order(steps, a_errors) >= 3.5
        assert observed_order(steps, J_errors) >= 3.5

    def test_short_windows_keep_coefficients_near_identity(self, geometry):
        b_sizes, J_sizes = [], []
        for T in [0.4, 0.2, 0.1]:
            kin = compute_kinematics(steady(geometry, smooth_flow(), dt=T / 8, n_samples=9))
            b_sizes.append(float(np.abs(kin.b.values).max()))
            J_sizes.append(float(np.abs(kin.J.values - 1.0).max()))

        assert b_sizes[0] > b_sizes[1] > b_sizes[2] > 0.0
        assert J_sizes[0] > J_sizes[1] > J_sizes[2] > 0.0

    def test_inverse_gradient_and_jacobian_are_reciprocal_determinants(self, geometry):
        v = steady(geometry, smooth_flow(), dt=1e-3, n_samples=51)

        kin = compute_kinematics(v)

        det_a = np.linalg.det(np.moveaxis(kin.a.values, (1, 2), (-2, -1)))
        np.testing.assert_allclose(det_a * kin.J.values, 1.0, rtol=0.0, atol=1e-8)


class TestDensity:
    def test_closed_form_under_uniform_compression(self, geometry):
        alpha = 0.3
        v = steady(geometry, lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), -alpha * y3]))

        density = density_closed_form(ones(geometry, 2.0), v)

        expected = 2.0 * np.exp(-alpha * v.times)
        np.testing.assert_allclose(density.R.values[:, 0, 0, 0], expected, rtol=1e-12)
        np.testing.assert_allclose(density.R_inv.values * density.R.values, 1.0, rtol=1e-14)

    def test_nonpositive_initial_density_is_rejected(self, geometry):
        v = TimeTrack.zeros(geometry, LOWER, 1, 0.01, 5)

        with pytest.raises(InvalidDensityError, match="positive"):
            density_closed_form(ones(geometry, 0.0), v)

    def test_floors(self, geometry):
        R0 = ones(geometry)
        R = TimeTrack.constant(R0, 0.01, 5)
        J = TimeTrack.constant(ones(geometry, 0.05), 0.01, 5)

        check_floors(None, DensityTrack(R=R, R0=R0))
        with pytest.raises(FloorBreachError, match="min J"):
            check_floors(J, DensityTrack(R=R, R0=R0))
        with pytest.raises(FloorBreachError, match="min R"):
            check_floors(None, DensityTrack(R=R * 1e-4, R0=R0))

    def test_lagrangian_density_matches_rk4(self, geometry):
        v = steady(geometry, smooth_flow(), dt=1e-3, n_samples=51)
        R0 = ScalarField.from_function(geometry, LOWER, lambda y1, y2, y3: 1.0 + 0.2 * np.cos(y1) * y3)
        a = integrate_inverse_gradient(v)

        density = density_closed_form(R0, v, a)

        expected = rk4_density(gradient_track(v).values[0], R0.values, v.dt, v.n_samples)
        np.testing.assert_allclose(density.R.values, expected, rtol=0.0, atol=1e-8)


class TestDifferenceReport:
    def test_identical_tracks_have_no_ratio(self, geometry):
        v = steady(geometry, lambda y1, y2, y3: np.stack([0.1 * np.sin(y1) * y3, np.zeros_like(y3), np.zeros_like(y3)]))

        report = b_difference_report(v, v, ones(geometry))

        assert report.grad_v_difference == 0.0
        assert report.b_ratio is None

    def test_differences_scale_with_the_velocity_difference(self, geometry):
        base = steady(geometry, lambda y1, y2, y3: np.stack([0.1 * np.sin(y1) * y3, np.zeros_like(y3), np.zeros_like(y3)]))
        bump = steady(geometry, lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), 1e-3 * np.cos(y2) * y3]))

        report = b_difference_report(base, base + bump, ones(geometry))

        assert report.grad_v_difference > 0.0
        assert 0.0 < report.b_ratio < 10.0 * base.T
