# app/solvers/fsi_fixed_point.py
"""Space-time Picard iteration for the coupled fluid-wave system.

Both maps take a velocity track v on the two fluid slabs and return a new
track v_bar with the same initial value:

* ``lambda``: coefficients from v with the Eulerian divergence, forcing
  -R grad(1/R) and interface traction dw/dnu + nu/R.
* ``pi``: full Lagrangian coefficients (b = a - I, J) from v; the variable
  coefficient terms in v_bar are lagged in an inner Picard loop.

Differences between iterates are measured in the discrete K^{s+1} norm.
"""
from typing import Optional, Sequence

import numpy as np

from app.core.errors import CompatibilityError, ConfigError, InnerDivergenceError, NonConvergenceError
from app.models.fields import Pair, TimeTrack, VectorField
from app.models.geometry import FLUID_TAGS, INTERFACE_TAGS, OUTER_TAGS, DomainTag
from app.models.states import (
    CouplingData,
    DensityTrack,
    ElasticState,
    FsiState,
    KinematicTrack,
    LameProblem,
    Viscosities,
)
from app.schemas.reports import (
    CompatibilityCondition,
    CompatibilityReport,
    ContractionRow,
    ContractionStudy,
    ConvergenceReport,
    IterationRecord,
    LameResidualReport,
    NormRow,
)
from app.schemas.run_config import IterationConfig
from app.solvers.channel_fields import (
    WINDOW_METADATA,
    boundary_trace,
    gradient,
    gradient_array,
    gradient_track,
    l2_time_sobolev_norm,
    pair_K_norm,
    partial_array,
    sobolev_sq_samples,
    trace_track,
)
from app.solvers.lagrangian_kinematics import GRADIENT_INTERPOLATION, check_floors, compute_kinematics, density_closed_form
from app.solvers.lame_parabolic import lame_residual, solve_lame
from app.solvers.wave_elastic import dirichlet_from_velocity, normal_derivative, solve_wave
from app.utils.logging_config import logger

MAPS = ("lambda", "pi")
COMPATIBILITY_THRESHOLDS = {
    "interface_velocity": 1e-8,
    "outer_velocity": 1e-8,
    "interface_stress": 1e-6,
    "outer_balance": 1e-6,
}
INNER_TOL_FACTOR = 0.1
FACTOR_NOISE_MULTIPLE = 10.0
HALF = 0.5


def _pair_sub(a: Pair, b: Pair) -> Pair:
    return Pair(lower=a.lower - b.lower, upper=a.upper - b.upper)


def _e3(scalar: np.ndarray) -> np.ndarray:
    """Embed a scalar array as the third component of a vector array (component axis 1)."""
    out = np.zeros((scalar.shape[0], 3) + scalar.shape[1:])
    out[:, 2] = scalar
    return out


def _swap(tensor: np.ndarray) -> np.ndarray:
    return np.swapaxes(tensor, 1, 2)


def _constant_pair(fields: Pair, dt: float, n: int) -> Pair:
    return fields.map(lambda f: TimeTrack.constant(f, dt, n))


# ---- compatibility ---------------------------------------------------------

def check_compatibility(v0: Pair, w1: VectorField, R0: Pair, visc: Viscosities,
                        w0: Optional[VectorField] = None, thresholds: Optional[dict] = None) -> CompatibilityReport:
    """Sup-norm residuals of the four initial compatibility conditions."""
    thresholds = {**COMPATIBILITY_THRESHOLDS, **(thresholds or {})}
    geometry = w1.geometry
    w0 = w0 if w0 is not None else VectorField.zeros(geometry, DomainTag.ELASTIC)
    dw0 = normal_derivative(ElasticState(w=w0, w_t=w1))
    residuals = dict.fromkeys(COMPATIBILITY_THRESHOLDS, 0.0)

    for v, R, fluid, plane, outer, dw in zip(v0.both(), R0.both(), FLUID_TAGS, INTERFACE_TAGS, OUTER_TAGS, dw0.both()):
        if np.any(R.values <= 0.0):
            raise ConfigError(f"R0 must be positive on {fluid.value}")
        residuals["interface_velocity"] = max(
            residuals["interface_velocity"],
            float(np.max(np.abs(boundary_trace(w1, plane).values - boundary_trace(v, plane).values))))
        residuals["outer_velocity"] = max(residuals["outer_velocity"], boundary_trace(v, outer).sup_norm())

        G = gradient(v).values
        S = G + np.swapaxes(G, 0, 1)
        div = np.trace(G, axis1=0, axis2=1)
        R_inv = 1.0 / R.values
        sign = geometry.normal_sign(plane)
        i = geometry.plane_index(fluid, plane)
        stress = visc.lam * S[:, 2, ..., i] * sign
        stress[2] += (visc.mu * div[..., i] - R_inv[..., i]) * sign
        residuals["interface_stress"] = max(residuals["interface_stress"],
                                            float(np.max(np.abs(stress - dw.values))))

        o = geometry.plane_index(fluid, outer)
        div_S = sum(partial_array(S[:, k], k, geometry, fluid) for k in range(3))
        balance = (visc.lam * div_S + visc.mu * gradient_array(div, geometry, fluid)
                   - gradient_array(R_inv, geometry, fluid))
        residuals["outer_balance"] = max(residuals["outer_balance"], float(np.max(np.abs(balance[..., o]))))

    conditions = [CompatibilityCondition(name=name, residual=value, threshold=thresholds[name],
                                         passed=value <= thresholds[name])
                  for name, value in residuals.items()]
    return CompatibilityReport(conditions=conditions)


# ---- variable coefficient terms --------------------------------------------

def interior_terms(v_bar: TimeTrack, kin: KinematicTrack, density: DensityTrack, visc: Viscosities) -> dict:
    """Interior forcing terms I1..I8 of the Lagrangian map, each shaped like v_bar.values."""
    geometry, tag = v_bar.geometry, v_bar.tag

    def d(values, k):
        return partial_array(values, k, geometry, tag)

    G = gradient_track(v_bar).values
    b = kin.b.values
    R = density.R.values[:, None]
    R_inv = 1.0 / density.R.values
    Gb = np.einsum("njm...,nmk...->njk...", G, b)
    T1 = Gb + _swap(Gb)
    S = G + _swap(G)
    q = np.einsum("nim...,nmi...->n...", G, b)
    div = np.einsum("nii...->n...", G)

    def b_weighted(scalar):
        return sum(b[:, k] * d(scalar, k)[:, None] for k in range(3))

    return {
        "I1": visc.lam * R * sum(d(T1[:, :, k], k) for k in range(3)),
        "I2": visc.lam * R * sum(b[:, k, l][:, None] * d(T1[:, :, l], k) for k in range(3) for l in range(3)),
        "I3": visc.lam * R * sum(b[:, k, l][:, None] * d(S[:, :, l], k) for k in range(3) for l in range(3)),
        "I4": visc.mu * R * np.stack([d(q, j) for j in range(3)], axis=1),
        "I5": visc.mu * R * b_weighted(q),
        "I6": visc.mu * R * b_weighted(div),
        "I7": -R * b_weighted(R_inv),
        "I8": pressure_forcing(density),
    }


def boundary_terms(v_bar: TimeTrack, kin: KinematicTrack, density: DensityTrack, visc: Viscosities) -> dict:
    """Interface traction terms K1..K11 on the slab's interface plane, shaped (n, 3, N1, N2)."""
    geometry, tag = v_bar.geometry, v_bar.tag
    plane = geometry.interface_of(tag)
    i = geometry.plane_index(tag, plane)
    s = geometry.normal_sign(plane)

    G = gradient_track(v_bar).values
    b = kin.b.values
    Gb = np.einsum("njm...,nmk...->njk...", G, b)
    T1 = (Gb + _swap(Gb))[..., i]
    S = (G + _swap(G))[..., i]
    q = np.einsum("nim...,nmi...->n...", G, b)[..., i]
    div = np.einsum("nii...->n...", G)[..., i]
    J = kin.J.values[..., i]
    R_inv = 1.0 / density.R.values[..., i]
    b2 = b[:, 2, :, ..., i]
    Jv = J[:, None]

    return {
        "K1": visc.lam * (1.0 - Jv) * S[:, :, 2] * s,
        "K2": _e3(visc.mu * (1.0 - J) * div * s),
        "K3": -visc.lam * Jv * s * sum(b2[:, l][:, None] * T1[:, :, l] for l in range(3)),
        "K4": Jv * s * b2 * R_inv[:, None],
        "K5": _e3((J - 1.0) * R_inv * s),
        "K6": -visc.lam * Jv * s * T1[:, :, 2],
        "K7": -visc.lam * Jv * s * sum(b2[:, l][:, None] * S[:, :, l] for l in range(3)),
        "K8": -visc.mu * Jv * s * b2 * q[:, None],
        "K9": _e3(-visc.mu * J * q * s),
        "K10": -visc.mu * Jv * s * b2 * div[:, None],
        "K11": pressure_traction(density, plane),
    }


def pressure_forcing(density: DensityTrack) -> np.ndarray:
    """-R grad(1/R)."""
    return -density.R.values[:, None] * gradient_track(density.R_inv).values


def pressure_traction(density: DensityTrack, plane: DomainTag) -> np.ndarray:
    """nu / R on the interface plane."""
    R_inv = trace_track(density.R_inv, plane).values
    return _e3(R_inv * density.R.geometry.normal_sign(plane))


# ---- the two maps ----------------------------------------------------------

def _external(data: CouplingData, dt: float, n: int) -> tuple[Pair, Pair]:
    geometry = data.geometry
    f_ext = data.f_ext or Pair(lower=VectorField.zeros(geometry, DomainTag.FLUID_LOWER),
                               upper=VectorField.zeros(geometry, DomainTag.FLUID_UPPER))
    h_ext = data.h_ext or Pair(lower=VectorField.zeros(geometry, DomainTag.GAMMA_C_LOWER),
                               upper=VectorField.zeros(geometry, DomainTag.GAMMA_C_UPPER))
    return _constant_pair(f_ext, dt, n), _constant_pair(h_ext, dt, n)


def _wave_for(v: Pair, data: CouplingData):
    w0_trace = Pair(lower=boundary_trace(data.w0, DomainTag.GAMMA_C_LOWER),
                    upper=boundary_trace(data.w0, DomainTag.GAMMA_C_UPPER))
    return solve_wave(data.w0, data.w1, dirichlet_from_velocity(w0_trace, v))


def _problem(track: TimeTrack, density: DensityTrack, f: np.ndarray, h: np.ndarray, u0: VectorField,
             data: CouplingData, config: IterationConfig) -> LameProblem:
    plane = track.geometry.interface_of(track.tag)
    h_track = TimeTrack(geometry=track.geometry, tag=plane, rank=1, dt=track.dt, values=h)
    return LameProblem(tag=track.tag, R=density.R, f=track.with_values(f), h=h_track, u0=u0, visc=data.visc,
                       R_floor=config.R_floor * float(density.R0.values.min()))


def _lambda_solve(v: Pair, data: CouplingData, config: IterationConfig) -> tuple[FsiState, Pair]:
    dt, n = v.lower.dt, v.lower.n_samples
    f_ext, h_ext = _external(data, dt, n)
    wave = _wave_for(v, data)
    densities, problems, solutions = [], [], []
    for track, R0, u0, f0, h0, dnu in zip(v.both(), data.R0.both(), data.v0.both(), f_ext.both(), h_ext.both(),
                                          wave.normal_derivative.both()):
        density = density_closed_form(R0, track)
        check_floors(None, density, R_floor=config.R_floor)
        plane = track.geometry.interface_of(track.tag)
        f = f0.values + pressure_forcing(density)
        h = dnu.values + pressure_traction(density, plane) + h0.values
        problem = _problem(track, density, f, h, u0, data, config)
        densities.append(density)
        problems.append(problem)
        solutions.append(solve_lame(problem, config.theta))
    state = FsiState(mode="lambda", v=Pair(lower=solutions[0], upper=solutions[1]),
                     density=Pair(lower=densities[0], upper=densities[1]), wave=wave)
    return state, Pair(lower=problems[0], upper=problems[1])


def lambda_step(v: Pair, data: CouplingData, config: IterationConfig) -> FsiState:
    """One application of the map with Eulerian coefficients."""
    return _lambda_solve(v, data, config)[0]


def _pi_solve(v: Pair, data: CouplingData, config: IterationConfig,
              kinematics: Optional[Pair] = None) -> tuple[FsiState, Pair, int]:
    dt, n = v.lower.dt, v.lower.n_samples
    f_ext, h_ext = _external(data, dt, n)
    if kinematics is None:
        kinematics = v.map(compute_kinematics)
    densities = []
    for track, R0, kin in zip(v.both(), data.R0.both(), kinematics.both()):
        density = density_closed_form(R0, track, kin.a)
        check_floors(kin.J, density, J_floor=config.J_floor, R_floor=config.R_floor)
        densities.append(density)
    wave = _wave_for(v, data)

    v_bar = v
    inner_tol = INNER_TOL_FACTOR * config.tol
    for sweep in range(1, config.inner_max_sweeps + 1):
        problems, solutions = [], []
        for track, kin, density, u0, f0, h0, dnu in zip(v_bar.both(), kinematics.both(), densities,
                                                        data.v0.both(), f_ext.both(), h_ext.both(),
                                                        wave.normal_derivative.both()):
            I = interior_terms(track, kin, density, data.visc)
            K = boundary_terms(track, kin, density, data.visc)
            f = f0.values + I.pop("I8") + sum(I.values())
            h = dnu.values + K.pop("K11") + h0.values + sum(K.values())
            problem = _problem(track, density, f, h, u0, data, config)
            problems.append(problem)
            solutions.append(solve_lame(problem, config.theta))
        new = Pair(lower=solutions[0], upper=solutions[1])
        change = pair_K_norm(_pair_sub(new, v_bar), config.s + 1.0)
        v_bar = new
        logger.debug(f"pi inner sweep {sweep}: change {change:.3e}")
        if not np.isfinite(change):
            raise InnerDivergenceError(f"inner sweep {sweep} produced a non-finite iterate", sweeps=sweep)
        if change < inner_tol:
            break
    else:
        raise InnerDivergenceError(
            f"inner loop did not settle below {inner_tol:.1e} within {config.inner_max_sweeps} sweeps",
            sweeps=config.inner_max_sweeps, last_change=float(change))

    state = FsiState(mode="pi", v=v_bar, density=Pair(lower=densities[0], upper=densities[1]), wave=wave,
                     kinematics=kinematics)
    return state, Pair(lower=problems[0], upper=problems[1]), sweep


def pi_step(v: Pair, data: CouplingData, config: IterationConfig, kinematics: Optional[Pair] = None) -> FsiState:
    """One application of the Lagrangian map; ``kinematics`` overrides the coefficients computed from v."""
    return _pi_solve(v, data, config, kinematics)[0]


def _apply(mode: str, v: Pair, data: CouplingData, config: IterationConfig) -> tuple[FsiState, Pair, int]:
    if mode == "lambda":
        state, problems = _lambda_solve(v, data, config)
        return state, problems, 0
    if mode == "pi":
        return _pi_solve(v, data, config)
    raise ConfigError(f"unknown fixed-point map '{mode}', expected one of {MAPS}")


# ---- drivers ---------------------------------------------------------------

def initial_iterate(data: CouplingData, dt: float, n: int) -> Pair:
    """v^0(t) = v0 on the whole window."""
    return _constant_pair(data.v0, dt, n)


def interface_mismatch(v: Pair, wave) -> float:
    """L2 over the window and both planes of trace(v) - w_t."""
    total = 0.0
    for track, plane in zip(v.both(), INTERFACE_TAGS):
        difference = trace_track(track, plane) - trace_track(wave.w_t, plane)
        total += l2_time_sobolev_norm(difference, 0.0) ** 2
    return float(np.sqrt(total))


def run_fixed_point(mode: str, config: IterationConfig, data: CouplingData) -> tuple[FsiState, ConvergenceReport]:
    """Iterate the chosen map from the constant extension of v0 until the K^{s+1} change drops below tol."""
    if mode not in MAPS:
        raise ConfigError(f"unknown fixed-point map '{mode}', expected one of {MAPS}")
    compat = check_compatibility(data.v0, data.w1, data.R0, data.visc, data.w0)
    if not compat.passed:
        failed = [c.name for c in compat.conditions if not c.passed]
        if not config.override_compat:
            raise CompatibilityError(f"initial data violate compatibility conditions: {', '.join(failed)}",
                                     failed=failed)
        logger.warning(f"Running with incompatible initial data ({', '.join(failed)}) by override")

    dt, n = config.window()
    order = config.s + 1.0
    report = ConvergenceReport(mode=mode, converged=False, iterations=0, s=config.s, T=config.T, dt=dt,
                               tol=config.tol, window={**WINDOW_METADATA, "gradient_interpolation": GRADIENT_INTERPOLATION})
    v = initial_iterate(data, dt, n)
    previous: Optional[float] = None
    for iteration in range(1, config.max_iter + 1):
        state, problems, sweeps = _apply(mode, v, data, config)
        diff = pair_K_norm(_pair_sub(state.v, v), order)
        radius = pair_K_norm(state.v, order)
        factor = diff / previous if previous is not None and previous > FACTOR_NOISE_MULTIPLE * config.tol else None
        exceeded = radius > config.M_report
        report.records.append(IterationRecord(iteration=iteration, diff=diff, factor=factor, ball_radius=radius,
                                              ball_exceeded=exceeded, inner_sweeps=sweeps))
        report.ball_exceeded = report.ball_exceeded or exceeded
        logger.info(f"{mode} iteration {iteration}: diff {diff:.3e}"
                    + (f", factor {factor:.3f}" if factor is not None else "") + f", radius {radius:.3e}")
        v = state.v
        if diff < config.tol:
            report.converged = True
            break
        previous = diff
    report.iterations = len(report.records)

    if not report.converged:
        logger.error(f"{mode} iteration did not converge in {config.max_iter} iterations")
        raise NonConvergenceError(f"no convergence after {config.max_iter} iterations (last diff {diff:.3e})",
                                  diffs=report.diffs)

    residuals = [lame_residual(u, p, config.theta) for u, p in zip(state.v.both(), problems.both())]
    report.final_residual = LameResidualReport(interior=max(r.interior for r in residuals),
                                               interface_flux=max(r.interface_flux for r in residuals),
                                               outer_dirichlet=max(r.outer_dirichlet for r in residuals))
    report.interface_mismatch = interface_mismatch(state.v, state.wave)
    again, _, _ = _apply(mode, state.v, data, config)
    report.self_consistency = pair_K_norm(_pair_sub(again.v, state.v), order)
    logger.info(f"{mode} converged in {report.iterations} iterations; self-consistency {report.self_consistency:.3e}")
    return state, report


def perturbation_direction(data: CouplingData, dt: float, n: int, coefficients: np.ndarray) -> Pair:
    """Smooth direction vanishing at t = 0 and on the outer planes."""
    geometry = data.geometry
    t = dt * np.arange(n)
    tracks = []
    for tag, outer in zip(FLUID_TAGS, OUTER_TAGS):
        y = geometry.coordinates(tag)
        distance = np.abs(y[2] - geometry.plane_height(outer))
        profile = np.sin(0.5 * np.pi * distance / geometry.thickness(tag)) * np.cos(y[0] + y[1])
        values = t[:, None, None, None, None] * coefficients[None, :, None, None, None] * profile[None, None]
        tracks.append(TimeTrack(geometry=geometry, tag=tag, rank=1, dt=dt, values=values))
    return Pair(lower=tracks[0], upper=tracks[1])


def contraction_study(mode: str, config: IterationConfig, data: CouplingData, T_values: Sequence[float],
                      perturbation: float = 1e-3, seed: int = 0) -> ContractionStudy:
    """Output/input difference ratio of one map application for each window length."""
    if len(T_values) < 2:
        raise ConfigError("a contraction study needs at least two window lengths")
    coefficients = np.random.default_rng(seed).standard_normal(3)
    order = config.s + 1.0
    rows = []
    for T in T_values:
        dt, n = config.window(T)
        base = initial_iterate(data, dt, n)
        direction = perturbation_direction(data, dt, n, coefficients)
        moved = Pair(lower=base.lower + perturbation * direction.lower,
                     upper=base.upper + perturbation * direction.upper)
        input_diff = pair_K_norm(_pair_sub(moved, base), order)
        out_base = _apply(mode, base, data, config)[0].v
        out_moved = _apply(mode, moved, data, config)[0].v if input_diff > 0.0 else out_base
        output_diff = pair_K_norm(_pair_sub(out_moved, out_base), order)
        degenerate = not input_diff > 0.0
        factor = None if degenerate else output_diff / input_diff
        rows.append(ContractionRow(T=T, dt=dt, n_samples=n, input_diff=input_diff, output_diff=output_diff,
                                   factor=factor, degenerate=degenerate))
        logger.info(f"{mode} contraction T={T:g}: " + ("degenerate" if degenerate else f"factor {factor:.4f}"))
    contracting = [row.T for row in rows if row.factor is not None and row.factor < HALF]
    return ContractionStudy(mode=mode, rows=rows, T0=max(contracting) if contracting else None,
                            window=dict(WINDOW_METADATA))


def norm_rows(state: FsiState, s: float) -> list[NormRow]:
    """Per-sample H^s norms of v and R, L2 norms of w and w_t, and the wave energy."""
    def per_sample(track: TimeTrack, order: float) -> np.ndarray:
        return np.sqrt(sobolev_sq_samples(track.values, track.geometry, track.tag, order))

    v_lo, v_up = (per_sample(t, s) for t in state.v.both())
    R_lo, R_up = (per_sample(d.R, s) for d in state.density.both())
    w, w_t = per_sample(state.wave.w, 0.0), per_sample(state.wave.w_t, 0.0)
    return [NormRow(time=float(t), v_lower=float(v_lo[k]), v_upper=float(v_up[k]), R_lower=float(R_lo[k]),
                    R_upper=float(R_up[k]), w=float(w[k]), w_t=float(w_t[k]), energy=float(state.wave.energy[k]))
            for k, t in enumerate(state.v.lower.times)]
