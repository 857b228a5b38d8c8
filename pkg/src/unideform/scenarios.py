"""End-to-end experiments behind the command line.

Each ``run_*`` function takes a validated :class:`~unideform.config.ScenarioConfig`
and returns a :class:`ScenarioResult`: named column tables for CSV emission
plus a :class:`~unideform.verify.VerificationReport`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .core import (
    DiscreteRealSymmetric,
    Potential1D,
    SpatialGrid1D,
    StateVector,
    TimeMesh,
    make_polynomial_schedule,
    make_smoothstep_schedule,
)
from .deform1d import (
    continuity_residual_radial,
    dilatation_phase,
    dilatation_potential,
    hydrogen_density,
    hydrogen_dilatation_driver,
    hydrogen_translation_fields,
    transport_phase,
    transport_potential,
)
from .deformn import (
    bloch_curves,
    field_sweep,
    generalized_axis_two_level,
    power_sweep,
    two_level_diagonal,
    two_level_phase,
    two_level_potential,
)
from .evolve import propagate_discrete, split_step_1d
from .spectral import bound_states_1d
from .verify import Metric, VerificationReport, compare_drivers, fidelity

__all__ = [
    "ScenarioResult",
    "run_config",
    "TrackingRun",
    "transport_tracking",
    "dilatation_tracking",
    "random_smooth_family",
    "radial_grid",
    "hydrogen_dilatation_residual",
    "TWO_LEVEL_COLUMNS",
]

TWO_LEVEL_COLUMNS = ("t", "theta", "phi", "v", "h_y", "nx", "ny", "nz", "nx_tilde", "ny_tilde", "nz_tilde")


@dataclass(frozen=True)
class ScenarioResult:
    tables: dict
    report: VerificationReport
    notes: dict = field(default_factory=dict)


def _tol(config: ScenarioConfig, name: str, default):
    return config.tolerances.get(name, default)


def _mesh(config: ScenarioConfig) -> TimeMesh:
    return TimeMesh.from_dt(config.numerics["t_start"], config.numerics["t_end"], config.numerics["dt"])


# ---------------------------------------------------------------------------
# Two-level sweeps
# ---------------------------------------------------------------------------


def _two_level_sweep(config: ScenarioConfig):
    p = config.physics
    if config.kind == "custom":
        return field_sweep(make_polynomial_schedule(p["hx_coeffs"]), make_polynomial_schedule(p["hz_coeffs"]))
    return power_sweep(p["c"], p["gamma"], p["power"])


def run_two_level(config: ScenarioConfig) -> ScenarioResult:
    sweep = _two_level_sweep(config)
    mesh = _mesh(config)
    t = mesh.times
    level = config.physics["level"]
    ph = two_level_phase(sweep, mesh)
    v = two_level_potential(ph, sweep)
    n, nt = bloch_curves(sweep.theta, ph.phi, t)
    theta = np.asarray(sweep.theta(t), dtype=float) * np.ones_like(t)
    tol = {k: v for k, v in config.tolerances.items()}
    cmp = compare_drivers(
        sweep.family(),
        mesh,
        level,
        deformation=two_level_diagonal(sweep, mesh, level),
        counterdiabatic=sweep.counterdiabatic_matrix,
        tolerances=tol,
    )
    metrics = dict(cmp.report.metrics)
    metrics["theta_end"] = Metric(float(theta[-1]), _tol(config, "theta_end", 0.01))
    metrics["bloch_start_error"] = Metric(
        float(max(np.linalg.norm(n.vectors[0] - [1, 0, 0]), np.linalg.norm(nt.vectors[0] - [1, 0, 0]))),
        _tol(config, "bloch_start_error", 1e-6),
    )
    metrics["bloch_end_error"] = Metric(
        float(max(np.linalg.norm(n.vectors[-1] - [0, 0, 1]), np.linalg.norm(nt.vectors[-1] - [0, 0, 1]))),
        _tol(config, "bloch_end_error", 0.01),
    )
    every = config.numerics["sample_every"]
    idx = np.arange(0, t.size, every)
    if idx[-1] != t.size - 1:
        idx = np.append(idx, t.size - 1)
    hy = np.asarray(sweep.theta.d1(t), dtype=float) * np.ones_like(t)
    cols = {
        "t": t,
        "theta": theta,
        "phi": ph.phi,
        "v": v,
        "h_y": hy,
        "nx": n.vectors[:, 0],
        "ny": n.vectors[:, 1],
        "nz": n.vectors[:, 2],
        "nx_tilde": nt.vectors[:, 0],
        "ny_tilde": nt.vectors[:, 1],
        "nz_tilde": nt.vectors[:, 2],
    }
    series = {k: np.asarray(cols[k])[idx] for k in TWO_LEVEL_COLUMNS}
    fids = {
        "t": t[idx],
        "fidelity_bare": cmp.fidelity_bare[idx],
        "fidelity_cd": cmp.fidelity_cd[idx],
        "fidelity_deformed": cmp.fidelity_deformed[idx],
        "fidelity_deformed_bare": cmp.fidelity_deformed_bare[idx],
    }
    return ScenarioResult({"series": series, "fidelity": fids}, VerificationReport(metrics))


def run_two_level_axis(config: ScenarioConfig) -> ScenarioResult:
    sweep = _two_level_sweep(config)
    mesh = _mesh(config)
    p = config.physics
    ax = generalized_axis_two_level(p["varphi"], sweep, mesh, p["phi_start"])
    t = mesh.times
    level = p["level"]
    # propagate under H + (v/2) sz from the deformed initial state
    vt = ax.v
    drive = lambda tt: 0.5 * np.interp(tt, t, vt) * np.array([1.0, -1.0])  # noqa: E731
    energies = np.array([sweep.energy(tk, level) for tk in t])
    dyn = np.concatenate([[0.0], np.cumsum(0.5 * (energies[1:] + energies[:-1]) * np.diff(t))])
    targets = np.array(
        [np.exp(-1j * dyn[k]) * ax.unitary(k) @ sweep.eigenvector(tk, level) for k, tk in enumerate(t)]
    )
    res = propagate_discrete(targets[0], sweep.family(), mesh, potential=drive)
    fid = np.minimum(1.0, [abs(np.vdot(targets[k], res.states[k])) ** 2 for k in range(t.size)])
    metrics = {
        "axis_residual_first": Metric(ax.residuals[0], _tol(config, "axis_residual", 1e-8)),
        "axis_residual_second": Metric(ax.residuals[1], _tol(config, "axis_residual", 1e-8)),
        "axis_rate_mismatch": Metric(ax.rate_mismatch),
        "fidelity_min_deformed": Metric(float(fid.min()), _tol(config, "fidelity_min_deformed", 1e-6), "infidelity"),
        "norm_drift": Metric(res.norm_drift, _tol(config, "norm_drift", 1e-8)),
    }
    every = config.numerics["sample_every"]
    idx = np.arange(0, t.size, every)
    series = {"t": t[idx], "phi": ax.phi[idx], "phi_rate": ax.phi_rate[idx], "v": ax.v[idx], "fidelity_deformed": fid[idx]}
    return ScenarioResult({"series": series}, VerificationReport(metrics))


# ---------------------------------------------------------------------------
# One-dimensional traps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrackingRun:
    """Sampled fidelities of the driven and bare evolutions in a moving trap.

    ``fidelity_deformed`` compares the driven state with the deformed target
    ``exp(-i phi) psi_0``, ``fidelity_bare`` the undriven state with the
    instantaneous ground state ``psi_0``, and ``fidelity_final`` the driven
    final state with ``psi_0(t_end)``.
    """

    times: np.ndarray
    fidelity_deformed: np.ndarray
    fidelity_bare: np.ndarray
    fidelity_final: float
    fidelity_final_bare: float
    grid: SpatialGrid1D
    density_deformed: np.ndarray
    density_bare: np.ndarray
    density_target: np.ndarray
    norm_drift: float


def _tracking(family, driver, phase, grid, mesh, sample_every):
    x = grid.points
    _, psi0 = bound_states_1d(family, grid, mesh.t_start, 1)
    start = StateVector.on_grid(np.exp(-1j * phase(x, mesh.t_start)) * psi0[0], grid)
    driven = split_step_1d(start, family, driver, mesh, sample_every)
    bare = split_step_1d(StateVector.on_grid(psi0[0], grid), family, None, mesh, sample_every)
    f_def, f_bare = [], []
    target = None
    for k, tk in enumerate(driven.times):
        _, gs = bound_states_1d(family, grid, tk, 1)
        target = StateVector.on_grid(gs[0], grid)
        deformed = StateVector.on_grid(np.exp(-1j * phase(x, tk)) * gs[0], grid)
        f_def.append(fidelity(deformed, driven.state(k)))
        f_bare.append(fidelity(target, bare.state(k)))
    return TrackingRun(
        times=driven.times,
        fidelity_deformed=np.array(f_def),
        fidelity_bare=np.array(f_bare),
        fidelity_final=fidelity(target, driven.final),
        fidelity_final_bare=fidelity(target, bare.final),
        grid=grid,
        density_deformed=np.abs(driven.final.amplitudes) ** 2,
        density_bare=np.abs(bare.final.amplitudes) ** 2,
        density_target=np.abs(target.amplitudes) ** 2,
        norm_drift=max(driven.norm_drift, bare.norm_drift),
    )


def transport_tracking(
    mass=1.0, omega=1.0, displacement=1.0, duration=4.0, grid=None, dt=1e-3, sample_every=50, t_start=0.0
) -> TrackingRun:
    """Harmonic trap ``(m w^2/2)(x - x0(t))^2`` with smoothstep ``x0``, driven
    by ``V = -m x0'' x``."""
    grid = grid or SpatialGrid1D(-12.0, 12.0, 1024)
    x0 = make_smoothstep_schedule(0.0, displacement, t_start, t_start + duration)
    family = Potential1D(mass, lambda x, t: 0.5 * mass * omega**2 * (x - x0(t)) ** 2)
    drv = transport_potential(x0, mass)
    mesh = TimeMesh.from_dt(t_start, t_start + duration, dt)
    return _tracking(family, drv.potential, lambda x, t: transport_phase(x, t, x0, mass), grid, mesh, sample_every)


def dilatation_tracking(
    mass=1.0, omega=1.0, xi_start=1.0, xi_end=2.0, duration=4.0, grid=None, dt=1e-3, sample_every=50, t_start=0.0
) -> TrackingRun:
    """Trap ``U0(x/xi)/xi^2`` with ``U0 = m w^2 x^2/2`` and smoothstep ``xi``,
    driven by ``V = -(m/2)(xi''/xi) x^2``. The default box is wider than for
    transport because the dilated ground state reaches further out."""
    grid = grid or SpatialGrid1D(-16.0, 16.0, 1024)
    xi = make_smoothstep_schedule(xi_start, xi_end, t_start, t_start + duration)
    family = Potential1D(mass, lambda x, t: 0.5 * mass * omega**2 * (x / xi(t)) ** 2 / xi(t) ** 2)
    mesh = TimeMesh.from_dt(t_start, t_start + duration, dt)
    drv = dilatation_potential(xi, mass, mesh.times)
    return _tracking(family, drv.potential, lambda x, t: dilatation_phase(x, t, xi, mass), grid, mesh, sample_every)


def _run_tracking(config: ScenarioConfig, run: TrackingRun) -> ScenarioResult:
    metrics = {
        "fidelity_final": Metric(run.fidelity_final, _tol(config, "fidelity_final", 1e-3), "infidelity"),
        "fidelity_min_deformed": Metric(
            float(run.fidelity_deformed.min()), _tol(config, "fidelity_min_deformed", 1e-3), "infidelity"
        ),
        "fidelity_final_bare": Metric(run.fidelity_final_bare),
        "norm_drift": Metric(run.norm_drift, _tol(config, "norm_drift", 1e-8)),
    }
    tables = {
        "series": {"t": run.times, "fidelity_deformed": run.fidelity_deformed, "fidelity_bare": run.fidelity_bare},
        "profile": {
            "x": run.grid.points,
            "density_deformed": run.density_deformed,
            "density_bare": run.density_bare,
            "density_target": run.density_target,
        },
    }
    return ScenarioResult(tables, VerificationReport(metrics))


def _grid(config: ScenarioConfig) -> SpatialGrid1D:
    n = config.numerics
    return SpatialGrid1D(n["x_min"], n["x_max"], n["n_points"])


def run_transport(config: ScenarioConfig) -> ScenarioResult:
    p, n = config.physics, config.numerics
    run = transport_tracking(
        p["mass"], p["omega"], p["displacement"], n["t_end"] - n["t_start"], _grid(config), n["dt"], n["sample_every"], n["t_start"]
    )
    return _run_tracking(config, run)


def run_dilatation(config: ScenarioConfig) -> ScenarioResult:
    p, n = config.physics, config.numerics
    run = dilatation_tracking(
        p["mass"], p["omega"], p["xi_start"], p["xi_end"], n["t_end"] - n["t_start"], _grid(config), n["dt"], n["sample_every"], n["t_start"]
    )
    return _run_tracking(config, run)


# ---------------------------------------------------------------------------
# Hydrogen
# ---------------------------------------------------------------------------


def radial_grid(r_min, r_max, n_radial, spacing="geometric"):
    """Radial nodes from ``r_min`` to ``r_max``.

    Geometric spacing keeps ``dr/r`` constant, which the divergence
    ``r**(1-d) d/dr(r**(d-1) ...)`` needs near the origin: on a uniform grid
    its stencil error grows like ``(dr/r)**2``.
    """
    if spacing == "geometric":
        return np.geomspace(r_min, r_max, n_radial)
    if spacing == "uniform":
        return np.linspace(r_min, r_max, n_radial)
    raise ValueError(f"unknown spacing {spacing!r}")


def hydrogen_dilatation_residual(
    xi0, xi_rate, n_radial, r_max, t=0.0, delta=1e-4, mass=1.0, dimension=3, scaling_form=False, z_min=1e-3, spacing="geometric"
):
    """Relative residual of the radial continuity equation for the
    dilatation driver with ``xi(t) = xi0 + xi_rate t``."""
    xi = make_polynomial_schedule([xi0, xi_rate])
    r = radial_grid(z_min * xi(t) * 1.0001, r_max, n_radial, spacing)
    times = np.array([t - delta, t, t + delta])
    rho = np.array([hydrogen_density(r, float(xi(s)))[0] for s in times])
    _, rate = hydrogen_density(r, float(xi(t)), xi_rate)
    f = hydrogen_dilatation_driver(xi, r, t, mass, z_min=z_min, scaling_form=scaling_form)
    dphi_dr = f.dphi / float(xi(t))
    return continuity_residual_radial(r, times, rho, dphi_dr, mass, dimension=dimension, rho_rate=rate)


def run_hydrogen(config: ScenarioConfig) -> ScenarioResult:
    p, n = config.physics, config.numerics
    xi0, rate, m = p["xi"], p["xi_rate"], p["mass"]
    t = n["t_start"]
    scaling = p["hydrogen_form"] == "scaling"
    xi = make_polynomial_schedule([xi0, rate])
    r = radial_grid(1e-3 * float(xi(t)) * 1.0001, n["r_max"], n["n_radial"])
    dil = hydrogen_dilatation_driver(xi, r, t, m, scaling_form=scaling)
    tr = hydrogen_translation_fields(r, p["r_rate"], 0.0, xi0, m)
    resid = {
        d: hydrogen_dilatation_residual(xi0, rate, n["n_radial"], n["r_max"], t, n["dt"], m, d, scaling) for d in (2, 3)
    }
    spot_z = hydrogen_dilatation_driver(xi, np.array([float(xi(t))]), t, m).dphi[0]
    spot_r = hydrogen_translation_fields(np.array([xi0]), p["r_rate"], 0.0, xi0, m).dphi[0]
    metrics = {
        "continuity_residual": Metric(resid[3], _tol(config, "continuity_residual", 1e-3)),
        "continuity_residual_cylindrical": Metric(resid[2]),
        "spot_dphi_dz_error": Metric(abs(spot_z + m * xi0 * rate / 4), _tol(config, "spot_value", 1e-10)),
        "spot_dphi_dr_error": Metric(abs(spot_r - 2.5 * m * p["r_rate"]), _tol(config, "spot_value", 1e-10)),
    }
    every = n["sample_every"]
    tables = {
        "dilatation": {
            "z": dil.coordinate[::every],
            "dphi": dil.dphi[::every],
            "V": dil.potential[::every],
            "continuity_residual": np.full(dil.coordinate[::every].size, resid[3]),
        },
        "translation": {
            "r": tr.coordinate[::every],
            "dphi": tr.dphi[::every],
            "V": tr.potential[::every],
        },
    }
    return ScenarioResult(tables, VerificationReport(metrics))


# ---------------------------------------------------------------------------
# N-level
# ---------------------------------------------------------------------------


def random_smooth_family(n_levels: int, seed: int, t_start: float, t_end: float) -> DiscreteRealSymmetric:
    """``H(t) = A + s(t) B`` with ``A, B`` drawn from the Gaussian orthogonal
    ensemble and ``s`` a smoothstep from 0 to 1 (so ``H_dot`` and ``H_ddot``
    vanish at both ends)."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n_levels, n_levels))
    B = rng.normal(size=(n_levels, n_levels))
    A, B = 0.5 * (A + A.T), 0.5 * (B + B.T)
    s = make_smoothstep_schedule(0.0, 1.0, t_start, t_end)
    return DiscreteRealSymmetric(n_levels, lambda t: A + float(s(t)) * B, lambda t: float(s.d1(t)) * B)


def run_nlevel(config: ScenarioConfig) -> ScenarioResult:
    p, n = config.physics, config.numerics
    family = random_smooth_family(p["n_levels"], p["seed"], n["t_start"], n["t_end"])
    mesh = _mesh(config)
    cmp = compare_drivers(family, mesh, p["level"], tolerances=dict(config.tolerances))
    d = cmp.deformation
    metrics = dict(cmp.report.metrics)
    metrics["newton_iterations_max"] = Metric(float(d.iterations.max()), _tol(config, "newton_iterations_max", 50))
    every = n["sample_every"]
    idx = np.arange(0, mesh.times.size, every)
    series = {"t": mesh.times[idx]}
    vc = d.centered_potentials()
    for a in range(family.n):
        series[f"phi_{a}"] = d.phases[idx, a]
    for a in range(family.n):
        series[f"v_{a}"] = vc[idx, a]
    series["newton_iterations"] = d.iterations[idx]
    series["continuity_residual"] = d.continuity_residuals[idx]
    series["fidelity_deformed"] = cmp.fidelity_deformed[idx]
    series["fidelity_bare"] = cmp.fidelity_bare[idx]
    return ScenarioResult({"series": series}, VerificationReport(metrics))


RUNNERS = {
    "twolevel-cubic": run_two_level,
    "custom": run_two_level,
    "twolevel-axis": run_two_level_axis,
    "transport-1d": run_transport,
    "dilatation-1d": run_dilatation,
    "hydrogen-check": run_hydrogen,
    "nlevel": run_nlevel,
}


def run_config(config: ScenarioConfig) -> ScenarioResult:
    return RUNNERS[config.kind](config)
