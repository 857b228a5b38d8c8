"""Fidelities, residual metrics and the three-driver comparison."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DiscreteRealSymmetric, StateVector, TimeMesh, time_derivative
from .deformn import DiagonalDeformation, continuity_rows, hamilton_jacobi_shift_free, nlevel_deformation
from .errors import InvalidArgumentError
from .evolve import as_hamiltonian, propagate_discrete
from .spectral import adiabatic_tracks, counterdiabatic_hamiltonian

__all__ = [
    "Metric",
    "VerificationReport",
    "fidelity",
    "invariant_residual",
    "EndpointReport",
    "endpoint_conditions",
    "DriverComparison",
    "compare_drivers",
    "DEFAULT_TOLERANCES",
]

DEFAULT_TOLERANCES = {
    "fidelity_final_cd": 1e-6,
    "fidelity_min_cd": 1e-6,
    "fidelity_min_deformed": 1e-6,
    "fidelity_final_deformed_bare": 1e-4,
    "invariant_residual_max": 1e-5,
    "continuity_residual": 1e-8,
    "hj_residual": 1e-6,
    "endpoint_phase_start": 1e-6,
    "endpoint_phase_rate_start": 1e-6,
    "endpoint_phase_end": 1e-2,
    "endpoint_phase_rate_end": 1e-2,
    "norm_drift": 1e-8,
}


@dataclass(frozen=True)
class Metric:
    """One scalar with its tolerance.

    ``kind="infidelity"`` passes when ``1 - value <= tolerance``; ``"upper"``
    when ``value <= tolerance``; ``tolerance=None`` marks an informational
    value that always passes.
    """

    value: float
    tolerance: Optional[float] = None
    kind: str = "upper"

    @property
    def passed(self) -> bool:
        if self.tolerance is None:
            return bool(np.isfinite(self.value))
        if self.kind == "infidelity":
            return bool(1.0 - self.value <= self.tolerance)
        return bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        return {"value": float(self.value), "tolerance": self.tolerance, "pass": self.passed}


@dataclass(frozen=True)
class VerificationReport:
    metrics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.metrics.values())

    def failures(self) -> list:
        return [name for name, m in self.metrics.items() if not m.passed]

    def __getitem__(self, name) -> float:
        return self.metrics[name].value

    def to_dict(self) -> dict:
        return {name: m.to_dict() for name, m in self.metrics.items()}

    def merged(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport({**self.metrics, **other.metrics})


def _amps(state):
    if isinstance(state, StateVector):
        return state.amplitudes, state.basis, state.weight
    a = np.asarray(state, dtype=complex)
    return a, "discrete", 1.0


def fidelity(a, b) -> float:
    """``|<a|b>|**2`` with the basis-appropriate weight, clipped to [0, 1]."""
    va, basis_a, w = _amps(a)
    vb, basis_b, _ = _amps(b)
    if basis_a != basis_b:
        raise InvalidArgumentError(f"basis mismatch: {basis_a} vs {basis_b}")
    if va.shape != vb.shape:
        raise InvalidArgumentError("states have different lengths")
    if isinstance(a, StateVector) and isinstance(b, StateVector) and a.grid != b.grid:
        raise InvalidArgumentError("grid states live on different grids")
    return float(min(1.0, abs(w * np.vdot(va, vb)) ** 2))


def invariant_residual(states, times, hamiltonian, potential=None) -> float:
    """``max_t || i dP/dt - [H + V, P] ||_F`` for ``P = |psi><psi|``.

    ``dP/dt`` uses second-order central differences, so the maximum runs over
    interior samples, which must be uniformly spaced.
    """
    psi = np.asarray(states, dtype=complex)
    t = np.asarray(times, dtype=float)
    if psi.ndim != 2 or psi.shape[0] != t.size:
        raise InvalidArgumentError("states must have shape (n_times, N)")
    if t.size < 3:
        raise InvalidArgumentError("at least three samples are needed")
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
        raise InvalidArgumentError("samples must be uniformly spaced")
    Hfun = as_hamiltonian(hamiltonian, potential)
    P = np.einsum("ta,tb->tab", psi, psi.conj())
    worst = 0.0
    for k in range(1, t.size - 1):
        dP = (P[k + 1] - P[k - 1]) / (2 * dt)
        H = Hfun(t[k])
        r = 1j * dP - (H @ P[k] - P[k] @ H)
        worst = max(worst, float(np.linalg.norm(r)))
    return worst


@dataclass(frozen=True)
class EndpointReport:
    phase_start: float
    rate_start: float
    phase_end: float
    rate_end: float
    tolerance: float
    end_tolerance: float

    @property
    def passed(self) -> bool:
        return (
            max(self.phase_start, self.rate_start) <= self.tolerance
            and max(self.phase_end, self.rate_end) <= self.end_tolerance
        )


def endpoint_conditions(phi, mesh, phi_rate=None, tol: float = 1e-6, end_tol: Optional[float] = None) -> EndpointReport:
    """``|phi|`` and ``|phi_dot|`` at both ends of the mesh.

    ``phi`` may be one phase difference per time or an array ``(n_times, k)``
    (the largest magnitude is taken). ``end_tol`` defaults to ``tol``; a
    larger value accounts for sweeps truncated at a finite ``t_end``.
    """
    t = mesh.times if isinstance(mesh, TimeMesh) else np.asarray(mesh, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.shape[0] != t.size:
        raise InvalidArgumentError("phi must have one entry per mesh time")
    if phi_rate is None:
        phi_rate = time_derivative(phi, t[1] - t[0], axis=0)
    phi_rate = np.asarray(phi_rate, dtype=float)

    def mag(a, k):
        return float(np.max(np.abs(a[k])))

    return EndpointReport(
        mag(phi, 0),
        mag(phi_rate, 0),
        mag(phi, -1),
        mag(phi_rate, -1),
        tol,
        tol if end_tol is None else end_tol,
    )


# ---------------------------------------------------------------------------
# Driver comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriverComparison:
    """Trajectories and fidelity series of the three drivers."""

    report: VerificationReport
    times: np.ndarray
    fidelity_bare: np.ndarray
    fidelity_cd: np.ndarray
    fidelity_deformed: np.ndarray
    fidelity_deformed_bare: np.ndarray
    deformation: DiagonalDeformation
    deformed_states: np.ndarray


def _dynamical_phases(times, energies):
    return np.concatenate([[0.0], np.cumsum(0.5 * (energies[1:] + energies[:-1]) * np.diff(times))])


def compare_drivers(
    family: DiscreteRealSymmetric,
    mesh: TimeMesh,
    level: int = 0,
    deformation: Optional[DiagonalDeformation] = None,
    counterdiabatic: Optional[Callable] = None,
    tolerances: Optional[dict] = None,
    gap_min: float = 1e-6,
) -> DriverComparison:
    """Propagate the tracked level under (i) ``H``, (ii) ``H + H_cd`` and
    (iii) ``H + diag(v)``.

    Targets: the adiabatic state for (i) and (ii); the deformed adiabatic
    state ``exp(-i phi_hat)|psi_ad>`` during the sweep for (iii), and the bare
    adiabatic state at ``t_end``. Every driver starts from its own target at
    ``t_start``. ``deformation`` defaults to :func:`nlevel_deformation`;
    ``counterdiabatic`` (``t -> matrix``) defaults to the sum-over-states form.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    t = mesh.times
    track = adiabatic_tracks(family, mesh, [level])[0]
    if deformation is None:
        deformation = nlevel_deformation(family, track)
    if deformation.times.shape != t.shape or np.max(np.abs(deformation.times - t)) > 1e-12:
        raise InvalidArgumentError("deformation is sampled on a different mesh")
    if counterdiabatic is None:
        counterdiabatic = lambda tt: counterdiabatic_hamiltonian(family, tt, gap_min)  # noqa: E731

    # the deformation fixes its own eigenvector sign; align the track with it
    signs = np.sign(np.sum(track.vectors * deformation.vectors, axis=1))
    vecs = track.vectors * signs[:, None]
    theta = _dynamical_phases(t, track.energies)
    adiabatic = np.exp(-1j * theta)[:, None] * vecs
    deformed = np.exp(-1j * deformation.phases) * adiabatic

    vc = deformation.centered_potentials()
    drive = lambda tt: np.array([np.interp(tt, t, vc[:, a]) for a in range(vc.shape[1])])  # noqa: E731

    bare = propagate_discrete(adiabatic[0], family, mesh)
    cd = propagate_discrete(adiabatic[0], family, mesh, potential=counterdiabatic)
    dfm = propagate_discrete(deformed[0], family, mesh, potential=drive)

    def series(res, target):
        return np.minimum(1.0, [abs(np.vdot(target[k], res.states[k])) ** 2 for k in range(t.size)])

    f_bare = series(bare, adiabatic)
    f_cd = series(cd, adiabatic)
    f_def = series(dfm, deformed)
    f_def_bare = series(dfm, adiabatic)

    # the deformed trajectory against the invariant equation, with the driver
    # evaluated at the sample times (linear interpolation is exact there)
    inv = invariant_residual(dfm.states, t, family, lambda tt: drive(tt))

    Hs = [family.H(tk) for tk in t]
    cres = max(
        float(np.max(np.abs(continuity_rows(Hs[k], deformation.vectors[k], deformation.vector_rates[k], deformation.phases[k]))))
        for k in range(t.size)
    )
    hj = max(
        float(
            np.max(
                np.abs(
                    hamilton_jacobi_shift_free(
                        Hs[k],
                        deformation.vectors[k],
                        deformation.energies[k],
                        deformation.phases[k],
                        deformation.phase_rates[k],
                        deformation.potentials[k],
                    )
                )
            )
        )
        for k in range(t.size)
    )
    dphi = deformation.phases - deformation.phases[:, :1]
    dphi_rate = deformation.phase_rates - deformation.phase_rates[:, :1]
    ends = endpoint_conditions(dphi, t, dphi_rate)

    m = {
        "fidelity_final_bare": Metric(f_bare[-1]),
        "fidelity_min_bare": Metric(f_bare.min()),
        "fidelity_final_cd": Metric(f_cd[-1], tol["fidelity_final_cd"], "infidelity"),
        "fidelity_min_cd": Metric(f_cd.min(), tol["fidelity_min_cd"], "infidelity"),
        "fidelity_final_deformed": Metric(f_def[-1], tol["fidelity_min_deformed"], "infidelity"),
        "fidelity_min_deformed": Metric(f_def.min(), tol["fidelity_min_deformed"], "infidelity"),
        "fidelity_final_deformed_bare": Metric(f_def_bare[-1], tol["fidelity_final_deformed_bare"], "infidelity"),
        "invariant_residual_max": Metric(inv, tol["invariant_residual_max"]),
        "continuity_residual": Metric(cres, tol["continuity_residual"]),
        "hj_residual": Metric(hj, tol["hj_residual"]),
        "endpoint_phase_start": Metric(ends.phase_start, tol["endpoint_phase_start"]),
        "endpoint_phase_rate_start": Metric(ends.rate_start, tol["endpoint_phase_rate_start"]),
        "endpoint_phase_end": Metric(ends.phase_end, tol["endpoint_phase_end"]),
        "endpoint_phase_rate_end": Metric(ends.rate_end, tol["endpoint_phase_rate_end"]),
        "norm_drift": Metric(max(bare.norm_drift, cd.norm_drift, dfm.norm_drift), tol["norm_drift"]),
    }
    return DriverComparison(
        report=VerificationReport(m),
        times=t,
        fidelity_bare=f_bare,
        fidelity_cd=f_cd,
        fidelity_deformed=f_def,
        fidelity_deformed_bare=f_def_bare,
        deformation=deformation,
        deformed_states=dfm.states,
    )
