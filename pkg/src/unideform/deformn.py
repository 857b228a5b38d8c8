"""Unitary deformation of discrete real-symmetric systems.

For a diagonal unitary ``exp(-i phi_hat)`` and a diagonal driver
``V = diag(v_a)``, the deformed state ``exp(-i phi_hat) |n>`` solves
``i d/dt psi = (H + V) psi`` when, for every component ``a``,

    continuity:       <a|n_dot> - sum_b H_ab sin(phi_a - phi_b) <b|n> = 0
    Hamilton-Jacobi:  (phi_a_dot - v_a + E_n) <a|n> - sum_b H_ab cos(phi_a - phi_b) <b|n> = 0

Two-level systems ``H = (h/2)(cos(theta) sz + sin(theta) sx)`` admit closed
forms for ``phi = phi_1 - phi_2`` and ``v = v_1 - v_2``; a rotation about a
tilted axis is treated as an ODE for the rotation angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .core import (
    DiscreteRealSymmetric,
    Schedule,
    TimeMesh,
    frozen_array,
    make_constant_schedule,
    make_polynomial_schedule,
    time_derivative,
)
from .errors import (
    CoordinateSingularityError,
    InfeasibleSpeedError,
    InvalidArgumentError,
    MeshTooCoarseError,
    NoSolutionFoundError,
    SingularSystemError,
    UndeterminedPotentialError,
)
from .spectral import AdiabaticTrack, adiabatic_tracks, eigvec_derivative_perturbative

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "TwoLevelSweep",
    "field_sweep",
    "power_sweep",
    "TwoLevelPhase",
    "two_level_phase",
    "two_level_potential",
    "two_level_diagonal",
    "DiagonalDeformation",
    "nlevel_deformation",
    "continuity_rows",
    "hamilton_jacobi_rows",
    "hamilton_jacobi_shift_free",
    "StateIndependenceReport",
    "state_independence_check",
    "AxisDeformation",
    "generalized_axis_two_level",
    "axis_unitary",
    "BlochCurve",
    "bloch_curves",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

MAX_PHASE_STEP = 0.5 * np.pi


def _times(mesh) -> np.ndarray:
    if isinstance(mesh, TimeMesh):
        return mesh.times
    t = np.atleast_1d(np.asarray(mesh, dtype=float))
    if t.ndim != 1 or t.size < 1:
        raise InvalidArgumentError("times must be a one-dimensional array")
    return t


def _check_branch(phases: np.ndarray, times: np.ndarray):
    if phases.shape[0] < 2:
        return
    jumps = np.abs(np.diff(phases, axis=0))
    if jumps.ndim > 1:
        jumps = jumps.max(axis=1)
    k = int(np.argmax(jumps))
    if jumps[k] >= MAX_PHASE_STEP:
        raise MeshTooCoarseError(
            f"phase jumps by {jumps[k]:.3g} between t={times[k]:.6g} and t={times[k + 1]:.6g}; "
            "refine the mesh"
        )


# ---------------------------------------------------------------------------
# Two-level sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoLevelSweep:
    """``H(t) = (h/2)(cos(theta) sz + sin(theta) sx)`` with schedules for
    ``theta`` and ``h``; ``hx, hz`` keep the field components when known."""

    theta: Schedule
    h: Schedule
    hx: Optional[Schedule] = None
    hz: Optional[Schedule] = None

    def matrix(self, t) -> np.ndarray:
        th, h = float(self.theta(t)), float(self.h(t))
        return 0.5 * h * np.array([[np.cos(th), np.sin(th)], [np.sin(th), -np.cos(th)]])

    def matrix_rate(self, t) -> np.ndarray:
        th, h = float(self.theta(t)), float(self.h(t))
        thd, hd = float(self.theta.d1(t)), float(self.h.d1(t))
        c, s = np.cos(th), np.sin(th)
        return 0.5 * hd * np.array([[c, s], [s, -c]]) + 0.5 * h * thd * np.array([[-s, c], [c, s]])

    def family(self) -> DiscreteRealSymmetric:
        return DiscreteRealSymmetric(2, self.matrix, self.matrix_rate)

    def counterdiabatic_field(self, t):
        """``h_y = theta_dot``; the exact driver is ``(h_y/2) sy``."""
        return self.theta.d1(t)

    def counterdiabatic_matrix(self, t) -> np.ndarray:
        return 0.5 * float(self.theta.d1(t)) * SIGMA_Y

    def eigenvector(self, t, level: int) -> np.ndarray:
        """Level 0: ``(-sin(theta/2), cos(theta/2))`` at ``-h/2``;
        level 1: ``(cos(theta/2), sin(theta/2))`` at ``+h/2``."""
        th = float(self.theta(t))
        if level == 0:
            return np.array([-np.sin(th / 2), np.cos(th / 2)])
        if level == 1:
            return np.array([np.cos(th / 2), np.sin(th / 2)])
        raise InvalidArgumentError("level must be 0 or 1")

    def energy(self, t, level: int) -> float:
        return (-0.5 if level == 0 else 0.5) * float(self.h(t))


def field_sweep(hx: Schedule, hz: Schedule) -> TwoLevelSweep:
    """Sweep from field components: ``theta = atan2(hx, hz)``, ``h = |(hx, hz)|``.

    Derivatives of ``theta`` and ``h`` follow from the chain rule.
    """

    def parts(t):
        x, z = np.asarray(hx(t), dtype=float), np.asarray(hz(t), dtype=float)
        xd, zd = np.asarray(hx.d1(t), dtype=float), np.asarray(hz.d1(t), dtype=float)
        xdd, zdd = np.asarray(hx.d2(t), dtype=float), np.asarray(hz.d2(t), dtype=float)
        return x, z, xd, zd, xdd, zdd

    def theta(t):
        x, z = np.asarray(hx(t), dtype=float), np.asarray(hz(t), dtype=float)
        return np.arctan2(x, z)

    def theta_d1(t):
        x, z, xd, zd, _, _ = parts(t)
        return (z * xd - x * zd) / (x * x + z * z)

    def theta_d2(t):
        x, z, xd, zd, xdd, zdd = parts(t)
        h2 = x * x + z * z
        num = z * xd - x * zd
        return (z * xdd - x * zdd) / h2 - 2 * num * (x * xd + z * zd) / h2**2

    def h(t):
        x, z = np.asarray(hx(t), dtype=float), np.asarray(hz(t), dtype=float)
        return np.hypot(x, z)

    def h_d1(t):
        x, z, xd, zd, _, _ = parts(t)
        return (x * xd + z * zd) / np.hypot(x, z)

    def h_d2(t):
        x, z, xd, zd, xdd, zdd = parts(t)
        r = np.hypot(x, z)
        return (xd * xd + zd * zd + x * xdd + z * zdd) / r - (x * xd + z * zd) ** 2 / r**3

    lo = max(hx.t_start, hz.t_start)
    hi = min(hx.t_end, hz.t_end)
    return TwoLevelSweep(
        Schedule(theta, theta_d1, theta_d2, lo, hi),
        Schedule(h, h_d1, h_d2, lo, hi),
        hx,
        hz,
    )


def power_sweep(c: float = 1.0, gamma: float = 2.0, power: int = 3) -> TwoLevelSweep:
    """Transverse field ``gamma`` and longitudinal field ``hz = c t**power``.

    ``power=3`` makes ``theta_dot`` and ``theta_ddot`` vanish at ``t = 0``.
    """
    if not gamma > 0:
        raise InvalidArgumentError("gamma must be positive")
    if int(power) != power or power < 1:
        raise InvalidArgumentError("power must be a positive integer")
    coeffs = np.zeros(int(power) + 1)
    coeffs[-1] = c
    return field_sweep(make_constant_schedule(gamma), make_polynomial_schedule(coeffs))


@dataclass(frozen=True)
class TwoLevelPhase:
    """``phi = phi_1 - phi_2`` and its time derivative on a mesh."""

    times: np.ndarray
    phi: np.ndarray
    phi_rate: Optional[np.ndarray]
    sin_phi: np.ndarray


def two_level_phase(sweep: TwoLevelSweep, mesh, singular_tol: float = 1e-14) -> TwoLevelPhase:
    """Solve ``theta_dot + h sin(theta) sin(phi) = 0`` on the principal branch.

    ``phi_dot`` follows from the chain rule on the schedules.

    Raises
    ------
    InfeasibleSpeedError
        If ``|theta_dot / (h sin(theta))| > 1`` somewhere on the mesh.
    MeshTooCoarseError
        If consecutive samples differ by ``pi/2`` or more.
    """
    t = _times(mesh)
    th, thd, thdd = sweep.theta(t), sweep.theta.d1(t), sweep.theta.d2(t)
    h, hd = sweep.h(t), sweep.h.d1(t)
    th, thd, thdd, h, hd = (np.broadcast_to(np.asarray(a, dtype=float), t.shape) for a in (th, thd, thdd, h, hd))
    den = h * np.sin(th)
    still = np.abs(thd) <= singular_tol
    bad = (np.abs(den) <= singular_tol) & ~still
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise InfeasibleSpeedError(f"h sin(theta) vanishes at t={t[k]:.6g} while theta_dot != 0")
    safe = np.where(still, 1.0, den)
    s = np.where(still, 0.0, -thd / safe)
    if np.any(np.abs(s) > 1):
        k = int(np.argmax(np.abs(s)))
        raise InfeasibleSpeedError(
            f"|theta_dot/(h sin theta)| = {abs(s[k]):.6g} > 1 at t={t[k]:.6g}; "
            "no diagonal deformation exists at this speed"
        )
    phi = np.arcsin(s)
    # d/dt of -theta_dot / (h sin theta)
    den_rate = hd * np.sin(th) + h * np.cos(th) * thd
    s_rate = np.where(still & (np.abs(thdd) <= singular_tol), 0.0, -(thdd * safe - thd * den_rate) / safe**2)
    cos_phi = np.sqrt(np.clip(1 - s * s, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_rate = np.where(cos_phi > 0, s_rate / cos_phi, np.nan)
    _check_branch(phi, t)
    return TwoLevelPhase(frozen_array(t), frozen_array(phi), frozen_array(phi_rate), frozen_array(s))


def two_level_potential(phase: TwoLevelPhase, sweep: TwoLevelSweep) -> np.ndarray:
    """``v = phi_dot - h (1 - cos(phi)) cos(theta)``; the driver is ``(v/2) sz``."""
    if phase.phi_rate is None:
        raise InvalidArgumentError("phase carries no time derivative")
    t = phase.times
    h = np.broadcast_to(np.asarray(sweep.h(t), dtype=float), t.shape)
    th = np.broadcast_to(np.asarray(sweep.theta(t), dtype=float), t.shape)
    return phase.phi_rate - h * (1 - np.cos(phase.phi)) * np.cos(th)


# ---------------------------------------------------------------------------
# N-level deformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalDeformation:
    """Phases ``phi_a(t)`` and potentials ``v_a(t)`` for one tracked level.

    ``potentials`` satisfy the Hamilton-Jacobi rows as written (they include
    ``E_n``); :meth:`centered_potentials` removes the common shift.
    """

    level: int
    times: np.ndarray
    phases: np.ndarray
    potentials: np.ndarray
    phase_rates: np.ndarray
    vectors: np.ndarray
    vector_rates: np.ndarray
    energies: np.ndarray
    iterations: np.ndarray = field(default=None)
    continuity_residuals: np.ndarray = field(default=None)
    hj_residuals: np.ndarray = field(default=None)

    def centered_potentials(self) -> np.ndarray:
        return self.potentials - self.potentials.mean(axis=1, keepdims=True)

    def phase_differences(self) -> np.ndarray:
        """``phi_a - phi_0`` for ``a >= 1``."""
        return self.phases[:, 1:] - self.phases[:, :1]

    def potential_differences(self) -> np.ndarray:
        return self.potentials[:, 1:] - self.potentials[:, :1]

    def unitary_diagonal(self, k: int) -> np.ndarray:
        return np.exp(-1j * self.phases[k])

    def target_state(self, k: int) -> np.ndarray:
        """``exp(-i phi_hat) |n(t_k)>`` without the dynamical phase."""
        return self.unitary_diagonal(k) * self.vectors[k]

    def driver(self, t) -> np.ndarray:
        """Centered potential vector linearly interpolated at ``t``."""
        vc = self.centered_potentials()
        return np.array([np.interp(t, self.times, vc[:, a]) for a in range(vc.shape[1])])


def continuity_rows(H, n, ndot, phi) -> np.ndarray:
    d = phi[:, None] - phi[None, :]
    return ndot - (H * np.sin(d)) @ n


def hamilton_jacobi_rows(H, n, E, phi, phi_rate, v) -> np.ndarray:
    d = phi[:, None] - phi[None, :]
    return (phi_rate - v + E) * n - (H * np.cos(d)) @ n


def hamilton_jacobi_shift_free(H, n, E, phi, phi_rate, v) -> np.ndarray:
    """Hamilton-Jacobi rows after removing the best common shift of ``v``.

    A constant added to every ``v_a`` changes the rows by a multiple of ``n``;
    projecting that direction out compares drivers that differ only by the
    irrelevant shift.
    """
    r = hamilton_jacobi_rows(H, n, E, phi, phi_rate, v)
    return r - n * (n @ r) / (n @ n)


def _continuity_jacobian(H, n, phi) -> np.ndarray:
    d = phi[:, None] - phi[None, :]
    C = H * np.cos(d) * n[None, :]
    return C - np.diag(C.sum(axis=1))


def _polish(H, n, ndot, phi, free, res, steps=2):
    # a converged iterate still carries ~tol error, which the finite-difference
    # phi_dot amplifies by 1/dt; full Newton steps are accepted while they help
    for _ in range(steps):
        r = continuity_rows(H, n, ndot, phi)
        J = _continuity_jacobian(H, n, phi)[:, free]
        trial = phi.copy()
        trial[free] += np.linalg.lstsq(J, -r, rcond=None)[0]
        res_trial = np.max(np.abs(continuity_rows(H, n, ndot, trial)))
        if not res_trial < res:
            break
        phi, res = trial, res_trial
    return phi, res


def _solve_continuity(H, n, ndot, phi0, gauge, tol, max_iter, max_halvings):
    phi = phi0.copy()
    free = np.arange(len(phi)) != gauge
    r = continuity_rows(H, n, ndot, phi)
    res = np.max(np.abs(r))
    for it in range(max_iter + 1):
        if res <= tol:
            phi, res = _polish(H, n, ndot, phi, free, res)
            return phi, it, res
        if it == max_iter:
            break
        J = _continuity_jacobian(H, n, phi)[:, free]
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = phi.copy()
            trial[free] += lam * step
            r_trial = continuity_rows(H, n, ndot, trial)
            res_trial = np.max(np.abs(r_trial))
            if res_trial < res:
                break
            lam *= 0.5
        else:
            break
        phi, r, res = trial, r_trial, res_trial
    raise NoSolutionFoundError(f"continuity equations did not converge (residual {res:.3g})")


def nlevel_deformation(
    family: DiscreteRealSymmetric,
    track: AdiabaticTrack,
    phi0: Optional[Sequence[float]] = None,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_halvings: int = 20,
    component_tol: float = 1e-10,
    derivative: str = "track",
) -> DiagonalDeformation:
    """Solve the continuity rows for the phases at every mesh time, then read
    the potentials from the Hamilton-Jacobi rows.

    The phase of the component with the largest weight at ``t_start`` is held
    fixed (gauge), so ``N - 1`` differences are solved by damped Gauss-Newton
    with step halving, warm-started from the previous time. ``phi_dot`` uses
    finite differences across the mesh. ``derivative="perturbative"`` replaces
    the track's finite-difference ``n_dot`` by the sum-over-states formula.

    Raises
    ------
    UndeterminedPotentialError
        If some ``|<a|n>|`` falls below ``component_tol``.
    NoSolutionFoundError
        If Newton fails at some mesh time.
    """
    times = track.times
    N = family.n
    if track.vectors.shape[1] != N:
        raise InvalidArgumentError("track dimension does not match the family")
    if derivative not in ("track", "perturbative"):
        raise InvalidArgumentError("derivative must be 'track' or 'perturbative'")
    vecs = track.vectors
    small = np.abs(vecs) < component_tol
    if np.any(small):
        k_idx, a_idx = np.nonzero(small)
        a = int(a_idx[0])
        ks = k_idx[a_idx == a]
        raise UndeterminedPotentialError(
            f"component {a} of level {track.level} vanishes for t in "
            f"[{times[ks.min()]:.6g}, {times[ks.max()]:.6g}]; v_{a} is unconstrained there",
            window=(float(times[ks.min()]), float(times[ks.max()])),
            component=a,
        )
    if derivative == "track":
        if track.derivatives is None:
            raise InvalidArgumentError("track carries no derivatives")
        rates = np.array(track.derivatives)
    else:
        rates = np.empty_like(vecs)
        for k, tk in enumerate(times):
            d = eigvec_derivative_perturbative(family.H(tk), family.dH(tk), track.level)
            # align with the track's sign
            rates[k] = d if np.dot(vecs[k], _eigvec(family.H(tk), track.level)) > 0 else -d
    E = np.array(track.energies)
    phi = np.zeros(N) if phi0 is None else np.array(phi0, dtype=float)
    if phi.shape != (N,):
        raise InvalidArgumentError(f"phi0 must have length {N}")
    gauge = int(np.argmax(np.abs(vecs[0])))
    phases = np.empty((times.size, N))
    iters = np.empty(times.size, dtype=int)
    cres = np.empty(times.size)
    Hs = np.array([family.H(tk) for tk in times])
    for k in range(times.size):
        try:
            phi, it, res = _solve_continuity(Hs[k], vecs[k], rates[k], phi, gauge, tol, max_iter, max_halvings)
        except NoSolutionFoundError as exc:
            raise NoSolutionFoundError(f"at t={times[k]:.6g}: {exc}") from None
        phases[k], iters[k], cres[k] = phi, it, res
    _check_branch(phases, times)
    if times.size >= 2:
        phase_rates = time_derivative(phases, times[1] - times[0], axis=0)
    else:
        phase_rates = np.zeros_like(phases)
    pots = np.empty_like(phases)
    hj = np.empty(times.size)
    for k in range(times.size):
        d = phases[k][:, None] - phases[k][None, :]
        coupling = (Hs[k] * np.cos(d)) @ vecs[k]
        pots[k] = phase_rates[k] + E[k] - coupling / vecs[k]
        hj[k] = np.max(np.abs(hamilton_jacobi_rows(Hs[k], vecs[k], E[k], phases[k], phase_rates[k], pots[k])))
    return DiagonalDeformation(
        level=track.level,
        times=frozen_array(times),
        phases=frozen_array(phases),
        potentials=frozen_array(pots),
        phase_rates=frozen_array(phase_rates),
        vectors=frozen_array(vecs),
        vector_rates=frozen_array(rates),
        energies=frozen_array(E),
        iterations=frozen_array(iters),
        continuity_residuals=frozen_array(cres),
        hj_residuals=frozen_array(hj),
    )


def _eigvec(H, level):
    return np.linalg.eigh(H)[1][:, level]


def two_level_diagonal(sweep: TwoLevelSweep, mesh, level: int = 0) -> DiagonalDeformation:
    """Closed-form two-level deformation in diagonal form: ``phi_hat =
    diag(phi/2, -phi/2)`` and ``V = diag(v/2, -v/2)`` (shift fixed to zero)."""
    t = _times(mesh)
    ph = two_level_phase(sweep, t)
    v = two_level_potential(ph, sweep)
    vecs = np.array([sweep.eigenvector(tk, level) for tk in t])
    th_rate = np.asarray(sweep.theta.d1(t), dtype=float) * np.ones_like(t)
    sign = -1.0 if level == 0 else 1.0
    # d/dt of the closed-form eigenvectors
    rates = 0.5 * th_rate[:, None] * np.array([sweep.eigenvector(tk, 1 - level) for tk in t]) * sign
    E = np.array([sweep.energy(tk, level) for tk in t])
    phases = np.stack([0.5 * ph.phi, -0.5 * ph.phi], axis=1)
    phase_rates = np.stack([0.5 * ph.phi_rate, -0.5 * ph.phi_rate], axis=1)
    pots = np.stack([0.5 * v, -0.5 * v], axis=1)
    return DiagonalDeformation(
        level=level,
        times=frozen_array(t),
        phases=frozen_array(phases),
        potentials=frozen_array(pots),
        phase_rates=frozen_array(phase_rates),
        vectors=frozen_array(vecs),
        vector_rates=frozen_array(rates),
        energies=frozen_array(E),
    )


@dataclass(frozen=True)
class StateIndependenceReport:
    """Spread across levels of the phase and potential differences.

    ``phase_spread = max_t,a max_n |(phi_a - phi_0)^(n) - mean_n(...)|`` and
    likewise for ``potential_spread``.
    """

    phase_spread: float
    potential_spread: float
    max_phase: float
    max_potential: float
    deformations: tuple


def _spread(arrs) -> float:
    stack = np.stack(arrs)
    return float(np.max(np.max(stack, axis=0) - np.min(stack, axis=0))) if stack.size else 0.0


def state_independence_check(family: DiscreteRealSymmetric, mesh, levels=None, **kwargs) -> StateIndependenceReport:
    """Deform every tracked level and measure how much the phase and
    potential differences depend on the level."""
    tracks = adiabatic_tracks(family, mesh, levels)
    defs = tuple(nlevel_deformation(family, tr, **kwargs) for tr in tracks)
    dphi = [d.phase_differences() for d in defs]
    dv = [d.potential_differences() for d in defs]
    return StateIndependenceReport(
        phase_spread=_spread(dphi),
        potential_spread=_spread(dv),
        max_phase=float(max(np.max(np.abs(d.phases - d.phases.mean(axis=1, keepdims=True))) for d in defs)),
        max_potential=float(max(np.max(np.abs(d.centered_potentials())) for d in defs)),
        deformations=defs,
    )


# ---------------------------------------------------------------------------
# Rotation about a tilted axis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxisDeformation:
    """Rotation angle ``phi(t)`` about ``m = (sin(varphi), 0, cos(varphi))``
    and the potential ``v(t)`` of the driver ``(v/2) sz``.

    The deformed state is ``exp(-i phi m.sigma) psi_ad``. ``residuals`` holds
    the largest absolute residual of each defining equation on the mesh for
    the returned ``(phi, phi_rate, v)``; ``rate_mismatch`` is the largest gap
    between ``phi_rate`` and a finite-difference derivative of ``phi``, which
    measures how well the mesh resolves the integrated angle.
    """

    varphi: float
    times: np.ndarray
    phi: np.ndarray
    phi_rate: np.ndarray
    v: np.ndarray
    residuals: tuple
    rate_mismatch: float = 0.0

    def unitary(self, k: int) -> np.ndarray:
        return axis_unitary(self.phi[k], self.varphi)


def axis_unitary(phi: float, varphi: float) -> np.ndarray:
    """``exp(-i phi m.sigma)`` for ``m = (sin(varphi), 0, cos(varphi))``."""
    M = np.sin(varphi) * SIGMA_X + np.cos(varphi) * SIGMA_Z
    return np.cos(phi) * np.eye(2) - 1j * np.sin(phi) * M


def _axis_A(phi, theta, varphi):
    return (np.cos(phi) ** 2 + np.sin(phi) ** 2 * np.cos(2 * varphi)) * np.sin(theta) - np.sin(phi) ** 2 * np.sin(
        2 * varphi
    ) * np.cos(theta)


def axis_residuals(phi, phi_rate, v, theta, theta_rate, h, varphi):
    """Residuals of the two defining equations (first, second)."""
    r1 = theta_rate - (v * np.sin(varphi) - h * np.sin(theta - varphi)) * np.sin(2 * phi)
    r2 = 0.5 * v * _axis_A(phi, theta, varphi) - (
        phi_rate * np.sin(theta - varphi) - 0.5 * h * np.sin(2 * (theta - varphi)) * np.sin(phi) ** 2
    )
    return r1, r2


def _axis_solve(phi, theta, theta_rate, h, varphi, still_tol, det_tol):
    """Solve the linear pair for ``(v, phi_dot)`` at one instant."""
    s2 = np.sin(2 * phi)
    stv = np.sin(theta - varphi)
    if abs(stv) < det_tol:
        raise SingularSystemError(f"sin(theta - varphi) = {stv:.3g}; phi_dot is not determined")
    A = _axis_A(phi, theta, varphi)
    if abs(np.sin(varphi) * s2) < det_tol:
        if abs(theta_rate) > still_tol:
            raise CoordinateSingularityError(
                f"sin(2 phi) sin(varphi) = {np.sin(varphi) * s2:.3g} while theta_dot = {theta_rate:.3g}"
            )
        # first equation holds identically; keep phi frozen
        phi_rate = 0.0
        if abs(A) < det_tol:
            raise SingularSystemError("v is not determined by the second equation")
        v = 2 * (-0.5 * h * np.sin(2 * (theta - varphi)) * np.sin(phi) ** 2) / A
        return v, phi_rate
    v = (theta_rate / s2 + h * stv) / np.sin(varphi)
    phi_rate = (0.5 * v * A + 0.5 * h * np.sin(2 * (theta - varphi)) * np.sin(phi) ** 2) / stv
    return v, phi_rate


def generalized_axis_two_level(
    varphi: float,
    sweep: TwoLevelSweep,
    mesh,
    phi_start: float = 0.0,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    singular_tol: float = 1e-6,
    det_tol: float = 1e-12,
) -> AxisDeformation:
    """Rotation angle and potential for a fixed tilted axis.

    For ``varphi != 0`` the first equation fixes ``v`` and the second then
    gives ``phi_dot``; the resulting ODE is integrated with an adaptive
    Runge-Kutta 4(5) method. For ``varphi = 0`` the first equation is
    algebraic, ``sin(2 phi) = -theta_dot / (h sin(theta))``, and ``phi_start``
    is ignored.

    Raises
    ------
    CoordinateSingularityError
        If ``|sin(2 phi)|`` drops below ``singular_tol`` while ``theta_dot != 0``.
    SingularSystemError
        If an elimination denominator falls below ``det_tol``.
    """
    t = _times(mesh)
    if t.size < 5:
        raise InvalidArgumentError("at least five mesh times are needed")
    th = np.broadcast_to(np.asarray(sweep.theta(t), dtype=float), t.shape)
    thd = np.broadcast_to(np.asarray(sweep.theta.d1(t), dtype=float), t.shape)
    h = np.broadcast_to(np.asarray(sweep.h(t), dtype=float), t.shape)
    if varphi == 0.0:
        ph = two_level_phase(sweep, t)
        phi = 0.5 * ph.phi
        phi_rate = 0.5 * ph.phi_rate
        A = np.sin(th)
        if np.any(np.abs(A) < det_tol):
            raise SingularSystemError("sin(theta) vanishes; v is not determined")
        v = 2 * (phi_rate * np.sin(th) - 0.5 * h * np.sin(2 * th) * np.sin(phi) ** 2) / A
    else:
        still_tol = 1e-12 * max(1.0, float(np.max(np.abs(thd))))

        def rhs(tt, y):
            return [
                _axis_solve(y[0], float(sweep.theta(tt)), float(sweep.theta.d1(tt)), float(sweep.h(tt)), varphi, still_tol, det_tol)[1]
            ]

        def near_axis(tt, y):
            moving = abs(float(sweep.theta.d1(tt))) > still_tol
            return abs(np.sin(2 * y[0])) - singular_tol if moving else 1.0

        near_axis.terminal = True
        sol = solve_ivp(
            rhs,
            (t[0], t[-1]),
            [phi_start],
            method="RK45",
            t_eval=t,
            rtol=rtol,
            atol=atol,
            events=near_axis,
            max_step=10 * (t[1] - t[0]),
        )
        if sol.status == 1:
            te = float(sol.t_events[0][0])
            raise CoordinateSingularityError(
                f"sin(2 phi) reaches {singular_tol:g} at t={te:.6g} while theta_dot != 0; "
                f"the axis varphi={varphi} cannot follow the sweep beyond that time"
            )
        if sol.status != 0:
            raise NoSolutionFoundError(f"axis ODE failed: {sol.message}")
        phi = sol.y[0]
        pairs = np.array([_axis_solve(p, a, b, c, varphi, still_tol, det_tol) for p, a, b, c in zip(phi, th, thd, h)])
        v, phi_rate = pairs[:, 0], pairs[:, 1]
    _check_branch(phi, t)
    fd_rate = time_derivative(phi, t[1] - t[0])
    r1, r2 = axis_residuals(phi, phi_rate, v, th, thd, h, varphi)
    return AxisDeformation(
        varphi=float(varphi),
        times=frozen_array(t),
        phi=frozen_array(phi),
        phi_rate=frozen_array(phi_rate),
        v=frozen_array(v),
        residuals=(float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))),
        rate_mismatch=float(np.max(np.abs(fd_rate - phi_rate))),
    )


# ---------------------------------------------------------------------------
# Bloch curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlochCurve:
    times: np.ndarray
    vectors: np.ndarray
    deformed: bool = False

    def __post_init__(self):
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1) > 1e-10):
            raise InvalidArgumentError("Bloch vectors must have unit length")


def bloch_curves(theta: Schedule, phi, mesh):
    """``n = (sin th, 0, cos th)`` and ``n_tilde = (sin th cos phi, sin th sin phi, cos th)``."""
    t = _times(mesh)
    th = np.broadcast_to(np.asarray(theta(t), dtype=float), t.shape)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), t.shape)
    n = np.stack([np.sin(th), np.zeros_like(th), np.cos(th)], axis=1)
    nt = np.stack([np.sin(th) * np.cos(phi), np.sin(th) * np.sin(phi), np.cos(th)], axis=1)
    return BlochCurve(frozen_array(t), frozen_array(n)), BlochCurve(frozen_array(t), frozen_array(nt), True)
