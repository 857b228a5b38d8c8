"""Time-dependent Schrodinger propagators.

* :func:`split_step_1d` -- second-order Strang splitting on a uniform grid,
  kinetic factor applied in Fourier space.
* :func:`propagate_discrete` -- product of exact exponentials of the
  midpoint Hamiltonian (Pauli closed form for two levels).
* :func:`time_evolution_operator` -- the same product acting on the identity.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    DiscreteRealSymmetric,
    Potential1D,
    StateVector,
    TimeMesh,
    frozen_array,
)
from .errors import GridTooSmallError, InvalidArgumentError

__all__ = [
    "PropagationResult",
    "split_step_1d",
    "midpoint_exponential",
    "propagate_discrete",
    "time_evolution_operator",
    "as_hamiltonian",
]


@dataclass(frozen=True)
class PropagationResult:
    """Final state, sampled trajectory and bookkeeping of one run.

    ``states`` has shape ``(n_samples, dim)`` and ``times`` the matching
    sample times (always including the first and last mesh node).
    """

    final: StateVector
    times: np.ndarray
    states: np.ndarray
    norm_drift: float
    wall_time: float

    def state(self, k: int) -> StateVector:
        return StateVector(self.states[k], self.final.basis, self.final.grid)


def _sample_indices(n_steps: int, every: int) -> np.ndarray:
    if int(every) != every or every < 1:
        raise InvalidArgumentError("sample_every must be a positive integer")
    idx = np.arange(0, n_steps + 1, int(every))
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


# ---------------------------------------------------------------------------
# Grid propagation
# ---------------------------------------------------------------------------


def split_step_1d(
    psi0: StateVector,
    family: Potential1D,
    extra_potential: Optional[Callable] = None,
    mesh: TimeMesh = None,
    sample_every: int = 1,
    edge_tol: float = 1e-8,
    phase_bound: float = 0.5,
) -> PropagationResult:
    """Strang splitting ``exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2)``.

    ``V = U + extra_potential`` is evaluated at the step midpoint. The grid is
    treated as periodic for the kinetic factor, so the wave function must
    vanish at both edges: ``|psi|`` at the first and last grid point is
    checked against ``edge_tol`` at every sampled step.

    Raises
    ------
    GridTooSmallError
        If the wave function reaches the grid edges.
    InvalidArgumentError
        If ``dt * max|V|`` exceeds ``phase_bound`` at some step.
    """
    if mesh is None:
        raise InvalidArgumentError("a time mesh is required")
    if psi0.grid is None:
        raise InvalidArgumentError("split_step_1d needs a grid state")
    grid = psi0.grid
    x = grid.points
    dt = mesh.dt
    k = 2 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.spacing)
    kinetic = np.exp(-1j * dt * k**2 / (2 * family.mass))
    psi = np.array(psi0.amplitudes)
    norm0 = psi0.norm()
    times = mesh.times
    keep = _sample_indices(mesh.n_steps, sample_every)
    samples = [psi.copy()]
    start = _time.perf_counter()
    drift = 0.0

    def check_edges(step):
        edge = max(abs(psi[0]), abs(psi[-1]))
        if edge > edge_tol:
            raise GridTooSmallError(
                f"|psi| = {edge:.3g} at the grid edge at t={times[step]:.6g}; widen the grid"
            )

    check_edges(0)
    next_sample = 1
    for step in range(mesh.n_steps):
        tm = times[step] + 0.5 * dt
        V = family.U(x, tm)
        if extra_potential is not None:
            V = V + np.asarray(extra_potential(x, tm), dtype=float)
        vmax = np.max(np.abs(V))
        if dt * vmax > phase_bound:
            raise InvalidArgumentError(
                f"dt*max|V| = {dt * vmax:.3g} exceeds {phase_bound} at t={tm:.6g}; reduce dt"
            )
        half = np.exp(-0.5j * dt * V)
        psi = half * np.fft.ifft(kinetic * np.fft.fft(half * psi))
        if next_sample < keep.size and step + 1 == keep[next_sample]:
            check_edges(step + 1)
            samples.append(psi.copy())
            nrm = np.sqrt(grid.spacing * np.sum(np.abs(psi) ** 2))
            drift = max(drift, abs(nrm - norm0))
            next_sample += 1
    wall = _time.perf_counter() - start
    return PropagationResult(
        final=StateVector.on_grid(psi, grid),
        times=frozen_array(times[keep]),
        states=frozen_array(np.array(samples)),
        norm_drift=float(drift),
        wall_time=wall,
    )


# ---------------------------------------------------------------------------
# Discrete propagation
# ---------------------------------------------------------------------------


def as_hamiltonian(hamiltonian, potential=None) -> Callable:
    """Combine a family (or a callable ``t -> matrix``) with an optional
    driver ``t -> vector`` (diagonal) or ``t -> matrix`` into ``t -> matrix``."""
    base = hamiltonian.H if isinstance(hamiltonian, DiscreteRealSymmetric) else hamiltonian
    if potential is None:
        return lambda t: np.asarray(base(t), dtype=complex)

    def total(t):
        H = np.asarray(base(t), dtype=complex)
        V = np.asarray(potential(t))
        return H + (np.diag(V) if V.ndim == 1 else V)

    return total


def midpoint_exponential(H: np.ndarray, dt: float, herm_tol: float = 1e-10) -> np.ndarray:
    """``exp(-i H dt)`` for a Hermitian matrix.

    Two-level matrices use ``H = a0 + a.sigma``:
    ``exp(-i H dt) = exp(-i a0 dt) (cos(|a| dt) - i sin(|a| dt) a.sigma/|a|)``.
    Larger matrices are diagonalized.
    """
    H = np.asarray(H, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > herm_tol * scale:
        raise InvalidArgumentError("Hamiltonian sample is not Hermitian")
    H = 0.5 * (H + H.conj().T)
    if H.shape == (2, 2):
        a0 = 0.5 * (H[0, 0] + H[1, 1]).real
        ax = H[0, 1].real
        ay = -H[0, 1].imag
        az = 0.5 * (H[0, 0] - H[1, 1]).real
        a = np.sqrt(ax * ax + ay * ay + az * az)
        c = np.cos(a * dt)
        s = np.sinc(a * dt / np.pi) * dt  # sin(a dt)/a, finite at a = 0
        U = np.array(
            [[c - 1j * s * az, -1j * s * (ax - 1j * ay)], [-1j * s * (ax + 1j * ay), c + 1j * s * az]]
        )
        return np.exp(-1j * a0 * dt) * U
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w * dt)) @ V.conj().T


def propagate_discrete(
    psi0,
    hamiltonian,
    mesh: TimeMesh,
    potential: Optional[Callable] = None,
    sample_every: int = 1,
) -> PropagationResult:
    """Propagate an N-vector with the midpoint exponential of ``H + V``."""
    psi = np.array(psi0.amplitudes if isinstance(psi0, StateVector) else psi0, dtype=complex)
    Hfun = as_hamiltonian(hamiltonian, potential)
    times = mesh.times
    dt = mesh.dt
    keep = _sample_indices(mesh.n_steps, sample_every)
    samples = [psi.copy()]
    norm0 = np.linalg.norm(psi)
    drift = 0.0
    start = _time.perf_counter()
    next_sample = 1
    for step in range(mesh.n_steps):
        psi = midpoint_exponential(Hfun(times[step] + 0.5 * dt), dt) @ psi
        if next_sample < keep.size and step + 1 == keep[next_sample]:
            samples.append(psi.copy())
            drift = max(drift, abs(np.linalg.norm(psi) - norm0))
            next_sample += 1
    wall = _time.perf_counter() - start
    return PropagationResult(
        final=StateVector.discrete(psi),
        times=frozen_array(times[keep]),
        states=frozen_array(np.array(samples)),
        norm_drift=float(drift),
        wall_time=wall,
    )


def time_evolution_operator(hamiltonian, mesh: TimeMesh, potential: Optional[Callable] = None, sample_every: int = 1):
    """Samples of ``T(t)`` with ``T(t_start) = 1``.

    Returns
    -------
    times : ndarray
    operators : ndarray, shape (n_samples, N, N)
    """
    Hfun = as_hamiltonian(hamiltonian, potential)
    times = mesh.times
    dt = mesh.dt
    n = np.asarray(Hfun(times[0])).shape[0]
    T = np.eye(n, dtype=complex)
    keep = _sample_indices(mesh.n_steps, sample_every)
    out = [T.copy()]
    next_sample = 1
    for step in range(mesh.n_steps):
        T = midpoint_exponential(Hfun(times[step] + 0.5 * dt), dt) @ T
        if next_sample < keep.size and step + 1 == keep[next_sample]:
            out.append(T.copy())
            next_sample += 1
    return frozen_array(times[keep]), frozen_array(np.array(out))
