"""Instantaneous eigenproblems, gauge-fixed adiabatic tracks and the exact
counterdiabatic term used as the reference driver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import (
    DiscreteRealSymmetric,
    Potential1D,
    SpatialGrid1D,
    StateVector,
    TimeMesh,
    frozen_array,
    time_derivative,
)
from .errors import (
    DegeneracyError,
    DomainError,
    InvalidArgumentError,
    MeshTooCoarseError,
)

__all__ = [
    "AdiabaticTrack",
    "CounterdiabaticTerm",
    "eigensystem_real_symmetric",
    "bound_states_1d",
    "gauge_fix_track",
    "adiabatic_tracks",
    "eigvec_derivative_perturbative",
    "counterdiabatic_term",
    "counterdiabatic_hamiltonian",
    "adiabatic_state",
]


def eigensystem_real_symmetric(H, symmetry_tol: float = 1e-10):
    """Ascending eigenvalues and orthonormal real eigenvectors (as columns)."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgumentError("H must be a square matrix")
    if np.max(np.abs(H - H.T), initial=0.0) > symmetry_tol * max(1.0, np.max(np.abs(H))):
        raise InvalidArgumentError("H is not symmetric")
    return np.linalg.eigh(0.5 * (H + H.T))


def _fix_sign(vec: np.ndarray, rel_tol: float = 1e-6) -> np.ndarray:
    # first significant component positive; tails below rel_tol carry noise
    idx = np.flatnonzero(np.abs(vec) > rel_tol * np.max(np.abs(vec)))[0]
    return vec if vec[idx] > 0 else -vec


def bound_states_1d(family: Potential1D, grid: SpatialGrid1D, t: float, k: int):
    """Lowest ``k`` eigenpairs of ``-(1/2m) d2/dx2 + U(x, t)`` on ``grid``.

    Uses the three-point finite-difference Laplacian with Dirichlet edges.

    Returns
    -------
    energies : ndarray, shape (k,)
    states : ndarray, shape (k, n_points)
        Real eigenfunctions normalized with the Riemann weight ``grid.spacing``,
        each with its first significant component positive.
    """
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    if k > grid.n_points // 4:
        raise InvalidArgumentError(f"k={k} exceeds the reliable count n_points/4")
    x = grid.points
    h = grid.spacing
    U = family.U(x, t)
    kin = 1.0 / (2 * family.mass * h * h)
    diag = U + 2 * kin
    off = -kin * np.ones(grid.n_points - 1)
    energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))
    if min(U[0], U[-1]) <= energies[-1]:
        raise DomainError(
            f"potential is not confining on the grid at t={t}: edge values "
            f"{U[0]:.4g}, {U[-1]:.4g} do not exceed E_{k - 1}={energies[-1]:.4g}"
        )
    states = np.empty((k, grid.n_points))
    for j in range(k):
        v = vecs[:, j] / np.sqrt(h * np.sum(vecs[:, j] ** 2))
        states[j] = _fix_sign(v)
    return energies, states


@dataclass(frozen=True)
class AdiabaticTrack:
    """Gauge-fixed eigenpair of the adiabatic Hamiltonian along a time mesh.

    ``weight`` is the inner-product weight (grid spacing for eigenfunctions,
    one for discrete vectors).
    """

    level: int
    times: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    derivatives: Optional[np.ndarray] = None
    weight: float = 1.0

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def overlaps(self) -> np.ndarray:
        """``<n(t_k)|n(t_k+1)>`` for consecutive mesh times."""
        return self.weight * np.sum(self.vectors[:-1] * self.vectors[1:], axis=1)


def _as_times(times) -> np.ndarray:
    if isinstance(times, TimeMesh):
        return times.times
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise InvalidArgumentError("need at least two mesh times")
    return t


def gauge_fix_track(
    vectors,
    times,
    level: int = 0,
    energies=None,
    weight: float = 1.0,
    min_overlap: float = 0.9,
) -> AdiabaticTrack:
    """Remove sign flips from a sequence of real eigenvectors.

    The derivative ``d|n>/dt`` is filled by central differences and projected
    orthogonal to ``|n>``, which the exact derivative of a real normalized
    vector is.

    Raises
    ------
    MeshTooCoarseError
        If some consecutive overlap has magnitude below ``min_overlap``
        (mesh too coarse, or a level crossing).
    """
    t = _as_times(times)
    vecs = np.array(vectors, dtype=float, copy=True)
    if vecs.shape[0] != t.size:
        raise InvalidArgumentError("one eigenvector per mesh time is required")
    for k in range(1, len(vecs)):
        ov = weight * np.dot(vecs[k - 1], vecs[k])
        if abs(ov) < min_overlap:
            raise MeshTooCoarseError(
                f"|<n(t_{k-1})|n(t_{k})>| = {abs(ov):.3g} < {min_overlap} between "
                f"t={t[k-1]:.6g} and t={t[k]:.6g}; refine the mesh or check for a level crossing"
            )
        if ov < 0:
            vecs[k] = -vecs[k]
    deriv = time_derivative(vecs, t[1] - t[0], axis=0)
    proj = weight * np.sum(deriv * vecs, axis=1)
    deriv -= proj[:, None] * vecs
    if energies is None:
        energies = np.full(t.size, np.nan)
    return AdiabaticTrack(
        level=level,
        times=frozen_array(t),
        energies=frozen_array(energies, float),
        vectors=frozen_array(vecs),
        derivatives=frozen_array(deriv),
        weight=float(weight),
    )


def adiabatic_tracks(
    family: DiscreteRealSymmetric,
    mesh,
    levels: Optional[Sequence[int]] = None,
    min_overlap: float = 0.9,
) -> list:
    """Diagonalize ``family`` on every mesh time and gauge-fix each level."""
    t = _as_times(mesh)
    levels = list(range(family.n)) if levels is None else list(levels)
    E = np.empty((t.size, family.n))
    V = np.empty((t.size, family.n, family.n))
    for k, tk in enumerate(t):
        E[k], V[k] = eigensystem_real_symmetric(family.H(tk))
    return [gauge_fix_track(V[:, :, n], t, n, E[:, n], 1.0, min_overlap) for n in levels]


def eigvec_derivative_perturbative(H, dH, level: int, gap_min: float = 1e-6) -> np.ndarray:
    """``d|n>/dt = sum_{m != n} |m><m|dH/dt|n> / (E_n - E_m)`` (parallel gauge)."""
    E, V = eigensystem_real_symmetric(H)
    n = V[:, level]
    coupling = V.T @ (np.asarray(dH, dtype=float) @ n)
    gaps = E[level] - E
    others = np.arange(len(E)) != level
    if np.any(np.abs(gaps[others]) < gap_min):
        raise DegeneracyError(f"level {level} is within {gap_min} of another level")
    coeff = np.zeros(len(E))
    coeff[others] = coupling[others] / gaps[others]
    return V @ coeff


@dataclass(frozen=True)
class CounterdiabaticTerm:
    """Samples of ``H_cd(t) = i sum_n |n_dot><n|`` on a mesh."""

    times: np.ndarray
    matrices: np.ndarray


def counterdiabatic_term(tracks: Sequence[AdiabaticTrack], gap_min: float = 1e-6) -> CounterdiabaticTerm:
    """Build ``H_cd(t_k) = i sum_{m != n} |m><m|n_dot><n|`` from a complete track set."""
    tracks = sorted(tracks, key=lambda tr: tr.level)
    if not tracks:
        raise InvalidArgumentError("no tracks supplied")
    dim = tracks[0].vectors.shape[1]
    if len(tracks) != dim:
        raise InvalidArgumentError(f"need all {dim} tracks, got {len(tracks)}")
    t = tracks[0].times
    for tr in tracks[1:]:
        if tr.times.shape != t.shape or np.any(tr.times != t):
            raise InvalidArgumentError("tracks are sampled on different meshes")
        if tr.derivatives is None:
            raise InvalidArgumentError("tracks must carry eigenvector derivatives")
    E = np.stack([tr.energies for tr in tracks], axis=1)
    if np.all(np.isfinite(E)):
        Es = np.sort(E, axis=1)
        gap = np.min(np.diff(Es, axis=1))
        if gap < gap_min:
            k = int(np.argmin(np.min(np.diff(Es, axis=1), axis=1)))
            raise DegeneracyError(
                f"eigenvalue gap {gap:.3g} < {gap_min} at t={t[k]:.6g}; "
                "the counterdiabatic term diverges at a degeneracy"
            )
    N = np.stack([tr.vectors for tr in tracks], axis=2)  # (T, dim, level)
    D = np.stack([tr.derivatives for tr in tracks], axis=2)
    # <m|n_dot> with the diagonal removed
    A = np.einsum("tam,tan->tmn", N, D)
    idx = np.arange(dim)
    A[:, idx, idx] = 0.0
    Hcd = 1j * np.einsum("tam,tmn,tbn->tab", N, A, N)
    Hcd = 0.5 * (Hcd + np.conj(np.swapaxes(Hcd, 1, 2)))
    return CounterdiabaticTerm(times=frozen_array(t), matrices=frozen_array(Hcd))


def counterdiabatic_hamiltonian(family: DiscreteRealSymmetric, t: float, gap_min: float = 1e-6) -> np.ndarray:
    """``H_cd(t)`` at an arbitrary time from ``H`` and ``dH/dt``.

    Uses ``<m|H_cd|n> = i <m|dH/dt|n> / (E_n - E_m)`` in the eigenbasis, so it
    is independent of the eigenvector gauge.
    """
    E, V = eigensystem_real_symmetric(family.H(t))
    gaps = E[None, :] - E[:, None]  # E_n - E_m at [m, n]
    off = ~np.eye(len(E), dtype=bool)
    if np.any(np.abs(gaps[off]) < gap_min):
        raise DegeneracyError(f"eigenvalue gap below {gap_min} at t={t}")
    M = V.T @ family.dH(t) @ V
    C = np.zeros_like(M)
    C[off] = M[off] / gaps[off]
    return 1j * (V @ C @ V.T)


def adiabatic_state(track: AdiabaticTrack, t: float, grid: Optional[SpatialGrid1D] = None) -> StateVector:
    """``exp(-i int_0^t E_n dt') |n(t)>`` with a trapezoid phase integral.

    Between mesh nodes the vector and the phase are linearly interpolated.
    Pass ``grid`` for tracks of 1D eigenfunctions.
    """
    times = track.times
    tol = 1e-9 * (times[-1] - times[0])
    if t < times[0] - tol or t > times[-1] + tol:
        raise InvalidArgumentError(f"t={t} lies outside the track mesh")
    E = track.energies
    if not np.all(np.isfinite(E)):
        raise InvalidArgumentError("track carries no energies")
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (E[1:] + E[:-1]) * np.diff(times))])
    k = int(np.clip(np.searchsorted(times, t) - 1, 0, len(times) - 2))
    if abs(t - times[k + 1]) <= tol:
        k, w = k + 1, 0.0
    elif abs(t - times[k]) <= tol:
        w = 0.0
    else:
        w = (t - times[k]) / (times[k + 1] - times[k])
    if w == 0.0:
        vec, phase = track.vectors[k], cum[k]
    else:
        vec = (1 - w) * track.vectors[k] + w * track.vectors[k + 1]
        vec = vec / np.sqrt(track.weight * np.sum(vec**2))
        Et = (1 - w) * E[k] + w * E[k + 1]
        phase = cum[k] + 0.5 * (E[k] + Et) * (t - times[k])
    amp = np.exp(-1j * phase) * vec
    if grid is not None:
        return StateVector.on_grid(amp, grid)
    return StateVector.discrete(amp)
