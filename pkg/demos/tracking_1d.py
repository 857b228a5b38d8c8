"""
Moving and stretching a harmonic trap without exciting the atom.

Transport: the trap centre x0(t) follows a smoothstep from 0 to 1. The
ground state keeps its shape and only moves, so the continuity equation
gives a phase linear in x, phi = -m x0_dot (x - x0), and the Hamilton-Jacobi
equation a linear driver V = -m x0_ddot x: a uniform force that pushes the
atom exactly as the trap accelerates.

Dilatation: the trap width scales with xi(t) from 1 to 2. The phase is
quadratic, phi = -(m/2)(xi_dot/xi) x**2, and so is the driver,
V = -(m/2)(xi_ddot/xi) x**2.

Both drivers are independent of the state; they work on every eigenstate of
the trap at once. The script propagates the ground state with and without the
driver (split-step Fourier) and prints the final fidelities, for a slow
(T = 4) and a fast (T = 1) protocol. It also recovers the transport phase
from the density alone, by integrating the continuity equation twice.

Usage:  python demos/tracking_1d.py
"""
import numpy as np

from unideform.core import SpatialGrid1D, make_smoothstep_schedule
from unideform.deform1d import DensityField, phase_from_continuity_1d, transport_phase
from unideform.scenarios import dilatation_tracking, transport_tracking

grid = SpatialGrid1D(-12.0, 12.0, 1024)
print("            T    deformed     bare")
for T in (4.0, 1.0):
    run = transport_tracking(duration=T, grid=grid)
    print(f"transport  {T:.0f}   {run.fidelity_final:.6f}   {run.fidelity_final_bare:.6f}")
for T, dt in ((4.0, 1e-3), (1.0, 5e-4)):
    # the fast dilatation needs a finer step: dt*max|V| must stay below 0.5 on the +-16 box
    run = dilatation_tracking(duration=T, dt=dt)
    print(f"dilatation {T:.0f}   {run.fidelity_final:.6f}   {run.fidelity_final_bare:.6f}")

#################################################################
#
#   The phase from the density alone
#
#################################################################

x0 = make_smoothstep_schedule(0.0, 1.0, 0.0, 4.0)
t = 2.0
print("\ncontinuity route at t = 2 (phase error after removing a constant)")
for h in (0.01, 0.005, 0.0025):
    g = SpatialGrid1D(-10.0, 10.0, int(round(20 / h)) + 1)
    rho = lambda x, s: np.exp(-((x - x0(s)) ** 2)) / np.sqrt(np.pi)  # noqa: E731
    rate = lambda x, s: 2 * (x - x0(s)) * x0.d1(s) * rho(x, s)  # noqa: E731
    dens = DensityField.from_callables(g, [t], rho, rate)
    p = phase_from_continuity_1d(dens, 1.0, t)
    keep = dens.density[0] > 1e-8
    diff = (p.phase - transport_phase(g.points, t, x0, 1.0))[keep]
    print(f"  h = {h:<7g} L_inf = {0.5 * (diff.max() - diff.min()):.2e}")
