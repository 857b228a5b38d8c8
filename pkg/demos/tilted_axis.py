"""
Rotating about a tilted axis instead of z.

The diagonal deformation rotates the state about z. Nothing forbids a
different fixed axis m = (sin(varphi), 0, cos(varphi)); the driver is still
(v/2) sz, but the rotation angle now obeys an ODE instead of an algebraic
equation:

    theta_dot = (v sin(varphi) - h sin(theta - varphi)) sin(2 phi)
    (v/2) A(phi, theta) = phi_dot sin(theta - varphi) - (h/2) sin(2(theta - varphi)) sin(phi)**2

The first line fixes v once phi is known, so phi_dot follows from the second.
The trouble is sin(2 phi): whenever the angle passes through a multiple of
pi/2 while the field is still turning, v blows up. Starting at phi = 0 is
therefore impossible, and even from phi = 0.5 the angle reaches pi/2 near
t = 1.43 for the cubic sweep; the window here ends at t = 1.2.

Usage:  python demos/tilted_axis.py
"""
import numpy as np

from unideform.core import TimeMesh
from unideform.deformn import generalized_axis_two_level, power_sweep
from unideform.errors import CoordinateSingularityError

sweep = power_sweep()
mesh = TimeMesh.from_dt(0.0, 1.2, 1e-3)

# varphi = 0 reproduces the diagonal closed form with phi_axis = phi/2
flat = generalized_axis_two_level(0.0, sweep, mesh)
print(f"varphi = 0:   residuals {flat.residuals[0]:.1e}, {flat.residuals[1]:.1e}")

tilted = generalized_axis_two_level(0.3, sweep, mesh, phi_start=0.5)
print(f"varphi = 0.3: residuals {tilted.residuals[0]:.1e}, {tilted.residuals[1]:.1e};"
      f" phi_dot vs finite differences {tilted.rate_mismatch:.1e}")
print("\n   t     phi(tilted)    v(tilted)     v(z axis)")
for t in np.arange(0.0, 1.21, 0.2):
    k = int(round(t / mesh.dt))
    print(f"  {t:.1f}  {tilted.phi[k]:11.6f}  {tilted.v[k]:11.6f}  {flat.v[k]:11.6f}")

# the singular start
try:
    generalized_axis_two_level(0.3, sweep, mesh, phi_start=0.0)
except CoordinateSingularityError as exc:
    print(f"\nphi_start = 0: {exc}")

# beyond the window
try:
    generalized_axis_two_level(0.3, sweep, TimeMesh.from_dt(0.0, 3.0, 1e-3), phi_start=0.5)
except CoordinateSingularityError as exc:
    print(f"t_end = 3:     {exc}")
