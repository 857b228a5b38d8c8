"""
Hydrogen: translating the atom and breathing its Bohr radius.

The ground-state density is rho = exp(-2r/xi) / (pi xi**3). Two motions are
considered.

Translation along r0(t): the phase gradient along r = |x - r0| is
m r' (1 + xi/r + xi**2/2r**2), equal to 2.5 m r' on the Bohr sphere r = xi.

Dilatation xi(t): in the scaled radius z = r/xi the closed-form gradient is
-m xi xi' (z - 1/2 - 1/(4z)), equal to -m xi xi'/4 at z = 1. Inserting it
into the radial continuity equation shows that it balances the divergence
(1/r) d/dr (r rho dphi/dr), i.e. the two-dimensional (cylindrical) one. The
spherical divergence (1/r**2) d/dr (r**2 ...) is solved by the plain scaling
gradient -m xi xi' z instead. The residual table below makes the difference
visible: the closed form refines away in d = 2 and stays O(1e4) in d = 3,
while the scaling form refines away in d = 3.

Usage:  python demos/hydrogen_drivers.py
"""
import numpy as np

from unideform.core import make_polynomial_schedule
from unideform.deform1d import hydrogen_dilatation_driver, hydrogen_translation_fields
from unideform.scenarios import hydrogen_dilatation_residual

xi = make_polynomial_schedule([1.0, 0.5])
z = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
f = hydrogen_dilatation_driver(xi, z * 1.0, 0.0)
print("dilatation, xi = 1, xi_dot = 0.5")
for zi, g, V in zip(z, f.dphi, f.potential):
    print(f"  z = {zi:4.2f}   dphi/dz = {g:+.6f}   V = {V:+.6f}")

tr = hydrogen_translation_fields(np.array([1.0]), 0.4, 0.0, 1.0)
print(f"\ntranslation, r' = 0.4: dphi/dr at r = xi is {tr.dphi[0]:.6f} (2.5 m r' = 1.0)")

print("\nrelative radial continuity residual on a geometric grid")
print("   n      closed d=2   closed d=3   scaling d=3")
for n in (1000, 2000, 4000):
    a = hydrogen_dilatation_residual(1.0, 0.5, n, 20.0, dimension=2)
    b = hydrogen_dilatation_residual(1.0, 0.5, n, 20.0, dimension=3)
    c = hydrogen_dilatation_residual(1.0, 0.5, n, 20.0, dimension=3, scaling_form=True)
    print(f"  {n:5d}   {a:.3e}    {b:.3e}    {c:.3e}")
