"""
A random three-level family: when is a diagonal driver enough?

For N > 2 levels there is no closed form. At each time the N continuity
equations

    <a|n_dot> = sum_b H_ab sin(phi_a - phi_b) <b|n>

are solved for the phase differences by damped Gauss-Newton, warm-started
from the previous time; the potentials then follow from the Hamilton-Jacobi
rows. Unlike two levels, the result depends on which eigenstate is tracked,
and a solution need not exist at all: for the seed-0 family only the ground
state admits one over the whole sweep. The excited levels lose it a third of
the way in, where an eigenvector component becomes small while the state is
still turning.

Usage:  python demos/nlevel_random_family.py [seed]
"""
import sys

from unideform.core import TimeMesh
from unideform.deformn import nlevel_deformation
from unideform.errors import NoSolutionFoundError
from unideform.scenarios import random_smooth_family
from unideform.spectral import adiabatic_tracks
from unideform.verify import compare_drivers

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
family = random_smooth_family(3, seed, 0.0, 10.0)
mesh = TimeMesh.from_dt(0.0, 10.0, 5e-3)

for track in adiabatic_tracks(family, mesh):
    try:
        d = nlevel_deformation(family, track)
    except NoSolutionFoundError as exc:
        print(f"level {track.level}: no diagonal deformation ({exc})")
        continue
    print(f"level {track.level}: max Newton iterations {d.iterations.max()}, "
          f"max |v| {abs(d.centered_potentials()).max():.4f}")

cmp = compare_drivers(family, mesh, level=0)
print(f"\nground state, seed {seed}: final fidelity bare {cmp.fidelity_bare[-1]:.6f}, "
      f"deformed {cmp.fidelity_deformed[-1]:.9f}")
