"""What goes wrong for radii (1, sqrt 2).

The radius ratio is irrational but the squared ratio is 2. The planar periods
pi and 2 pi are commensurate, so the long planar orbit is one member of a
continuous family of brake orbits and is degenerate.

Run: python3 demos/03_resonant_ellipsoid.py
"""
import numpy as np

from brakeindex.brakeorbit import (EllipsoidSpec, ellipsoid_analytic_orbits, gauge_hamiltonian,
                                   multiplicity_audit, shoot_brake_orbit, trace_distance)
from brakeindex.maslov import nu_lagrangian

spec = EllipsoidSpec((1.0, np.sqrt(2.0)))
H = gauge_hamiltonian(spec)
print("rational squared ratios:", spec.resonances)

for o in ellipsoid_analytic_orbits(spec):
    print(f"{o.label}: tau = {o.tau:.6f}, nu_L0 = {nu_lagrangian(o.monodromy_half, 0)}")

# The general search keeps landing on distinct members of the family.
audit = multiplicity_audit(H, starts=16, seed=0)
print(f"general search: {audit['count']} distinct traces, periods",
      sorted(round(float(o.tau), 6) for o in audit["orbits"]))

# Requiring x(t + tau/2) = -x(t) cuts the family down to the two planar orbits.
sym = multiplicity_audit(H, starts=16, seed=0, symmetric=True)
print(f"symmetric search: {sym['count']} orbits, periods",
      sorted(round(float(o.tau), 6) for o in sym["orbits"]))

# Re-shooting the long orbit from a perturbed start drifts along the family.
long = ellipsoid_analytic_orbits(spec)[1]
r = shoot_brake_orbit(H, long.x0[2:] + np.array([0.01, 0.0]), long.half * 1.01)
print(f"re-shoot: status {r.status}, residual {r.residual:.1e}, "
      f"trace distance to the planar orbit {trace_distance(r.orbit, long):.1e}")
