"""Why jittering is harmless: two exact identities.

1. At every integer, the density of the jittered variable equals the
   original probability mass function, with nothing to invert or undo.
2. Inside the noise plateau the jittered density is locally constant, so
   its derivatives vanish at the integers. Smoothing-based estimators
   have bias proportional to those derivatives; here they are zero.
"""

import numpy as np

from jitterkit import DiscretePmf, NoiseSpec, convolve_density, finite_difference

pmf = DiscretePmf.binomial(4, 0.3)
print("Binomial(4, 0.3) pmf:", np.round(pmf.probabilities, 4).tolist(), "\n")

print("=== identity 1: jittered density at the atoms ===\n")
header = "z:      " + "".join(f"{z:>10d}" for z in pmf.support)
print(header)
print("pmf:    " + "".join(f"{p:>10.4f}" for p in pmf.probabilities))
for theta, nu in [(0.0, 1), (0.8, 5)]:
    spec = NoiseSpec(theta=theta, nu=nu, dims=1)
    row = "".join(f"{convolve_density(pmf, spec, float(z)):>10.4f}" for z in pmf.support)
    print(f"jittered (theta={theta}, nu={nu}):".ljust(8) + row)

print("\nOff the integers the two jittered densities differ from each other,")
print("but with uniform noise the density is piecewise constant:")
spec0 = NoiseSpec(theta=0.0, nu=1, dims=1)
for dz in (0.1, 0.3, 0.45):
    print(f"  f(2 + {dz}) = {convolve_density(pmf, spec0, 2 + dz):.4f}"
          f"   (= pmf at 2: {pmf.mass(2):.4f})")

print("\n=== identity 2: vanishing derivatives at the atoms ===\n")
spec = NoiseSpec(theta=0.8, nu=5, dims=1)
h = spec.gamma1 / 2.0
f = lambda z: convolve_density(pmf, spec, z)
print(f"central differences with step h = gamma1 / 2 = {h}")
print("z    first-order      second-order")
for z in pmf.support:
    d1 = finite_difference(f, float(z), 1, h)
    d2 = finite_difference(f, float(z), 2, h)
    print(f"{z}    {d1:+.3e}      {d2:+.3e}")

print("\nCompare with a non-plateau location (z = 2.4), where nothing vanishes:")
print(f"2.4  {finite_difference(f, 2.4, 1, h):+.3e}      "
      f"{finite_difference(f, 2.4, 2, h):+.3e}")
