"""
Nets, covering numbers and the modulus of continuity
====================================================

Before anything is fitted, the sample cloud is summarized by a greedy net and
the target functional by an empirical modulus of continuity. The net radius
chosen from the modulus controls how many centers (and hence how many
coordinates) the later stages work with.
"""

import numpy as np

from hilbapprox import choose_delta, covering_number_bruteforce, estimate_modulus, greedy_net
from hilbapprox.demos import FamilySpec, generate, integral_functional

# A small Fourier family: pairs of smooth curves on a 100-point grid.
train, val, test = generate(FamilySpec("fourier_band", (400, 200, 200), seed=7, n=2, m=100))
print("training points:", len(train), " grid size:", train.grid.size)

# Greedy farthest-point nets at a few radii. Smaller radius, more centers.
for radius in (0.4, 0.2, 0.1, 0.05, 0.02):
    net = greedy_net(train, radius)
    print(f"radius {radius:5.2f}: {len(net):4d} centers, "
          f"farthest point at {net.cover_distances.max():.4f}")

# On a handful of points the exact covering number is computable, and the
# greedy net never needs more centers than a cover at half the radius.
small = train.subset(range(10))
for radius in (0.2, 0.1, 0.05):
    print(f"radius {radius:4.2f}: greedy {len(greedy_net(small, radius))}, "
          f"exact N(r/2) = {covering_number_bruteforce(small, radius / 2)}")

# The modulus envelope bounds |f(x) - f(x')| by a function of ||x - x'||.
f = integral_functional("product")
mod = estimate_modulus(f, train, 4000, seed=7)
for dist in (0.01, 0.05, 0.1, 0.5):
    print(f"omega({dist:4.2f}) <= {mod.envelope_at(dist):.4f}")

# The scale delta for a target accuracy eps is read off the envelope. The
# approximant places centers at spacing delta/3 and gives each hat a support
# radius of 2 delta/3.
for eps in (0.3, 0.1, 0.03):
    delta = choose_delta(mod, eps)
    print(f"eps {eps:4.2f}: delta {delta:.4f}, "
          f"centers at delta/3: {len(greedy_net(train, delta / 3))}")
