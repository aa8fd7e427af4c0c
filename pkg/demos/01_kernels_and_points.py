"""
Kernels and point sets
======================

The three radial kernels and the three ways of placing points that the
rest of the package builds on.
"""
import numpy as np

from rbfrepro import KernelSpec, epsilon_points, halton_points, regular_grid

# every kernel depends on alpha * r only, so alpha sets the length scale
r = np.array([0.0, 100.0, 200.0, 500.0, 1000.0])
for name, alpha in [("gauss", 0.001), ("iq", 0.005), ("tps", 0.001)]:
    k = KernelSpec(name, alpha)
    print(f"{name:>5} alpha={alpha:<6} phi(r) =", np.array2string(k(r), precision=4))

# thin plate splines dip below zero for alpha*r < 1
print("tps on (0, 1/alpha):", KernelSpec("tps", 1.0)(np.linspace(0, 1, 5)))

# Halton points are radical inverses in bases 2 and 3
h = halton_points(5)
print("\nfirst Halton points:\n", h.points)

# a regular grid always contains the corners, row-major with x fastest
g = regular_grid(3, 2)
print("\n3 x 2 grid:\n", g.points)

# epsilon points drift each grid node by at most jitter * spacing / 2
e = epsilon_points(9, 9, jitter_fraction=0.5, seed=0)
drift = np.abs(e.points - regular_grid(9, 9).points)
print(f"\nepsilon points: largest drift {drift.max():.4f}, half-spacing bound {0.5 * 0.125 / 2:.4f}")
