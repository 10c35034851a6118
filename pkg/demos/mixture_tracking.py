"""
Following a drifting input distribution with an online mixture
=============================================================

Samples arrive one at a time.  The mixture adds a component when a sample is
novel and the winning component has no room left, otherwise it nudges the
winner towards the sample.  Components that stop winning are removed once
they are old enough.
"""

import numpy as np

from atl import Agmm

rng = np.random.default_rng(0)

# Two clusters for the first half of the stream, then the first one stops
# producing samples and a new one appears elsewhere.
early = [np.array([0.2, 0.2]), np.array([0.8, 0.3])]
late = [np.array([0.8, 0.3]), np.array([0.5, 0.9])]

mix = Agmm(input_dim=2, exemption_window=300)
for i in range(3000):
    centers = early if i < 1500 else late
    x = centers[rng.integers(2)] + rng.normal(scale=0.05, size=2)
    mix.observe(x, chi=1.0)
    if (i + 1) % 500 == 0:
        print(f"after {i + 1:4d} samples: {mix.n_components} components")

# The retired cluster keeps its component: it won often enough early on that
# its activity stays above the pruning cut.
print("\ncentres and widths at the end of the stream:")
for c, w, s in zip(mix.centers, mix.widths, mix.supports):
    print(f"  centre {np.round(c, 2)}  width {np.round(w, 3)}  support {int(s)}")

# Responsibilities always form a distribution over the components.
x = np.array([0.5, 0.9])
w = mix.mixing_coefficients(x)
print("\nresponsibilities for", x, "->", np.round(w, 3), "sum", w.sum())

# The density can be evaluated anywhere; a coarse grid sum is close to 1.
g = np.linspace(-1, 2, 301)
grid = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
print("grid integral of the density:", round(float(mix.density(grid).sum() * (g[1] - g[0]) ** 2), 3))
