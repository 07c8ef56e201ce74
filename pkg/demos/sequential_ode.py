"""The two-factor sequential ODE (D - 1)(D + 1) f = e^t in both AB models."""

import warnings

import numpy as np

from mlkcalc import Grid, LinearODESpec, SmoothFn, solve_linear

grid = Grid(0.0, 2.0, 1025)
g = SmoothFn.exp()
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    abr = solve_linear(LinearODESpec("SEQ3", (0.5, 0.5), (1.0, -1.0), g), grid)
    abc = solve_linear(LinearODESpec("SEQ6", (0.5, 0.5), (1.0, -1.0), g, (0.0, 0.0)), grid)
m = grid.mask(0.1, 2.0)
print("max |ABR - ABC| on [0.1, 2]:", float(np.max(np.abs(abr.values[m] - abc.values[m]))))
for t in (0.5, 1.0, 2.0):
    i = int(round(t / grid.h))
    print(f"f({t}) = {abr.values[i]:.12f}")
