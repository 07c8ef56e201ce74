"""ABR derivative of f = 1 by the series and kernel paths, plotted together."""

import sys

import numpy as np

from mlkcalc import ABParams, Grid, PowerSum, SampledFn, abr_derivative_kernel, abr_derivative_series, emit_plot, sample

out = sys.argv[1] if len(sys.argv) > 1 else "abr_of_constant.svg"
grid = Grid(0.0, 2.0, 513)
series, labels = [], []
for alpha in (0.3, 0.5, 0.7):
    p = ABParams(alpha)
    ser, rep = abr_derivative_series(PowerSum.constant(1.0), p)
    ker = abr_derivative_kernel(sample(PowerSum.constant(1.0), grid), p)
    gap = np.max(np.abs(ker.values[1:] - ser(grid.t[1:])))
    print(f"alpha={alpha}: {rep.terms_used} terms, kernel vs series max gap {gap:.2e}")
    series.append(SampledFn(grid, ser(grid.t)))
    labels.append(f"alpha = {alpha}")
emit_plot(series, out, labels, "ABR derivative of 1")
print("wrote", out)
