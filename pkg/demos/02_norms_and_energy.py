# coding: utf-8

# # Discrete norms and the free energy
#
# The -1 norm is computed with an FFT Poisson solve. It only makes sense for
# mean-zero data, which `MeanZeroField` certifies.

# %%

import numpy as np

from mpfc import norms
from mpfc.energy import energy_breakdown
from mpfc.grid import GridFunction, Params, cosine_modes

p = Params.square(32, 32.0, 0.1)
phi = cosine_modes(p, 0.0, [(0.1, 2, 1, 0.0, 0.0)])
field = norms.MeanZeroField(phi)
lam = 4 / p.h**2 * (np.sin(np.pi * 2 / p.m) ** 2 + np.sin(np.pi / p.m) ** 2)
print(norms.norm_minus1(field), norms.norm2(phi) / np.sqrt(lam))


# Non-zero means are rejected rather than silently projected.

# %%

try:
    norms.MeanZeroField(GridFunction.constant(1.0, p))
except ValueError as exc:
    print("rejected:", exc)


# The energy splits into a convex part and an expansive gradient part.
# The breakdown shows each term.

# %%

phi = cosine_modes(p, 0.07, [(-0.02, 1, 1, 0.0, 0.0), (0.3, 5, 5, 0.0, 0.0)])
e = energy_breakdown(phi, p)
for key, value in e.as_dict().items():
    print(f"{key:>11s} {value: .6e}")
print("F = convex - expansive:", e.F, e.convex - e.expansive)


# Several discrete inequalities are checked by the oracle suite. Here is one
# field's lhs/rhs ratios; all values must stay at or below one.

# %%

from mpfc.verify import inequality_ratios

for key, ratio in inequality_ratios(phi, p.Lx, p.Ly).items():
    print(f"{key:>20s} {ratio:.3f}")
