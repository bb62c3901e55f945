# coding: utf-8

# # Grid functions and difference operators
#
# Cell-centered periodic grids store one value per cell. Differences map cell
# values to edges and back, and the five-point Laplacian is their composition.

# %%

import numpy as np

from mpfc import operators as op
from mpfc.grid import GridFunction, Params, sample

p = Params.square(16, 2 * np.pi, 0.1)
phi = sample(lambda x, y: np.cos(x) * np.sin(2 * y), p)
print(phi.shape, phi.h)


# Indexing is 1-based and wraps around, so cell 0 is cell m.

# %%

print(phi[0, 1] == phi[p.m, 1], phi[p.m + 1, 1] == phi[1, 1])


# The gradient lives on edges. Its divergence is the Laplacian.

# %%

grad = op.d_center_to_edge(phi)
print(grad.ew.shape, grad.ns.shape, grad.is_periodic())
lap = op.laplacian(phi)
print(np.abs(op.d_edge_to_center(grad).data - lap.data).max())


# A sampled Fourier mode is an exact eigenfunction of the discrete Laplacian,
# with eigenvalue (4/h^2)(sin^2(pi kx h/Lx) + sin^2(pi ky h/Ly)).

# %%

lam = 4 / p.h**2 * (np.sin(np.pi * p.h / p.Lx) ** 2 + np.sin(np.pi * 2 * p.h / p.Ly) ** 2)
print("eigen defect:", np.abs(lap.data + lam * phi.data).max())
print("continuous value 5, discrete value", lam)


# Summation by parts: on periodic data the discrete gradient and the negative
# divergence are adjoint, so <grad phi, grad psi> = -<phi, lap psi>.

# %%

rng = np.random.default_rng(0)
a = GridFunction(rng.standard_normal(p.shape), p.h)
b = GridFunction(rng.standard_normal(p.shape), p.h)
lhs = op.edge_inner(op.d_center_to_edge(a), op.d_center_to_edge(b))
rhs = -op.center_inner(a, op.laplacian(b))
print(lhs, rhs, abs(lhs - rhs) / abs(lhs))
