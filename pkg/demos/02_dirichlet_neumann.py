"""The Dirichlet-Neumann operator under a curved surface.

The trace of the harmonic function e^y cos x on a wavy surface has a
known normal derivative, which the strip solver should reproduce.
"""
import numpy as np

from wwbreak import dno, spectral

grid = spectral.Grid(1, 64)
x = grid.x[0]
eta = 0.2 * np.cos(x) + 0.05 * np.sin(3 * x)
ctx = dno.DnoContext(grid, eta, dno.StripSettings(M=32))
print(f"flattening parameter delta = {ctx.map.delta}, min d_z rho = {ctx.map.rho_z.min():.3f}")

psi = np.exp(eta) * np.cos(x)
deta = spectral.grad(grid, eta)[0]
exact = psi + deta * np.exp(eta) * np.sin(x)
G = dno.dn_apply(ctx, psi)
print("max error against the harmonic solution:", np.abs(G - exact).max())

# symmetry and positivity of G(eta)
f, g = np.sin(2 * x), np.cos(x) + 0.3 * np.sin(5 * x)
Gf, Gg = dno.dn_apply(ctx, f), dno.dn_apply(ctx, g)
print("<Gf, g> - <f, Gg> =", np.sum(Gf * g - f * Gg) * grid.dx)
print("<Gf, f> =", np.sum(Gf * f) * grid.dx, " strip energy =", dno.strip_energy(ctx, f))

# surface velocity and the shape derivative
V, B = dno.traces(ctx, psi)
print("max |B - phi_y| on the surface:", np.abs(B - psi).max())
h = np.sin(2 * x)
print("shape derivative sup norm:", np.abs(dno.shape_derivative(ctx, psi, h)).max())
