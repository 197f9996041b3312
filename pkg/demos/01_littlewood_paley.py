"""Dyadic blocks and the three-way product split.

A random field is cut into Littlewood-Paley blocks, put back together,
and a product a*u is split into the two paraproducts and the remainder.
"""
import numpy as np

from wwbreak import spectral
from wwbreak.paradiff import bony_decompose

grid = spectral.Grid(1, 256)
rng = np.random.default_rng(1)
u = rng.standard_normal(grid.shape)

# each block lives in an annulus of width ~2^k; together they sum back to u
blocks = spectral.lp_decompose(grid, u)
for k, b in enumerate(blocks.blocks):
    print(f"block {k}: L2 norm {spectral.lp_norm(grid, b, 2):8.4f}")
print("blocks beyond the resolved range:", blocks.truncated)
print("reconstruction error:", np.abs(blocks.reconstruct() - u).max())

# a smooth coefficient times a rough field: T_a u carries almost all of it
a = 1 + 0.3 * np.cos(grid.x[0])
parts = bony_decompose(grid, a, u)
for name, part in zip(("T_a u", "T_u a", "R(a, u)"), parts):
    print(f"{name:8s} L2 norm {spectral.lp_norm(grid, part, 2):8.4f}")
print("split residual:", np.abs(a * u - sum(parts)).max())

# Besov norms of a single mode are explicit
mode = np.cos(4 * grid.x[0])
print("B^1_{inf,inf} of cos 4x:", spectral.besov_norm(grid, mode, 1.0, np.inf, np.inf))
