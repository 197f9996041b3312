"""Dirichlet-Neumann operator through the flattened strip.

``G(eta) f`` is the normal derivative (scaled by ``sqrt(1+|grad eta|^2)``)
of the harmonic extension of ``f`` below the surface.  It is evaluated
from the strip solution ``v`` as ``zeta1 v_z - zeta2 . grad v`` at
``z = 0``.  The paradifferential principal symbol ``lambda`` is kept for
diagnostics only.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import spectral, strip
from .errors import DegenerateSymbolError
from .paradiff import SymbolTable, paradiff_apply


@dataclass(frozen=True)
class StripSettings:
    """Discretisation knobs shared by every strip solve."""

    M: int = 64
    Z_b: float = None
    delta_hint: float = 1.0
    tol: float = 1e-13
    method: str = "auto"


class DnoContext:
    """Everything that depends on the surface only.

    Built once per surface; read-only afterwards.
    """

    def __init__(self, grid, eta, settings=None):
        settings = settings or StripSettings()
        self.grid = grid
        self.settings = settings
        self.eta = np.array(grid.check(eta, "eta"), dtype=float)
        self.map = strip.build_map(grid, self.eta, M=settings.M, Z_b=settings.Z_b,
                                   delta_hint=settings.delta_hint)
        self.coeffs = strip.coefficients(self.map)
        self.solver = strip.StripSolver(self.coeffs, tol=settings.tol, method=settings.method)
        self.zeta1 = self.coeffs.zeta1[0]
        self.zeta2 = self.coeffs.zeta2[:, 0]
        self.grad_eta = spectral.grad(grid, self.eta)

    @cached_property
    def lam(self):
        """Principal symbol ``lambda = zeta1 A - i zeta2 . xi`` (order 1)."""
        return dn_symbol(self)

    def extend(self, f, source=None, guess=None):
        """Strip solution with surface value ``f``."""
        return self.solver.solve(f, source, guess)

    def normal_derivative(self, v):
        """``zeta1 v_z - zeta2 . grad v`` at ``z = 0`` for a :class:`StripField`."""
        gx = spectral.grad(self.grid, v.surface)
        return self.zeta1 * v.surface_dz - np.sum(self.zeta2 * gx, axis=0)


def make_context(grid, eta, settings=None, **overrides):
    if overrides:
        base = settings or StripSettings()
        settings = StripSettings(**{**base.__dict__, **overrides})
    return DnoContext(grid, eta, settings)


def dn_apply(ctx, f):
    """``G(eta) f``."""
    f = np.asarray(ctx.grid.check(f, "f"), dtype=float)
    return ctx.normal_derivative(ctx.extend(f))


def dn_solve(ctx, f, guess=None):
    """``(G(eta) f, v)`` with ``v`` the strip extension, for callers needing both."""
    f = np.asarray(ctx.grid.check(f, "f"), dtype=float)
    v = ctx.extend(f, guess=guess)
    return ctx.normal_derivative(v), v


def traces_from(ctx, psi, Gpsi):
    """``V`` and ``B`` given ``G(eta) psi`` already computed."""
    gpsi = spectral.grad(ctx.grid, psi)
    geta = ctx.grad_eta
    B = (np.sum(geta * gpsi, axis=0) + Gpsi) / (1.0 + np.sum(geta**2, axis=0))
    V = gpsi - B * geta
    return V, B


def traces(ctx, psi):
    """Surface velocity ``(V, B)``; ``V`` has shape ``(d, *shape)``."""
    return traces_from(ctx, psi, dn_apply(ctx, psi))


def shape_derivative(ctx, psi, delta_eta):
    """``d_eta G(eta) psi . h = -G(eta)(h B) - div(h V)``."""
    h = np.asarray(ctx.grid.check(delta_eta, "delta_eta"), dtype=float)
    V, B = traces(ctx, psi)
    return -dn_apply(ctx, h * B) - spectral.div(ctx.grid, h * V)


def dn_symbol(ctx):
    """``lambda(x, xi)`` on the surface; equals ``|xi|`` when ``eta = 0``."""
    grid = ctx.grid
    d = grid.d
    _, A = strip.decoupling_symbols(ctx.coeffs, level=0)
    z1 = ctx.zeta1.reshape(grid.shape + (1,) * d)
    z2 = ctx.zeta2.reshape((d,) + grid.shape + (1,) * d)
    xi = grid.xi.reshape((d,) + (1,) * d + grid.shape)
    lam = z1 * A.samples - 1j * np.sum(z2 * xi, axis=0)
    table = SymbolTable(grid, 1.0, lam)
    far = np.broadcast_to(grid.kmag >= 0.5, lam.shape)
    re = lam.real[far]
    if re.size and re.min() <= 0:
        raise DegenerateSymbolError(f"Re lambda reaches {re.min():.3g} for |xi| >= 1/2")
    return table


def symbol_lower_bound(table):
    """``min Re lambda / |xi|`` over samples with ``|xi| >= 1/2``."""
    grid = table.grid
    k = np.broadcast_to(grid.kmag, table.samples.shape)
    far = k >= 0.5
    return float(np.min(table.samples.real[far] / k[far]))


def dn_paralinear_remainder(ctx, f):
    """``R(eta) f = G(eta) f - T_lambda f``."""
    return dn_apply(ctx, f) - paradiff_apply(ctx.lam, np.asarray(f, dtype=float))


def strip_energy(ctx, f):
    """Dirichlet integral of the harmonic extension of ``f``."""
    return ctx.solver.dirichlet_energy(ctx.extend(np.asarray(f, dtype=float)))
