"""Zakharov time stepping, pressure and the Taylor coefficient.

The state is the surface elevation ``eta`` and the surface trace ``psi`` of
the velocity potential:

    d_t eta = G(eta) psi
    d_t psi = -g eta - |grad psi|^2 / 2
              + (G(eta) psi + grad eta . grad psi)^2 / (2 (1 + |grad eta|^2))

The pressure is obtained from its elliptic problem in the fluid, written
for the hydrostatic deviation ``Q = P + g y`` so that the unknown decays
with depth.
"""
from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from . import dno, spectral, strip
from .errors import BlowUpDetected

log = logging.getLogger(__name__)

# RK4 reaches 2*sqrt(2) on the imaginary axis; keep a margin
CFL_LIMIT = 2.5


@dataclass(frozen=True)
class SurfaceState:
    grid: spectral.Grid
    t: float
    eta: np.ndarray
    psi: np.ndarray
    g: float = 1.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"gravity must be positive, got {self.g}")
        for name in ("eta", "psi"):
            arr = self.grid.check(getattr(self, name), name)
            if arr.shape != self.grid.shape:
                raise ValueError(f"{name} must be a scalar field on the grid")

    @property
    def is_finite(self):
        return bool(np.all(np.isfinite(self.eta)) and np.all(np.isfinite(self.psi)))


def context(state, settings=None):
    return dno.DnoContext(state.grid, state.eta, settings)


def _quadratic_terms(grid, eta, psi, Gpsi):
    geta = spectral.grad(grid, eta)
    gpsi = spectral.grad(grid, psi)
    num = Gpsi + np.sum(geta * gpsi, axis=0)
    return -0.5 * np.sum(gpsi**2, axis=0) + num**2 / (2.0 * (1.0 + np.sum(geta**2, axis=0)))


def rhs(state, ctx=None, settings=None, dealias=True):
    """``(d_t eta, d_t psi)`` at ``state``."""
    return _rhs(state, ctx, settings, dealias)[:2]


def _rhs(state, ctx=None, settings=None, dealias=True, guess=None):
    ctx = ctx or context(state, settings)
    grid = state.grid
    Gpsi, v = dno.dn_solve(ctx, state.psi, guess)
    deta = Gpsi
    dpsi = -state.g * state.eta + _quadratic_terms(grid, state.eta, state.psi, Gpsi)
    if dealias:
        deta = spectral.dealias(grid, deta)
        dpsi = spectral.dealias(grid, dpsi)
    return deta, dpsi, v


def cfl_number(state, dt):
    """``dt * sqrt(g |xi|_max)`` over the retained modes."""
    kmax = float(np.max(state.grid.kmag[state.grid.dealias_mask]))
    return dt * math.sqrt(state.g * kmax)


def spectral_filter(grid, u, strength=36.0, order=16):
    """Exponential filter ``exp(-strength (|m|/m_max)^order)``, off unless requested."""
    kmax = float(np.max(grid.kmag))
    return spectral.fourier_multiplier(grid, u, np.exp(-strength * (grid.kmag / kmax) ** order))


def step(state, dt, settings=None, dealias=True, filter_strength=None):
    """One classical RK4 step; the DN context is rebuilt at every stage."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    cfl = cfl_number(state, dt)
    if cfl > CFL_LIMIT:
        log.warning("dt=%g gives CFL number %.2f above %.2f", dt, cfl, CFL_LIMIT)
    grid = state.grid

    def clean(t, eta, psi):
        if dealias:
            eta = spectral.dealias(grid, eta)
            psi = spectral.dealias(grid, psi)
        if filter_strength is not None:
            eta = spectral_filter(grid, eta, filter_strength)
            psi = spectral_filter(grid, psi, filter_strength)
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(psi))):
            raise BlowUpDetected(f"non-finite surface at t={t:.6g}", t=t)
        return replace(state, t=t, eta=eta, psi=psi)

    previous = [None]

    def stage_rhs(s):
        # the previous stage's potential is a close starting guess
        try:
            deta, dpsi, previous[0] = _rhs(s, settings=settings, dealias=dealias,
                                           guess=previous[0])
        except FloatingPointError as exc:
            raise BlowUpDetected(f"overflow at t={s.t:.6g}", t=s.t) from exc
        return deta, dpsi

    t0 = state.t
    k1 = stage_rhs(state)
    s2 = clean(t0 + dt / 2, state.eta + dt / 2 * k1[0], state.psi + dt / 2 * k1[1])
    k2 = stage_rhs(s2)
    s3 = clean(t0 + dt / 2, state.eta + dt / 2 * k2[0], state.psi + dt / 2 * k2[1])
    k3 = stage_rhs(s3)
    s4 = clean(t0 + dt, state.eta + dt * k3[0], state.psi + dt * k3[1])
    k4 = stage_rhs(s4)
    eta = state.eta + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    psi = state.psi + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return clean(t0 + dt, eta, psi)


def _integral(grid, u):
    return float(np.sum(u) * grid.dx**grid.d)


def energy(state, ctx=None, settings=None):
    """``H = int (g eta^2 + psi G(eta) psi) dx`` over one cell."""
    ctx = ctx or context(state, settings)
    Gpsi = dno.dn_apply(ctx, state.psi)
    return _integral(state.grid, state.g * state.eta**2 + state.psi * Gpsi)


def e0(state, ctx=None, settings=None):
    """``sqrt((G(eta) psi, psi))``, the L2 norm of the fluid velocity."""
    ctx = ctx or context(state, settings)
    val = _integral(state.grid, state.psi * dno.dn_apply(ctx, state.psi))
    return math.sqrt(max(0.0, val))


@dataclass(frozen=True)
class PressureBundle:
    """Pressure quantities for one surface state.

    ``P`` and ``Q = P + g y`` live on the strip; ``a = -d_y P`` and
    ``dPdn = -dP/dn`` on the surface.  ``phi`` and ``q`` hold the
    Cartesian first and second derivatives of the potential and of ``Q``.
    """

    P: strip.StripField
    Q: strip.StripField
    a: np.ndarray
    dPdn: np.ndarray
    phi: strip.Pushforward
    q: strip.Pushforward
    Gpsi: np.ndarray
    g: float


def pressure_solve(state, ctx=None, settings=None):
    ctx = ctx or context(state, settings)
    grid, g, fmap = state.grid, state.g, ctx.map
    Gpsi, v = dno.dn_solve(ctx, state.psi)
    phi = strip.pushforward_derivatives(v, fmap)
    source = -np.sum(phi.hess**2, axis=(0, 1))
    Q = ctx.extend(g * state.eta, source=source)
    q = strip.pushforward_derivatives(Q, fmap)
    rz0 = fmap.rho_z[0]
    a = g - Q.surface_dz / rz0
    P = strip.StripField(grid, fmap.zgrid, Q.values - g * fmap.rho, Q.surface_dz - g * rz0)
    # -dP/dn from the Cartesian gradient of P at the surface
    geta = ctx.grad_eta
    Py = P.surface_dz / rz0
    Px = spectral.grad(grid, P.surface) - geta * Py
    norm = np.sqrt(1.0 + np.sum(geta**2, axis=0))
    dPdn = -(-np.sum(geta * Px, axis=0) + Py) / norm
    return PressureBundle(P, Q, a, dPdn, phi, q, Gpsi, g)


def pdot_source(bundle, fmap, form="direct"):
    """Right-hand side of the elliptic problem for the material pressure rate."""
    H = bundle.phi.hess
    HP = bundle.q.hess
    coupling = 4.0 * np.sum(H * HP, axis=(0, 1))
    if form == "direct":
        cubic = np.einsum("ij...,ik...,jk...->...", H, H, H)
    elif form == "divergence":
        grad_phi = bundle.phi.full_grad
        HH = np.einsum("ik...,jk...->ij...", H, H)
        w = np.einsum("j...,ij...->i...", grad_phi, HH)
        w = w - 0.5 * np.sum(H**2, axis=(0, 1)) * grad_phi
        cubic = strip.cartesian_divergence(w, fmap)
    else:
        raise ValueError(f"unknown source form {form!r}")
    return coupling + 2.0 * cubic


def material_pressure_rate(state, ctx, bundle, form="direct"):
    """``Pdot = (d_t + grad phi . grad) P`` and ``Da = d_t a + V . grad a`` on the surface.

    Since ``a = -d_y P``, commuting the material derivative with ``d_y``
    gives ``Da = -(d_y Pdot - d_y grad phi . grad P)``.
    """
    fmap = ctx.map
    d = state.grid.d
    Pdot = ctx.extend(np.zeros(state.grid.shape), source=pdot_source(bundle, fmap, form))
    rz0 = fmap.rho_z[0]
    dy_pdot = Pdot.surface_dz / rz0
    # grad_{x,y} P = (grad_x Q, d_y Q - g) at the surface
    gradP = np.concatenate([bundle.q.grad[:, 0], (bundle.q.dy[0] - bundle.g)[None]], axis=0)
    dy_grad_phi = bundle.phi.hess[d, :, 0]
    Da = -(dy_pdot - np.sum(dy_grad_phi * gradP, axis=0))
    return Pdot, Da
