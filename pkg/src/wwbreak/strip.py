"""Flattened fluid domain and its variable-coefficient elliptic solver.

The fluid region below ``y = eta(x)`` is mapped onto the strip
``[-Z_b, 0] x torus`` by ``y = rho(x, z) = z + (exp(delta z |D|) eta)(x)``.
Vertically, unknowns live on Chebyshev points of the variable
``w = exp(kappa z)`` with ``kappa = delta * k_min``; every decaying harmonic
``exp(|xi| z)`` and every smoothed surface mode ``exp(delta |xi| z)`` is a
power of ``w``, which keeps collocation spectrally accurate for all
resolved horizontal modes.  Horizontal derivatives are pseudo-spectral.

Index 0 of every strip array is the surface ``z = 0``; index ``M`` is the
bottom ``z = -Z_b``.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
import logging
import math

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from . import spectral
from .errors import DegenerateSymbolError, IllConditionedError, SurfaceTooRoughError
from .paradiff import SymbolTable

log = logging.getLogger(__name__)

DELTA_FLOOR = 1e-6
RHO_Z_MIN = 0.5
# largest system the "auto" method may hand to the dense fallback
DENSE_FALLBACK_SIZE = 4096
# Krylov subspace size per restart cycle; a short cycle bounds the cost of
# stalling at the round-off floor after a warm start
GMRES_RESTART = 20


def cheb(M):
    """Chebyshev points ``cos(pi j / M)`` and the differentiation matrix."""
    j = np.arange(M + 1)
    s = np.cos(np.pi * j / M)
    c = np.where((j == 0) | (j == M), 2.0, 1.0) * (-1.0) ** j
    ds = s[:, None] - s[None, :]
    D = np.outer(c, 1.0 / c) / (ds + np.eye(M + 1))
    D -= np.diag(D.sum(axis=1))
    return s, D


def clenshaw_curtis(M):
    """Clenshaw-Curtis weights on the points returned by :func:`cheb`."""
    theta = np.pi * np.arange(M + 1) / M
    w = np.zeros(M + 1)
    v = np.ones(M - 1)
    inner = theta[1:-1]
    if M % 2 == 0:
        w[0] = w[M] = 1.0 / (M**2 - 1)
        for k in range(1, M // 2):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(M * inner) / (M**2 - 1)
    else:
        w[0] = w[M] = 1.0 / M**2
        for k in range(1, (M - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2 * v / M
    return w


@dataclass(frozen=True)
class VerticalGrid:
    """Collocation nodes ``z_0 = 0 > z_1 > ... > z_M = -Z_b``."""

    M: int
    Z_b: float
    kappa: float

    @property
    def _nodes(self):
        return _vertical_nodes(self.M, self.Z_b, self.kappa)

    @property
    def z(self):
        return self._nodes[0]

    @property
    def Dz(self):
        return self._nodes[1]

    @property
    def Dzz(self):
        return self._nodes[3]

    @property
    def weights(self):
        """Quadrature weights for ``int_{-Z_b}^0 f dz``."""
        return self._nodes[2]

    def dz(self, v):
        return np.tensordot(self.Dz, v, axes=(1, 0))


@lru_cache(maxsize=64)
def _vertical_nodes(M, Z_b, kappa):
    s, Ds = cheb(M)
    wb = math.exp(-kappa * Z_b)
    w = wb + (1.0 - wb) * (1.0 + s) / 2.0
    z = np.log(w) / kappa
    z[0], z[-1] = 0.0, -Z_b
    Dw = 2.0 / (1.0 - wb) * Ds
    Dz = (kappa * w)[:, None] * Dw
    quad = clenshaw_curtis(M) * (1.0 - wb) / 2.0 / (kappa * w)
    for arr in (z, Dz, quad):
        arr.flags.writeable = False
    Dzz = Dz @ Dz
    Dzz.flags.writeable = False
    return z, Dz, quad, Dzz


@dataclass(frozen=True)
class StripField:
    """Samples ``v(x_j, z_i)``; ``values`` has shape ``(M + 1, *grid.shape)``."""

    grid: spectral.Grid
    zgrid: VerticalGrid
    values: np.ndarray
    vz0: np.ndarray = None  # accurate z-derivative at the surface, when known

    @property
    def surface_dz(self):
        if self.vz0 is not None:
            return self.vz0
        return np.tensordot(self.zgrid.Dz[0], self.values, axes=(0, 0))

    @property
    def surface(self):
        return self.values[0]

    @property
    def bottom(self):
        return self.values[-1]


class _Horizontal:
    """rfft-based horizontal derivatives of strip arrays."""

    def __init__(self, grid):
        self.grid = grid
        self.axes = grid.axes
        k1 = np.fft.fftfreq(grid.n, d=grid.dx) * 2 * math.pi
        kr = np.fft.rfftfreq(grid.n, d=grid.dx) * 2 * math.pi
        axes1d = [k1] * (grid.d - 1) + [kr]
        xi = np.array(np.meshgrid(*axes1d, indexing="ij"))
        self.kmag = np.sqrt(np.sum(xi**2, axis=0))
        nyq = math.pi * grid.n / grid.L
        self.xi_odd = np.where(np.isclose(np.abs(xi), nyq), 0.0, xi)
        self.rshape = self.kmag.shape

    def rfft(self, v):
        return np.fft.rfftn(v, axes=self.axes)

    def irfft(self, vh):
        return np.fft.irfftn(vh, s=self.grid.shape, axes=self.axes)

    def grad(self, v):
        vh = self.rfft(v)
        return np.array([self.irfft(1j * self.xi_odd[j] * vh) for j in range(self.grid.d)])

    def lap(self, v):
        return self.irfft(-self.kmag**2 * self.rfft(v))

    def absd(self, v):
        return self.irfft(self.kmag * self.rfft(v))


@lru_cache(maxsize=16)
def horizontal(grid):
    return _Horizontal(grid)


@dataclass(frozen=True)
class FlattenMap:
    """``rho(x, z)`` and its derivatives at every strip node."""

    grid: spectral.Grid
    zgrid: VerticalGrid
    delta: float
    eta: np.ndarray
    rho: np.ndarray
    rho_z: np.ndarray
    rho_zz: np.ndarray
    rho_x: np.ndarray       # (d, M+1, *shape)
    rho_xz: np.ndarray      # (d, M+1, *shape)
    lap_rho: np.ndarray

    @property
    def is_flat(self):
        return bool(np.ptp(self.eta) == 0.0)


def default_depth(grid):
    return 10.0 / grid.k_min


@lru_cache(maxsize=16)
def _map_multipliers(grid, zgrid, delta):
    """``exp(delta z |xi|)`` and the derivative factors, on the rfft half-grid."""
    h = horizontal(grid)
    z = zgrid.z.reshape((-1,) + (1,) * grid.d)
    k = h.kmag
    decay = np.exp(delta * z * k)
    dk = delta * k
    factors = [np.ones_like(k), dk, dk**2]
    factors += [1j * h.xi_odd[j] for j in range(grid.d)]
    factors += [1j * h.xi_odd[j] * dk for j in range(grid.d)]
    factors += [-k**2]
    return h, decay, np.array(factors)


def _map_at(grid, eta, delta, zgrid):
    h, decay, factors = _map_multipliers(grid, zgrid, delta)
    d = grid.d
    de = decay * h.rfft(eta)
    out = h.irfft(factors[:, None] * de[None])
    smooth, rz, rzz = out[0], 1.0 + out[1], out[2]
    rho_x, rho_xz, lap_rho = out[3:3 + d], out[3 + d:3 + 2 * d], out[3 + 2 * d]
    rho = zgrid.z.reshape((-1,) + (1,) * d) + smooth
    # exact surface trace, free of transform round-off
    rho[0] = eta
    return FlattenMap(grid, zgrid, delta, np.array(eta, dtype=float), rho, rz, rzz,
                      rho_x, rho_xz, lap_rho)


def build_map(grid, eta, M=64, Z_b=None, delta_hint=1.0, delta_floor=DELTA_FLOOR):
    """Flattening with the largest ``delta = delta_hint / 2^j`` keeping ``rho_z >= 1/2``."""
    eta = grid.check(eta, "eta")
    if eta.shape != grid.shape:
        raise ValueError("eta must be a single scalar field")
    if not np.all(np.isfinite(eta)):
        raise SurfaceTooRoughError("surface elevation is not finite")
    Z_b = default_depth(grid) if Z_b is None else float(Z_b)
    delta = float(delta_hint)
    while delta >= delta_floor:
        zgrid = VerticalGrid(M, Z_b, delta * grid.k_min)
        fmap = _map_at(grid, eta, delta, zgrid)
        min_rz = float(fmap.rho_z.min())
        if min_rz >= RHO_Z_MIN:
            if delta != delta_hint:
                log.debug("flattening: delta reduced from %g to %g", delta_hint, delta)
            return fmap
        delta /= 2.0
    raise SurfaceTooRoughError(
        f"no delta >= {delta_floor:g} keeps d_z rho >= 1/2 (min {min_rz:.3g})",
        delta=delta * 2, min_rho_z=min_rz)


@dataclass(frozen=True)
class EllipticCoefficients:
    """``alpha``, ``beta`` (vector) and ``gamma`` on the strip, plus the
    conormal factors ``zeta1 = (1+|grad rho|^2)/rho_z`` and ``zeta2 = grad rho``."""

    map: FlattenMap
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray


def coefficients(fmap):
    rz = fmap.rho_z
    g2 = 1.0 + np.sum(fmap.rho_x**2, axis=0)
    alpha = rz**2 / g2
    beta = -2.0 * rz * fmap.rho_x / g2
    gamma = (fmap.rho_zz + alpha * fmap.lap_rho + np.sum(beta * fmap.rho_xz, axis=0)) / rz
    return EllipticCoefficients(fmap, alpha, beta, gamma, g2 / rz, fmap.rho_x)


class StripSolver:
    """Discrete elliptic problem on the strip for a fixed surface.

    Interior rows collocate ``v_zz + alpha lap v + beta . grad v_z - gamma v_z``;
    the bottom row imposes the conormal transparent condition
    ``zeta1 v_z - zeta2 . grad v = |D| v`` (for a flat bottom this is
    ``v_z = |D| v``).  The linear system is solved by GMRES, left
    preconditioned with the exact flat-surface solve, one dense block
    per horizontal mode.  ``method="dense"`` assembles the matrix column
    by column and factors it; under ``"auto"`` this is only a fallback for
    small systems on which GMRES stalls.
    """

    def __init__(self, coeffs, tol=1e-13, maxiter=400, method="auto"):
        self.coeffs = coeffs
        self.map = coeffs.map
        self.grid = self.map.grid
        self.zgrid = self.map.zgrid
        self.h = horizontal(self.grid)
        self.tol = tol
        self.maxiter = maxiter
        self.method = method
        self._flat_inverse = _flat_inverses(self.zgrid, self.grid)

    @property
    def M(self):
        return self.zgrid.M

    @cached_property
    def _frozen(self):
        """Coefficient slices used by every operator application."""
        c = self.coeffs
        return (c.alpha[1:-1] - 1.0, c.gamma[1:-1], c.beta[:, 1:-1],
                c.zeta1[-1] - 1.0, c.zeta2[:, -1])

    def _apply_spec(self, Uh):
        """Operator rows 1..M on the correction, in rfft space.

        ``Uh`` holds rows 1..M (row 0, the surface, is zero).  The flat
        part is applied per mode; the variable-coefficient defect goes
        through one batched inverse and one forward transform.
        """
        zg, h, d, M = self.zgrid, self.h, self.grid.d, self.M
        am1, gam, beta, z1m1, z2b = self._frozen
        k = h.kmag
        U2 = Uh.reshape(M, -1)
        Wz = (zg.Dz[1:, 1:] @ U2).reshape(Uh.shape)
        Wzz = (zg.Dzz[1:-1, 1:] @ U2).reshape((M - 1,) + Uh.shape[1:])
        flat = np.concatenate([Wzz - k**2 * Uh[:-1], (Wz[-1] - k * Uh[-1])[None]], axis=0)
        parts = [-k**2 * Uh[:-1], Wz[:-1]]
        parts += [1j * h.xi_odd[j] * Wz[:-1] for j in range(d)]
        parts += [Wz[-1:]] + [1j * h.xi_odd[j] * Uh[-1:] for j in range(d)]
        phys = h.irfft(np.concatenate(parts, axis=0))
        m = M - 1
        var_inner = am1 * phys[:m] - gam * phys[m:2 * m]
        for j in range(d):
            var_inner += beta[j] * phys[(2 + j) * m:(3 + j) * m]
        off = (2 + d) * m
        var_bottom = z1m1 * phys[off]
        for j in range(d):
            var_bottom -= z2b[j] * phys[off + 1 + j]
        return flat + h.rfft(np.concatenate([var_inner, var_bottom[None]], axis=0))

    def _prec_spec(self, Rh):
        M = self.M
        # (modes, M) complex viewed as (modes, M, 2) real: the blocks are real
        X = np.ascontiguousarray(Rh.reshape(M, -1).T).view(float).reshape(-1, M, 2)
        Y = np.matmul(self._flat_inverse, X)
        return Y.view(complex)[..., 0].T.reshape(Rh.shape)

    def _apply_unknown(self, u):
        return self.h.irfft(self._apply_spec(self.h.rfft(u)))

    def _precondition(self, w):
        return self.h.irfft(self._prec_spec(self.h.rfft(w)))

    @cached_property
    def _flat_decay(self):
        z = self.zgrid.z.reshape((-1,) + (1,) * self.grid.d)
        return np.exp(z * self.h.kmag)

    def flat_extension(self, f_surface):
        """``exp(z|D|) f`` with its first two z-derivatives, exact per mode."""
        h = self.h
        E = self._flat_decay * h.rfft(f_surface)
        k = h.kmag
        v0, v0z, v0zz = h.irfft(np.stack([E, k * E, k**2 * E]))
        return v0, v0z, v0zz, E

    def rhs(self, f_surface, F0=None):
        """Right-hand side for the correction ``w = v - exp(z|D|) f``.

        The flat extension is differentiated analytically, so the forcing
        is the O(eta) defect of the variable operator on it.
        """
        c, h = self.coeffs, self.h
        v0, v0z, v0zz, E = self.flat_extension(f_surface)
        # lap v0 = -v0zz for the flat extension
        inner = (1.0 - c.alpha[1:-1]) * v0zz[1:-1] - c.gamma[1:-1] * v0z[1:-1]
        Ez = h.kmag * E
        for j in range(self.grid.d):
            inner += c.beta[j, 1:-1] * h.irfft(1j * h.xi_odd[j] * Ez[1:-1])
        bottom = (c.zeta1[-1] - 1.0) * v0z[-1]
        for j in range(self.grid.d):
            bottom -= c.zeta2[j, -1] * h.irfft(1j * h.xi_odd[j] * E[-1])
        b = -np.concatenate([inner, bottom[None]], axis=0)
        if F0 is not None:
            b[:-1] += F0[1:-1]
        return b, v0, v0z

    def residual(self, v, f_surface, source=None):
        """Relative flat-preconditioned residual of a candidate solution."""
        F0 = None if source is None else self.coeffs.alpha * source
        b, v0, _ = self.rhs(f_surface, F0)
        pb = self._precondition(b)
        w = np.asarray(v.values if isinstance(v, StripField) else v) - v0
        r = pb - self._precondition(self._apply_unknown(w[1:]))
        return float(np.linalg.norm(r) / max(np.linalg.norm(pb), 1e-300))

    def solve(self, f_surface, source=None, guess=None):
        """Solve with surface data ``f`` and physical source ``source``
        (the interior right-hand side is ``alpha * source``).

        ``guess`` is an optional nearby solution (a :class:`StripField` on
        the same vertical grid) used to start the iteration.
        """
        f_surface = np.asarray(f_surface, dtype=float)
        F0 = None if source is None else self.coeffs.alpha * source
        b, v0, v0z = self.rhs(f_surface, F0)
        if np.linalg.norm(b) == 0.0:
            u = np.zeros(b.shape)
        elif self.map.is_flat:
            u = self._precondition(b)
        elif self.method == "dense":
            u = self._dense_solve(b)
        else:
            u0 = None
            if guess is not None and guess.values.shape == v0.shape:
                u0 = guess.values[1:] - v0[1:]
            try:
                u = self._iterative_solve(b, u0)
            except IllConditionedError:
                if self.method != "auto" or b.size > DENSE_FALLBACK_SIZE:
                    raise
                u = self._dense_solve(b)
        w = np.concatenate([np.zeros((1,) + self.grid.shape), u], axis=0)
        vz0 = v0z[0] + self.zgrid.Dz[0] @ w.reshape(self.M + 1, -1)
        return StripField(self.grid, self.zgrid, v0 + w, vz0.reshape(self.grid.shape))

    def _iterative_solve(self, b, u0=None):
        # left preconditioning in rfft space: the preconditioned residual
        # tracks the error
        h = self.h
        shape = (self.M,) + h.rshape

        def as_spec(x):
            return np.ascontiguousarray(x).view(complex).reshape(shape)

        def pa(Uh):
            return self._prec_spec(self._apply_spec(Uh))

        n = 2 * int(np.prod(shape))
        op = spla.LinearOperator((n, n), dtype=float,
                                 matvec=lambda x: np.ascontiguousarray(pa(as_spec(x))).view(float).ravel())
        pb = self._prec_spec(h.rfft(b))
        pbnorm = np.linalg.norm(pb)
        x0 = None if u0 is None else np.ascontiguousarray(h.rfft(u0)).view(float).ravel()
        x, info = spla.gmres(op, np.ascontiguousarray(pb).view(float).ravel(), x0=x0,
                             rtol=self.tol, atol=0.0, restart=GMRES_RESTART, maxiter=self.maxiter)
        Uh = as_spec(x)
        rel = 0.0
        # gmres checks the true residual before reporting success; refine otherwise
        for _ in range(3 if info else 0):
            r = pb - pa(Uh)
            rel = np.linalg.norm(r) / pbnorm
            if rel <= self.tol:
                break
            dx, info = spla.gmres(op, np.ascontiguousarray(r).view(float).ravel(),
                                  rtol=self.tol / rel, atol=0.0, restart=GMRES_RESTART,
                                  maxiter=self.maxiter)
            Uh = Uh + as_spec(dx)
            rel = np.linalg.norm(pb - pa(Uh)) / pbnorm
        if not rel <= max(self.tol, 1e-10):
            raise IllConditionedError(
                f"strip solve stalled at relative residual {rel:.2e}",
                condition_estimate=self.condition_estimate(), residual=rel)
        return h.irfft(Uh)

    def _dense_solve(self, b):
        shape = b.shape
        n = b.size
        A = np.empty((n, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            A[:, j] = self._apply_unknown(e.reshape(shape)).ravel()
            e[j] = 0.0
        try:
            lu = scipy.linalg.lu_factor(A, check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise IllConditionedError(str(exc), condition_estimate=np.inf) from exc
        u = scipy.linalg.lu_solve(lu, b.ravel()).reshape(shape)
        rel = np.linalg.norm(b - self._apply_unknown(u)) / np.linalg.norm(b)
        if not rel <= 1e-10:
            raise IllConditionedError(
                f"dense strip solve residual {rel:.2e}",
                condition_estimate=float(np.linalg.cond(A)), residual=rel)
        return u

    def condition_estimate(self):
        """Largest condition number among the flat per-mode blocks."""
        return float(np.max(np.linalg.cond(np.linalg.inv(self._flat_inverse))))

    def dirichlet_energy(self, v):
        """``int |grad_{x,y} phi|^2`` over the strip plus the flat tail below it."""
        pf = pushforward_derivatives(v, self.map, second=False)
        dens = (np.sum(pf.grad**2, axis=0) + pf.dy**2) * self.map.rho_z
        vol = self.grid.dx**self.grid.d
        strip = float(np.tensordot(self.zgrid.weights, dens, axes=(0, 0)).sum() * vol)
        vb = v.values[-1]
        tail = float(np.sum(vb * self.h.absd(vb)) * vol)
        return strip + tail


@lru_cache(maxsize=16)
def _flat_inverses(zgrid, grid):
    """Inverse flat-surface blocks, one per horizontal rfft mode."""
    kmag_r = horizontal(grid).kmag
    M = zgrid.M
    Dz, Dzz = zgrid.Dz, zgrid.Dzz
    q_all = kmag_r.ravel()
    q_unique, index = np.unique(np.round(q_all, 12), return_inverse=True)
    base = np.zeros((M, M))
    base[:-1] = Dzz[1:-1, 1:]
    base[-1] = Dz[-1, 1:]
    blocks = np.repeat(base[None], len(q_unique), axis=0)
    idx = np.arange(M - 1)
    blocks[:, idx, idx] -= q_unique[:, None] ** 2
    blocks[:, -1, -1] -= q_unique
    inv = np.linalg.inv(blocks)
    return inv[index.ravel()]


def solve_dirichlet(coeffs, f_surface, source=None, **solver_kw):
    """One-shot solve; see :class:`StripSolver`."""
    return StripSolver(coeffs, **solver_kw).solve(f_surface, source)


@dataclass(frozen=True)
class Pushforward:
    """Cartesian derivatives of ``phi(x, y)`` where ``v(x, z) = phi(x, rho(x, z))``.

    ``grad`` has shape ``(d, M+1, *shape)``; ``hess`` is ``(d+1, d+1, M+1, *shape)``
    with index ``d`` standing for ``y``.
    """

    grad: np.ndarray
    dy: np.ndarray
    hess: np.ndarray = None

    @property
    def full_grad(self):
        return np.concatenate([self.grad, self.dy[None]], axis=0)


def _cartesian_first(w, fmap, h, zgrid, wz0=None):
    wz = zgrid.dz(w)
    if wz0 is not None:
        wz[0] = wz0
    dy = wz / fmap.rho_z
    gx = h.grad(w) - fmap.rho_x * dy
    return gx, dy


def pushforward_derivatives(v, fmap, second=True):
    """Invert the chain rule ``d_i v = d_i phi + d_i rho d_y phi``, ``d_z v = rho_z d_y phi``."""
    values = v.values if isinstance(v, StripField) else np.asarray(v)
    vz0 = v.vz0 if isinstance(v, StripField) else None
    h = horizontal(fmap.grid)
    zgrid = fmap.zgrid
    gx, dy = _cartesian_first(values, fmap, h, zgrid, vz0)
    if not second:
        return Pushforward(gx, dy)
    d = fmap.grid.d
    comps = list(gx) + [dy]
    hess = np.empty((d + 1, d + 1) + values.shape)
    for j, c in enumerate(comps):
        cgx, cdy = _cartesian_first(c, fmap, h, zgrid)
        hess[:d, j] = cgx
        hess[d, j] = cdy
    hess = 0.5 * (hess + np.swapaxes(hess, 0, 1))
    return Pushforward(gx, dy, hess)


def cartesian_divergence(w, fmap):
    """``sum_i d_i w_i`` for a strip vector field with ``d+1`` Cartesian components."""
    h = horizontal(fmap.grid)
    d = fmap.grid.d
    out = 0.0
    for i in range(d + 1):
        gx, dy = _cartesian_first(w[i], fmap, h, fmap.zgrid)
        out = out + (dy if i == d else gx[i])
    return out


def ellipticity_constant(coeffs, level=0):
    """``c2 = min (4 alpha |xi|^2 - (beta.xi)^2) / |xi|^2`` over nodes and directions."""
    grid = coeffs.map.grid
    alpha = coeffs.alpha[level]
    beta = coeffs.beta[:, level]
    if grid.d == 1:
        return float(np.min(4 * alpha - beta[0] ** 2))
    # minimise over unit directions: smallest eigenvalue of 4 alpha I - beta beta^T
    b2 = np.sum(beta**2, axis=0)
    return float(np.min(4 * alpha - b2))


def decoupling_symbols(coeffs, level=0):
    """Symbols ``a, A = (-i beta.xi -/+ sqrt(4 alpha |xi|^2 - (beta.xi)^2)) / 2`` at one level."""
    grid = coeffs.map.grid
    d = grid.d
    alpha = coeffs.alpha[level].reshape(grid.shape + (1,) * d)
    beta = coeffs.beta[:, level].reshape((d,) + grid.shape + (1,) * d)
    xi = grid.xi.reshape((d,) + (1,) * d + grid.shape)
    bxi = np.sum(beta * xi, axis=0)
    k2 = np.sum(xi**2, axis=0)
    rad = 4 * alpha * k2 - bxi**2
    c2 = ellipticity_constant(coeffs, level)
    if c2 <= 0:
        bad = np.unravel_index(np.argmin(rad - 0.0 * k2), rad.shape)
        raise DegenerateSymbolError(
            f"4 alpha |xi|^2 - (beta.xi)^2 is not positive definite (c2 = {c2:.3g})",
            location=tuple(int(i) for i in bad))
    root = np.sqrt(np.maximum(rad, 0.0))
    a = 0.5 * (-1j * bxi - root)
    A = 0.5 * (-1j * bxi + root)
    return SymbolTable(grid, 1.0, a), SymbolTable(grid, 1.0, A)
