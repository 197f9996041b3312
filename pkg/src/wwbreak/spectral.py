"""Periodic grids, Fourier multipliers and Littlewood-Paley blocks.

Fields are plain numpy arrays whose trailing ``d`` axes are the grid axes;
any leading axes are treated as a batch (vector components, vertical
levels, ...).  Fourier coefficients are normalised as Fourier-series
coefficients, ``uhat = fftn(u) / N``, so that the zero mode is the cell
mean.
"""
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import GridMismatchError, InvalidMultiplierError

# plateaus of the dyadic profile: zeta == 1 below, zeta == 0 above
ZETA_INNER = 1.1
ZETA_OUTER = 1.9


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus ``[0, L)^d``."""

    d: int = 1
    n: int = 256
    L: float = 2 * math.pi

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def axes(self):
        return tuple(range(-self.d, 0))

    @property
    def size(self):
        return self.n**self.d

    @property
    def dx(self):
        return self.L / self.n

    @property
    def cell_volume(self):
        return self.L**self.d

    @property
    def k_min(self):
        """Smallest nonzero wavenumber magnitude."""
        return 2 * math.pi / self.L

    @property
    def xi_nyquist(self):
        return math.pi * self.n / self.L

    @cached_property
    def x(self):
        """Node coordinates, shape ``(d, *shape)`` (``ij`` indexing)."""
        x1 = np.arange(self.n) * self.dx
        return np.array(np.meshgrid(*([x1] * self.d), indexing="ij"))

    @cached_property
    def xi(self):
        """Wavevectors in ``fftn`` ordering, shape ``(d, *shape)``."""
        k1 = np.fft.fftfreq(self.n, d=self.dx) * 2 * math.pi
        return np.array(np.meshgrid(*([k1] * self.d), indexing="ij"))

    @cached_property
    def xi_odd(self):
        """Wavevectors with the Nyquist row zeroed, for odd-order derivatives."""
        xi = self.xi.copy()
        k1 = np.fft.fftfreq(self.n) * self.n
        nyq = np.abs(k1) == self.n // 2
        for j in range(self.d):
            idx = [slice(None)] * self.d
            idx[j] = nyq
            xi[j][tuple(idx)] = 0.0
        return xi

    @cached_property
    def kmag(self):
        """``|xi|`` in ``fftn`` ordering."""
        return np.sqrt(np.sum(self.xi**2, axis=0))

    @cached_property
    def k_max(self):
        """Largest dyadic index whose block support lies below Nyquist."""
        return int(math.floor(math.log2(self.xi_nyquist / ZETA_OUTER)))

    @cached_property
    def k_top(self):
        """Smallest index K with ``zeta_K == 1`` on every grid wavenumber."""
        kmax = float(self.kmag.max())
        return max(0, int(math.ceil(math.log2(kmax / ZETA_INNER))))

    @cached_property
    def dealias_mask(self):
        """Two-thirds rule: keep integer modes with ``|m| <= n/3`` per axis."""
        m1 = np.abs(np.fft.fftfreq(self.n) * self.n)
        keep1 = m1 <= self.n / 3
        mask = np.ones(self.shape, dtype=bool)
        for j in range(self.d):
            shp = [1] * self.d
            shp[j] = self.n
            mask = mask & keep1.reshape(shp)
        return mask

    def fft(self, u):
        return np.fft.fftn(u, axes=self.axes) / self.size

    def ifft(self, uhat):
        return np.fft.ifftn(uhat, axes=self.axes) * self.size

    def check(self, u, name="field"):
        u = np.asarray(u)
        if u.shape[u.ndim - self.d:] != self.shape or u.ndim < self.d:
            raise GridMismatchError(
                f"{name} has shape {u.shape}, grid expects trailing {self.shape}")
        return u

    def zeros(self):
        return np.zeros(self.shape)


def _real_if(u, out):
    return out.real if np.isrealobj(u) else out


def _half(grid, m):
    """Restrict a multiplier sampled in ``fftn`` order to the rfft half-grid."""
    m = np.broadcast_to(m, np.shape(m)[:-grid.d] + grid.shape) if np.ndim(m) else m
    return m[..., :grid.n // 2 + 1] if np.ndim(m) else m


def _apply(grid, u, m):
    """``m(D) u`` with an rfft fast path for real input."""
    if np.isrealobj(u):
        uh = np.fft.rfftn(u, axes=grid.axes)
        return np.fft.irfftn(_half(grid, m) * uh, s=grid.shape, axes=grid.axes)
    return grid.ifft(m * grid.fft(u))


# ---------------------------------------------------------------- cutoffs

def zeta(theta):
    """Radial profile: 1 for ``|theta| <= 1.1``, 0 for ``|theta| >= 1.9``.

    The bridge is the quintic smoothstep, so the first two derivatives
    vanish at both plateau edges.
    """
    t = np.abs(np.asarray(theta, dtype=float))
    s = np.clip((ZETA_OUTER - t) / (ZETA_OUTER - ZETA_INNER), 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def zeta_k(theta, k):
    return zeta(np.asarray(theta, dtype=float) * 2.0**(-k))


def phi_k(theta, k):
    """Dyadic annulus profile; ``phi_0 = zeta`` and zero for negative k."""
    if k < 0:
        return np.zeros_like(np.asarray(theta, dtype=float))
    if k == 0:
        return zeta(theta)
    return zeta_k(theta, k) - zeta_k(theta, k - 1)


def psi_cut(theta):
    """High-pass cutoff: 0 for ``|theta| <= 1``, 1 for ``|theta| >= 2``."""
    # affine map of [1, 2] onto the zeta bridge [1.1, 1.9]
    t = np.abs(np.asarray(theta, dtype=float))
    return 1.0 - zeta(ZETA_INNER + (t - 1.0) * (ZETA_OUTER - ZETA_INNER))


# ------------------------------------------------------- Fourier multipliers

def fourier_multiplier(grid, u, m):
    """Apply the multiplier ``m(D)``.

    ``m`` is either an array sampled at ``grid.xi`` (``fftn`` ordering) or a
    callable receiving the wavevector array of shape ``(d, *shape)``.  For
    real ``u`` the multiplier is assumed Hermitian and a real field is
    returned.
    """
    u = grid.check(u)
    mult = m(grid.xi) if callable(m) else np.asarray(m)
    if not np.all(np.isfinite(mult)):
        bad = np.argwhere(~np.isfinite(np.broadcast_to(mult, grid.shape)))
        raise InvalidMultiplierError(
            f"multiplier is not finite at {len(bad)} wavenumbers (first index {bad[0].tolist()})")
    return _apply(grid, u, mult)


def abs_d(grid, u):
    """``|D| u``."""
    return fourier_multiplier(grid, u, grid.kmag)


def bracket_d(grid, u, s):
    """``<D>^s u`` with ``<xi> = (1 + |xi|^2)^(1/2)``."""
    return fourier_multiplier(grid, u, (1.0 + grid.kmag**2) ** (0.5 * s))


def grad(grid, u):
    """Spectral gradient, shape ``(d, *u.shape)``."""
    u = grid.check(u)
    return _apply(grid, u[None], 1j * grid.xi_odd.reshape((grid.d,) + (1,) * (u.ndim - grid.d) + grid.shape))


def div(grid, w):
    """Spectral divergence of a vector field with leading axis of length d."""
    w = np.asarray(w)
    if w.shape[0] != grid.d:
        raise GridMismatchError(f"vector field has {w.shape[0]} components, grid has d={grid.d}")
    parts = _apply(grid, grid.check(w), 1j * grid.xi_odd.reshape(
        (grid.d,) + (1,) * (w.ndim - 1 - grid.d) + grid.shape))
    return np.sum(parts, axis=0)


def laplacian(grid, u):
    return fourier_multiplier(grid, u, -grid.kmag**2)


def dealias(grid, u):
    """Zero the modes removed by the two-thirds rule."""
    return _apply(grid, grid.check(u), grid.dealias_mask)


# ------------------------------------------------------- Littlewood-Paley

def lp_block(grid, u, k):
    """``Delta_k u``; zero for ``k < 0`` and above the grid's top block."""
    u = grid.check(u)
    if k < 0 or k > grid.k_top:
        return np.zeros_like(u, dtype=float if np.isrealobj(u) else complex)
    return fourier_multiplier(grid, u, phi_k(grid.kmag, k))


def lp_lowpass(grid, u, k):
    """``S_k u`` for any integer ``k``."""
    return fourier_multiplier(grid, u, zeta_k(grid.kmag, k))


@dataclass(frozen=True)
class DyadicBlocks:
    """Blocks ``Delta_k u`` for ``0 <= k <= k_top``.

    Blocks above ``k_max`` straddle the Nyquist frequency and are listed
    in ``truncated``; they are kept so that the blocks always sum to u.
    """

    blocks: tuple
    k_max: int

    @property
    def k_top(self):
        return len(self.blocks) - 1

    @property
    def truncated(self):
        return tuple(range(self.k_max + 1, len(self.blocks)))

    def reconstruct(self):
        return np.sum(self.blocks, axis=0)

    def __getitem__(self, k):
        if k < 0 or k >= len(self.blocks):
            return np.zeros_like(self.blocks[0])
        return self.blocks[k]


def lp_decompose(grid, u):
    u = grid.check(u)
    uh = grid.fft(u)
    blocks = tuple(_real_if(u, grid.ifft(phi_k(grid.kmag, k) * uh))
                   for k in range(grid.k_top + 1))
    return DyadicBlocks(blocks=blocks, k_max=grid.k_max)


# ------------------------------------------------------------------ norms

def lp_norm(grid, u, p):
    """Per-cell ``L^p`` norm by the periodic rectangle rule."""
    u = np.abs(grid.check(u))
    if p == np.inf:
        return float(u.max())
    return float((grid.dx**grid.d * np.sum(u**p)) ** (1.0 / p))


def sobolev_norm(grid, u, s):
    """Parseval ``H^s`` norm over one period cell."""
    uh = grid.fft(grid.check(u))
    w = (1.0 + grid.kmag**2) ** s
    return float(np.sqrt(grid.cell_volume * np.sum(w * np.abs(uh) ** 2)))


def besov_norm(grid, u, s, p, q):
    """``(sum_k 2^{ksq} ||Delta_k u||_{L^p}^q)^{1/q}`` over all grid blocks."""
    blocks = lp_decompose(grid, u)
    terms = np.array([2.0 ** (k * s) * lp_norm(grid, b, p) for k, b in enumerate(blocks.blocks)])
    if q == np.inf:
        return float(terms.max())
    return float(np.sum(terms**q) ** (1.0 / q))
