"""Paradifferential quantization, paraproducts and Bony's decomposition.

Two low-pass conventions coexist:

* ``"full"``: ``S_j = zeta_j(D)`` for every integer ``j``; constants
  pass every filter, so ``T_1 u = u``.
* ``"block"``: ``S_j = sum_{i <= j} Delta_i``, which vanishes for
  ``j < 0``.  This is the convention under which the index pairs split
  exactly into low-high, high-low and diagonal parts.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import spectral
from .errors import GridMismatchError, SymbolDomainError
from .spectral import phi_k, psi_cut, zeta_k


@dataclass(frozen=True)
class SymbolTable:
    """Samples ``a(x_j, xi_m)`` on every node and every grid wavevector.

    ``samples`` has shape ``(*grid.shape, *grid.shape)``: spatial axes
    first, then wavevector axes in ``fftn`` ordering.
    """

    grid: spectral.Grid
    order: float
    samples: np.ndarray

    def __post_init__(self):
        expect = self.grid.shape * 2
        if self.samples.shape != expect:
            raise SymbolDomainError(
                f"symbol samples have shape {self.samples.shape}, expected {expect}")
        if not np.all(np.isfinite(self.samples)):
            raise SymbolDomainError("symbol samples must be finite")

    @classmethod
    def from_function(cls, grid, func, order):
        """``func(x, xi)`` with ``x`` of shape ``(d, *shape, 1, ...)`` and
        ``xi`` of shape ``(d, 1, ..., *shape)``."""
        d = grid.d
        x = grid.x.reshape((d,) + grid.shape + (1,) * d)
        xi = grid.xi.reshape((d,) + (1,) * d + grid.shape)
        vals = np.broadcast_to(func(x, xi), grid.shape * 2)
        return cls(grid, order, np.array(vals, dtype=complex))

    @classmethod
    def from_multiplier(cls, grid, m, order):
        """x-independent symbol; ``m`` is an array on ``grid.xi`` or a callable of it."""
        vals = m(grid.xi) if callable(m) else np.asarray(m)
        vals = np.broadcast_to(vals, grid.shape)
        return cls(grid, order, np.array(np.broadcast_to(vals, grid.shape * 2), dtype=complex))

    @classmethod
    def from_field(cls, grid, a):
        """xi-independent symbol of order 0."""
        a = grid.check(a)
        vals = np.broadcast_to(a.reshape(grid.shape + (1,) * grid.d), grid.shape * 2)
        return cls(grid, 0.0, np.array(vals, dtype=complex))

    def is_hermitian(self, rtol=1e-12):
        """True when ``a(x, -xi) == conj(a(x, xi))``, i.e. T_a maps real to real."""
        d = self.grid.d
        flipped = self.samples
        for ax in range(d, 2 * d):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        scale = max(np.abs(self.samples).max(), 1e-300)
        return bool(np.abs(flipped - np.conj(self.samples)).max() <= rtol * scale)


def admissible_cutoff(theta, eta_freq, k_top):
    """``chi(theta, eta) = sum_k zeta_{k-3}(theta) phi_k(eta)``, radial in both."""
    out = 0.0
    for k in range(k_top + 1):
        out = out + zeta_k(theta, k - 3) * phi_k(eta_freq, k)
    return out


def _same_grid(grid, *fields):
    for f in fields:
        grid.check(f)
    shapes = {np.shape(f) for f in fields}
    if len(shapes) > 1:
        raise GridMismatchError(f"fields live on different grids: {sorted(shapes)}")


def _lowpass_multiplier(grid, j, convention):
    if convention == "full" or j >= 0:
        return zeta_k(grid.kmag, j)
    if convention == "block":
        return np.zeros(grid.shape)
    raise ValueError(f"unknown convention {convention!r}")


def paraproduct(grid, a, u, convention="full"):
    """``T_a u = sum_{k >= 0} S_{k-3} a Delta_k u``."""
    _same_grid(grid, a, u)
    ah = grid.fft(a)
    uh = grid.fft(u)
    out = np.zeros(grid.shape, dtype=complex)
    for k in range(grid.k_top + 1):
        low = grid.ifft(_lowpass_multiplier(grid, k - 3, convention) * ah)
        out += low * grid.ifft(phi_k(grid.kmag, k) * uh)
    if np.isrealobj(a) and np.isrealobj(u):
        return out.real
    return out


class BonyParts(NamedTuple):
    Tau: np.ndarray
    Tua: np.ndarray
    R: np.ndarray


def bony_decompose(grid, a, u):
    """Split the grid product ``a*u`` into ``T_a u + T_u a + R(u, a)``.

    Both paraproducts use the block convention and ``R`` is the sum of
    ``Delta_k a Delta_l u`` over ``|k - l| <= 2``, so the three parts add
    up to ``a*u`` to round-off.
    """
    _same_grid(grid, a, u)
    A = spectral.lp_decompose(grid, a).blocks
    U = spectral.lp_decompose(grid, u).blocks
    K = len(A)
    cumA = np.cumsum(A, axis=0)
    cumU = np.cumsum(U, axis=0)
    Tau = np.zeros_like(A[0])
    Tua = np.zeros_like(A[0])
    R = np.zeros_like(A[0])
    for k in range(3, K):
        Tau = Tau + cumA[k - 3] * U[k]
        Tua = Tua + cumU[k - 3] * A[k]
    for k in range(K):
        lo, hi = max(0, k - 2), min(K - 1, k + 2)
        R = R + A[k] * (cumU[hi] - (cumU[lo - 1] if lo > 0 else 0.0))
    return BonyParts(Tau, Tua, R)


def paradiff_apply(symbol, u, cutoff=True, chunk=4096):
    """Quantize ``symbol`` against ``u``.

    For each input wavevector ``eta`` the column ``x -> a(x, eta)`` is
    filtered by ``chi(., eta)`` in its own frequency variable, multiplied
    by ``psi_cut(eta) * uhat(eta) * exp(i eta x)`` and summed.  With
    ``cutoff=False`` the ``psi_cut`` factor is replaced by 1.
    """
    grid = symbol.grid
    u = grid.check(u)
    if u.shape != grid.shape:
        raise GridMismatchError(f"u has shape {u.shape}, symbol grid is {grid.shape}")
    d = grid.d
    nfreq = grid.size
    uh = grid.fft(u).reshape(nfreq)
    weight = uh * (psi_cut(grid.kmag).reshape(nfreq) if cutoff else 1.0)
    active = np.nonzero(weight != 0)[0]
    kmag_eta = grid.kmag.reshape(nfreq)
    samples = symbol.samples.reshape(grid.shape + (nfreq,))
    xi_flat = grid.xi.reshape(d, nfreq)
    xaxes = tuple(range(d))
    out = np.zeros(grid.shape, dtype=complex)
    for start in range(0, len(active), chunk):
        cols = active[start:start + chunk]
        ahat = np.fft.fftn(samples[..., cols], axes=xaxes)
        chi = admissible_cutoff(grid.kmag[..., None], kmag_eta[cols], grid.k_top)
        filtered = np.fft.ifftn(ahat * chi, axes=xaxes)
        phase = np.exp(1j * np.tensordot(grid.x, xi_flat[:, cols], axes=(0, 0)))
        out += np.sum(filtered * phase * weight[cols], axis=-1)
    if np.isrealobj(u) and symbol.is_hermitian():
        return out.real
    return out


@dataclass(frozen=True)
class ComposeDiagnostic:
    bands: np.ndarray
    defect_ratio: np.ndarray
    product_ratio: np.ndarray
    slope: float


def symbol_compose_check(a, b, u, mu=0.0, gain=0.5, bands=None):
    """Measure ``T_a T_b - T_{ab}`` on the dyadic pieces of ``u``.

    ``defect_ratio[i] = ||(T_a T_b - T_ab) u_k||_{H^{mu-m-m'+gain}} / ||u_k||_{H^mu}``
    for ``u_k = Delta_k u``; ``product_ratio`` is the same with ``T_a T_b u_k``
    in ``H^{mu-m-m'}``.  ``slope`` is the least-squares slope of
    ``log2(defect_ratio)`` against ``k``.
    """
    grid = a.grid
    if b.grid != grid:
        raise GridMismatchError("symbols live on different grids")
    ab = SymbolTable(grid, a.order + b.order, a.samples * b.samples)
    m_tot = a.order + b.order
    if bands is None:
        bands = range(3, grid.k_max + 1)
    bands = np.array(list(bands))
    defect, prod = [], []
    for k in bands:
        uk = spectral.lp_block(grid, u, int(k))
        nu = spectral.sobolev_norm(grid, uk, mu)
        tab = paradiff_apply(a, paradiff_apply(b, uk))
        diff = tab - paradiff_apply(ab, uk)
        defect.append(_hs_complex(grid, diff, mu - m_tot + gain) / nu)
        prod.append(_hs_complex(grid, tab, mu - m_tot) / nu)
    defect = np.array(defect)
    with np.errstate(divide="ignore"):
        logs = np.log2(np.maximum(defect, 1e-300))
    slope = float(np.polyfit(bands, logs, 1)[0]) if len(bands) > 1 else float("nan")
    return ComposeDiagnostic(bands, defect, np.array(prod), slope)


def _hs_complex(grid, u, s):
    uh = grid.fft(u)
    return float(np.sqrt(grid.cell_volume * np.sum((1 + grid.kmag**2) ** s * np.abs(uh) ** 2)))
