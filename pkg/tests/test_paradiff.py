import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwbreak import spectral
from wwbreak.errors import GridMismatchError, SymbolDomainError
from wwbreak.paradiff import (SymbolTable, admissible_cutoff, bony_decompose, paradiff_apply,
                              paraproduct, symbol_compose_check)
from wwbreak.spectral import Grid

from conftest import smooth_field

EPS = np.finfo(float).eps


def high_mode_field(grid, rng, kmin):
    uh = np.zeros(grid.shape, dtype=complex)
    band = (grid.kmag >= kmin) & grid.dealias_mask
    uh[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
    return np.fft.ifft(uh).real * grid.n


# ------------------------------------------------------------ paraproduct

def test_paraproduct_constant_symbol(grid64, rng):
    u = rng.standard_normal(64)
    assert np.abs(paraproduct(grid64, np.ones(64), u) - u).max() < 1e-13
    assert np.abs(paraproduct(grid64, np.full(64, -2.5), u) + 2.5 * u).max() < 1e-13


def test_paraproduct_block_convention(grid64, rng):
    # with S_j = 0 for j < 0 the constant symbol keeps only blocks k >= 3
    u = rng.standard_normal(64)
    high = u - sum(spectral.lp_block(grid64, u, k) for k in range(3))
    assert np.abs(paraproduct(grid64, np.ones(64), u, convention="block") - high).max() < 1e-13
    with pytest.raises(ValueError):
        paraproduct(grid64, np.ones(64), u, convention="other")


def test_paraproduct_zero_input(grid64, rng):
    assert np.abs(paraproduct(grid64, rng.standard_normal(64), np.zeros(64))).max() == 0.0


def test_paraproduct_grid_mismatch(grid64):
    with pytest.raises(GridMismatchError):
        paraproduct(grid64, np.ones(64), np.ones(32))


def test_paraproduct_localization(rng):
    # output block j sees only input blocks k with |j - k| small
    g = Grid(1, 256)
    a = smooth_field(g, rng, 8)
    u = rng.standard_normal(256)
    for k in range(3, g.k_max + 1):
        out = paraproduct(g, a, spectral.lp_block(g, u, k))
        for j in range(g.k_top + 1):
            if abs(j - k) > 2:
                assert np.abs(spectral.lp_block(g, out, j)).max() < 1e-12


# ------------------------------------------------------------ Bony

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bony_exact(seed):
    g = Grid(1, 128)
    r = np.random.default_rng(seed)
    a, u = r.standard_normal((2, 128))
    parts = bony_decompose(g, a, u)
    res = np.abs(a * u - (parts.Tau + parts.Tua + parts.R)).max()
    assert res <= 1e3 * EPS * np.abs(a).max() * np.abs(u).max()


def test_bony_exact_2d(rng):
    g = Grid(2, 32)
    a, u = rng.standard_normal((2,) + g.shape)
    parts = bony_decompose(g, a, u)
    assert np.abs(a * u - sum(parts)).max() <= 1e3 * EPS * np.abs(a).max() * np.abs(u).max()


def test_bony_constant_symbol_direct_sum(grid64, rng):
    # R(u, 1) = sum_{|k-l|<=2} Delta_k 1 Delta_l u = Delta_0 u + Delta_1 u + Delta_2 u
    u = rng.standard_normal(64)
    parts = bony_decompose(grid64, np.ones(64), u)
    low = sum(spectral.lp_block(grid64, u, k) for k in range(3))
    assert np.abs(parts.R - low).max() < 1e-13


def test_bony_double_sum_oracle():
    g = Grid(1, 64)
    a = u = np.cos(4 * g.x[0])
    A = spectral.lp_decompose(g, a).blocks
    U = spectral.lp_decompose(g, u).blocks
    K = len(A)
    Tau = sum(A[k] * U[l] for l in range(K) for k in range(K) if l >= k + 3)
    Tua = sum(A[k] * U[l] for l in range(K) for k in range(K) if k >= l + 3)
    R = sum(A[k] * U[l] for l in range(K) for k in range(K) if abs(k - l) <= 2)
    parts = bony_decompose(g, a, u)
    for got, ref in zip(parts, (Tau, Tua, R)):
        assert np.abs(got - ref).max() < 1e-14
    # both factors live in block 2 only: the whole product is diagonal
    assert np.abs(parts.Tau).max() < 1e-15 and np.abs(parts.R - a * u).max() < 1e-14


# ------------------------------------------------------------ cutoffs

def test_admissible_cutoff_cone():
    eta = np.array([8.0, 32.0, 128.0])
    k_top = 10
    near = admissible_cutoff(0.05 * eta, eta, k_top)
    far = admissible_cutoff(0.5 * eta, eta, k_top)
    assert np.allclose(near, 1.0)
    assert np.allclose(far, 0.0)


# ------------------------------------------------------------ quantization

def test_symbol_table_validation(grid64):
    with pytest.raises(SymbolDomainError):
        SymbolTable(grid64, 0.0, np.ones((64, 32)))
    bad = np.ones((64, 64), dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(SymbolDomainError):
        SymbolTable(grid64, 0.0, bad)


def test_paradiff_identity_symbol_is_psi_cut(grid64, rng):
    u = rng.standard_normal(64)
    one = SymbolTable.from_multiplier(grid64, np.ones(64), 0.0)
    ref = spectral.fourier_multiplier(grid64, u, spectral.psi_cut(grid64.kmag))
    assert np.abs(paradiff_apply(one, u) - ref).max() < 1e-12


def test_paradiff_without_cutoff_is_identity(grid64, rng):
    u = rng.standard_normal(64)
    one = SymbolTable.from_multiplier(grid64, np.ones(64), 0.0)
    assert np.abs(paradiff_apply(one, u, cutoff=False) - u).max() < 1e-12


def test_paradiff_multiplier_symbol(grid64, rng):
    u = rng.standard_normal(64)
    m = np.sqrt(1 + grid64.kmag**2)
    sym = SymbolTable.from_multiplier(grid64, m, 1.0)
    ref = spectral.fourier_multiplier(grid64, u, m * spectral.psi_cut(grid64.kmag))
    assert np.abs(paradiff_apply(sym, u) - ref).max() < 1e-11


def test_paradiff_function_symbol_close_to_paraproduct(rng):
    g = Grid(1, 256)
    a = 1.0 + 0.3 * np.cos(g.x[0]) + 0.1 * np.sin(2 * g.x[0])
    u = high_mode_field(g, rng, 16)
    T1 = paradiff_apply(SymbolTable.from_field(g, a), u)
    T2 = paraproduct(g, a, u)
    assert np.linalg.norm(T1 - T2) / np.linalg.norm(T2) < 0.1


def test_paradiff_linear(grid64, rng):
    a = SymbolTable.from_function(grid64, lambda x, xi: (1 + 0.2 * np.cos(x[0])) * np.abs(xi[0]), 1.0)
    u, v = rng.standard_normal((2, 64))
    lhs = paradiff_apply(a, u + 3 * v)
    rhs = paradiff_apply(a, u) + 3 * paradiff_apply(a, v)
    assert np.abs(lhs - rhs).max() < 1e-11


def test_paradiff_grid_mismatch(grid64):
    sym = SymbolTable.from_multiplier(grid64, np.ones(64), 0.0)
    with pytest.raises(GridMismatchError):
        paradiff_apply(sym, np.ones(32))


def test_paradiff_chunking_invariant(grid64, rng):
    sym = SymbolTable.from_function(grid64, lambda x, xi: np.exp(np.sin(x[0])) * (1 + xi[0] ** 2) ** 0.25, 0.5)
    u = rng.standard_normal(64)
    assert np.abs(paradiff_apply(sym, u, chunk=7) - paradiff_apply(sym, u)).max() < 1e-12


def _matrix(sym, n):
    return np.array([paradiff_apply(sym, e) for e in np.eye(n)]).T


def test_constant_symbol_self_adjoint():
    g = Grid(1, 64)
    T = _matrix(SymbolTable.from_field(g, np.full(64, 1.7)), 64)
    assert np.abs(T - T.T).max() < 1e-13


def test_adjoint_defect_linear_in_oscillation():
    # only the oscillating part of a real symbol contributes to T_a - T_a^T
    g = Grid(1, 64)
    defects = []
    for eps in (0.1, 0.2):
        T = _matrix(SymbolTable.from_field(g, 1 + eps * np.cos(g.x[0])), 64)
        defects.append(np.linalg.norm(T - T.T, 2))
    assert defects[1] == pytest.approx(2 * defects[0], rel=1e-10)


# ------------------------------------------------------------ composition

def test_compose_constants_zero_defect(rng):
    g = Grid(1, 128)
    one = SymbolTable.from_multiplier(g, np.ones(128), 0.0)
    diag = symbol_compose_check(one, one, rng.standard_normal(128))
    assert np.all(diag.defect_ratio < 1e-12)


def test_compose_smooth_functions_gain(rng):
    g = Grid(1, 512)
    a = SymbolTable.from_field(g, 1 + 0.3 * np.cos(g.x[0]))
    b = SymbolTable.from_field(g, np.exp(0.2 * np.sin(g.x[0])))
    diag = symbol_compose_check(a, b, rng.standard_normal(512))
    assert diag.slope <= -0.4


def test_compose_orders_bounded(rng):
    g = Grid(1, 256)
    a = SymbolTable.from_function(g, lambda x, xi: (1 + 0.2 * np.cos(x[0])) * np.sqrt(1 + xi[0] ** 2), 1.0)
    b = SymbolTable.from_function(g, lambda x, xi: (1 + 0.1 * np.sin(x[0])) / np.sqrt(1 + xi[0] ** 2), -1.0)
    diag = symbol_compose_check(a, b, rng.standard_normal(256))
    assert diag.product_ratio.max() < 3 * diag.product_ratio.min()
