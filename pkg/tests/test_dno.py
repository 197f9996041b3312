import numpy as np
import pytest

from wwbreak import dno, spectral
from wwbreak.spectral import Grid

SETTINGS = dno.StripSettings(M=32)


def ctx_for(eta, n=64):
    return dno.DnoContext(Grid(1, n), eta, SETTINGS)


def test_flat_dn_is_abs_d():
    g = Grid(1, 64)
    ctx = dno.DnoContext(g, np.zeros(64), SETTINGS)
    x = g.x[0]
    assert np.abs(dno.dn_apply(ctx, np.cos(2 * x)) - 2 * np.cos(2 * x)).max() < 1e-12
    f = np.sin(x) + 0.5 * np.cos(7 * x)
    assert np.abs(dno.dn_apply(ctx, f) - (np.sin(x) + 3.5 * np.cos(7 * x))).max() < 1e-11


def test_constants_annihilated():
    g = Grid(1, 64)
    ctx = dno.DnoContext(g, 0.2 * np.cos(g.x[0]), SETTINGS)
    assert np.abs(dno.dn_apply(ctx, np.full(64, 3.0))).max() < 1e-12


def test_dn_exact_harmonic_trace():
    # phi = e^y cos x: G(eta) psi = (phi_y - eta' phi_x) at the surface
    g = Grid(1, 64)
    x = g.x[0]
    eta = 0.15 * np.cos(x) + 0.05 * np.sin(2 * x)
    deta = spectral.grad(g, eta)[0]
    ctx = dno.DnoContext(g, eta, SETTINGS)
    phi = np.exp(eta) * np.cos(x)
    exact = phi + deta * np.exp(eta) * np.sin(x)
    assert np.abs(dno.dn_apply(ctx, phi) - exact).max() < 1e-9


def test_dn_mean_zero(rng):
    g = Grid(1, 64)
    ctx = dno.DnoContext(g, 0.2 * np.cos(g.x[0]), SETTINGS)
    assert abs(np.mean(dno.dn_apply(ctx, rng.standard_normal(64)))) < 1e-10


def test_translation_covariance():
    g = Grid(1, 64)
    x = g.x[0]
    eta = 0.2 * np.cos(x) + 0.1 * np.sin(3 * x)
    f = np.sin(2 * x) + 0.3 * np.cos(x)
    shift = 5
    a = dno.dn_apply(ctx_for(np.roll(eta, shift)), np.roll(f, shift))
    b = np.roll(dno.dn_apply(ctx_for(eta), f), shift)
    assert np.abs(a - b).max() < 1e-11


# ------------------------------------------------------------ traces

def test_traces_flat():
    g = Grid(1, 64)
    ctx = dno.DnoContext(g, np.zeros(64), SETTINGS)
    psi = np.cos(3 * g.x[0])
    V, B = dno.traces(ctx, psi)
    assert np.abs(B - 3 * psi).max() < 1e-11
    assert np.abs(V[0] + 3 * np.sin(3 * g.x[0])).max() < 1e-12


def test_traces_reconstruct_gradient():
    g = Grid(1, 64)
    x = g.x[0]
    eta = 0.2 * np.cos(x)
    ctx = dno.DnoContext(g, eta, SETTINGS)
    psi = np.sin(x) + 0.2 * np.cos(2 * x)
    V, B = dno.traces(ctx, psi)
    assert np.abs(V + B * ctx.grad_eta - spectral.grad(g, psi)).max() < 1e-12


def test_traces_match_harmonic_velocity():
    g = Grid(1, 64)
    x = g.x[0]
    eta = 0.15 * np.cos(x)
    ctx = dno.DnoContext(g, eta, SETTINGS)
    V, B = dno.traces(ctx, np.exp(eta) * np.cos(x))
    assert np.abs(B - np.exp(eta) * np.cos(x)).max() < 1e-9
    assert np.abs(V[0] + np.exp(eta) * np.sin(x)).max() < 1e-9


# ------------------------------------------------------------ shape derivative

def test_shape_derivative_flat_example():
    # d G(0) cos x . cos 2x = -|D|(cos 2x |D| cos x) - d_x(cos 2x d_x cos x) = -cos x
    g = Grid(1, 64)
    x = g.x[0]
    ctx = dno.DnoContext(g, np.zeros(64), SETTINGS)
    got = dno.shape_derivative(ctx, np.cos(x), np.cos(2 * x))
    assert np.abs(got + np.cos(x)).max() < 1e-11


def test_shape_derivative_matches_finite_difference():
    g = Grid(1, 64)
    x = g.x[0]
    eta = 0.1 * np.cos(x)
    h = np.sin(2 * x)
    psi = np.cos(x) + 0.3 * np.sin(3 * x)
    exact = dno.shape_derivative(ctx_for(eta), psi, h)
    errs = []
    for eps in (1e-2, 5e-3):
        fd = (dno.dn_apply(ctx_for(eta + eps * h), psi) - dno.dn_apply(ctx_for(eta - eps * h), psi)) / (2 * eps)
        errs.append(np.abs(fd - exact).max())
    assert errs[1] < 1e-4
    assert np.log2(errs[0] / errs[1]) > 1.8


# ------------------------------------------------------------ symbol

def test_symbol_flat_is_abs_xi():
    g = Grid(1, 32)
    ctx = dno.DnoContext(g, np.zeros(32), SETTINGS)
    lam = ctx.lam.samples
    assert np.abs(lam - np.broadcast_to(g.kmag, lam.shape)).max() < 1e-13
    assert ctx.lam.order == 1.0


def test_symbol_positive_and_homogeneous():
    g = Grid(1, 32)
    ctx = dno.DnoContext(g, 0.2 * np.cos(g.x[0]), SETTINGS)
    assert dno.symbol_lower_bound(ctx.lam) > 0.5
    xi = g.xi[0]
    i3, i6 = int(np.argmin(np.abs(xi - 3))), int(np.argmin(np.abs(xi - 6)))
    lam = ctx.lam.samples
    assert np.abs(lam[:, i6] - 2 * lam[:, i3]).max() < 1e-12


def test_symbol_closed_form_1d():
    # sqrt((1 + |grad eta|^2) |xi|^2 - (grad eta . xi)^2) reduces to |xi| in 1-D
    g = Grid(1, 32)
    ctx = dno.DnoContext(g, 0.2 * np.cos(g.x[0]), SETTINGS)
    assert np.abs(ctx.lam.samples - g.kmag[None, :]).max() < 1e-12


def test_symbol_closed_form_2d():
    g = Grid(2, 16)
    x, y = g.x
    eta = 0.1 * np.cos(x) * np.sin(y)
    ctx = dno.DnoContext(g, eta, dno.StripSettings(M=16))
    ge = ctx.grad_eta.reshape((2,) + g.shape + (1, 1))
    xi = g.xi.reshape((2, 1, 1) + g.shape)
    ref = np.sqrt((1 + np.sum(ge**2, axis=0)) * np.sum(xi**2, axis=0) - np.sum(ge * xi, axis=0) ** 2)
    assert np.abs(ctx.lam.samples - ref).max() < 1e-12


# ------------------------------------------------------------ remainder

def test_flat_remainder_low_frequency_only():
    g = Grid(1, 64)
    ctx = dno.DnoContext(g, np.zeros(64), SETTINGS)
    x = g.x[0]
    assert np.abs(dno.dn_paralinear_remainder(ctx, np.cos(8 * x))).max() < 1e-11
    # the paradifferential cutoff removes |xi| <= 1, so the whole of G cos x remains
    assert np.abs(dno.dn_paralinear_remainder(ctx, np.cos(x)) - np.cos(x)).max() < 1e-11


def test_remainder_smaller_than_dn_at_high_frequency():
    g = Grid(1, 128)
    x = g.x[0]
    ctx = dno.DnoContext(g, 0.1 * np.cos(x), SETTINGS)
    f = np.cos(24 * x)
    r = dno.dn_paralinear_remainder(ctx, f)
    assert np.linalg.norm(r) < 0.05 * np.linalg.norm(dno.dn_apply(ctx, f))


# ------------------------------------------------------------ energy

def test_strip_energy_matches_pairing():
    # Dirichlet integral equals int psi G psi
    g = Grid(1, 64)
    x = g.x[0]
    ctx = dno.DnoContext(g, 0.15 * np.cos(x), SETTINGS)
    psi = np.sin(x) + 0.3 * np.cos(2 * x)
    pair = np.sum(psi * dno.dn_apply(ctx, psi)) * g.dx
    assert dno.strip_energy(ctx, psi) == pytest.approx(pair, rel=1e-8)


def test_make_context_overrides():
    g = Grid(1, 32)
    ctx = dno.make_context(g, np.zeros(32), SETTINGS, M=12)
    assert ctx.settings.M == 12 and ctx.map.zgrid.M == 12
