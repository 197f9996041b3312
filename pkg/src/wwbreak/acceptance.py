"""Acceptance suite shared by the test-suite and ``wwbreak check``.

Each criterion is a function returning a :class:`CriterionResult` with the
measured value, the threshold it is held to and a short detail string.
Thresholds are fixed here and never relaxed by callers.
"""
from dataclasses import dataclass, replace
import math
import tempfile
import time

import numpy as np
from scipy.optimize import curve_fit

from . import config, dno, dynamics, spectral
from .paradiff import bony_decompose

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    value: float
    threshold: str
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        text = f"[{tag}] criterion {self.number:2d} {self.name}: {self.value:.4g} ({self.threshold})"
        return text + (f"; {self.detail}" if self.detail else "")


def _smooth_field(grid, rng, modes, amp, decay=2.0):
    """Random real trigonometric polynomial with ``modes`` harmonics."""
    x = grid.x[0]
    out = np.zeros(grid.shape)
    for m in range(1, modes + 1):
        c = rng.standard_normal(2)
        out += (c[0] * np.cos(m * x) + c[1] * np.sin(m * x)) / m**decay
    return amp * out


def _order(errors, steps):
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


# ------------------------------------------------------------------ 1

def energy_conservation(T=10.0, M=16):
    """Relative drift of H for a small cosine over ``[0, T]``."""
    grid = spectral.Grid(1, 256)
    x = grid.x[0]
    settings = dno.StripSettings(M=M)
    state = dynamics.SurfaceState(grid, 0.0, 0.01 * np.cos(x), np.zeros_like(x))
    H0 = dynamics.energy(state, settings=settings)
    dt = 1e-3
    steps = int(round(T / dt))
    worst = 0.0
    start = time.perf_counter()
    for i in range(1, steps + 1):
        state = dynamics.step(state, dt, settings)
        if i % 500 == 0 or i == steps:
            H = dynamics.energy(state, settings=settings)
            worst = max(worst, abs(H - H0) / H0)
    elapsed = time.perf_counter() - start
    # vertical resolution cross-check at the final state
    G_lo = dno.dn_apply(dno.make_context(grid, state.eta, M=M), state.psi)
    G_hi = dno.dn_apply(dno.make_context(grid, state.eta, M=48), state.psi)
    vres = float(np.abs(G_lo - G_hi).max() / max(np.abs(G_hi).max(), 1e-300))
    return CriterionResult(1, "energy conservation", worst <= 1e-8, worst, "<= 1e-8",
                           f"T={T:g}, M={M}, wall {elapsed:.0f}s, M={M} vs 48 DN rel diff {vres:.1e}")


# ------------------------------------------------------------------ 2

def linear_dispersion(k=2, amp=1e-6, periods=3, n=64, dt=1e-2, M=16):
    """Frequency fitted to ``eta_hat(k)(t)`` against ``sqrt(g k)``."""
    g = 1.0
    grid = spectral.Grid(1, n)
    state = config.preset(f"linear_wave({k}, {amp!r})", grid, g)
    settings = dno.StripSettings(M=M)
    omega = math.sqrt(g * k)
    steps = int(round(periods * 2 * math.pi / omega / dt))
    times, series = [0.0], [np.fft.rfft(state.eta)[k].real / (n / 2)]
    for _ in range(steps):
        state = dynamics.step(state, dt, settings)
        times.append(state.t)
        series.append(np.fft.rfft(state.eta)[k].real / (n / 2))
    times, series = np.array(times), np.array(series)
    # first guess from upward zero crossings, refined by least squares
    sign = np.signbit(series)
    cross = np.nonzero(sign[:-1] & ~sign[1:])[0]
    tc = times[cross] - series[cross] * dt / (series[cross + 1] - series[cross])
    guess = 2 * math.pi / np.mean(np.diff(tc)) if len(tc) > 1 else 1.0

    def model(t, A, B, w):
        return A * np.cos(w * t) + B * np.sin(w * t)

    (A, B, w), _ = curve_fit(model, times, series, p0=(amp, 0.0, guess))
    rel = abs(w - omega) / omega
    return CriterionResult(2, "linear dispersion", rel <= 1e-3, rel, "relative error <= 1e-3",
                           f"omega={w:.10f}, sqrt(gk)={omega:.10f}")


# ------------------------------------------------------------------ 3

def flat_dn(n=64):
    grid = spectral.Grid(1, n)
    x = grid.x[0]
    ctx = dno.make_context(grid, np.zeros_like(x), M=64, Z_b=10.0)
    err = float(np.abs(dno.dn_apply(ctx, np.cos(2 * x)) - 2 * np.cos(2 * x)).max())
    return CriterionResult(3, "flat DN exactness", err <= 1e-8, err, "sup error <= 1e-8")


# ------------------------------------------------------------------ 4

def dn_symmetry(trials=20, n=64, seed=4):
    rng = np.random.default_rng(seed)
    grid = spectral.Grid(1, n)
    worst_asym, worst_pos, worst_energy = 0.0, 0.0, 0.0
    for _ in range(trials):
        eta = _smooth_field(grid, rng, 6, 1.0)
        slope = np.abs(spectral.grad(grid, eta)).max()
        eta *= rng.uniform(0.05, 0.3) / slope
        f = _smooth_field(grid, rng, 10, 1.0, decay=1.5)
        h = _smooth_field(grid, rng, 10, 1.0, decay=1.5)
        ctx = dno.make_context(grid, eta)
        Gf, Gh = dno.dn_apply(ctx, f), dno.dn_apply(ctx, h)
        dx = grid.dx
        asym = abs(np.sum(Gf * h) - np.sum(f * Gh)) * dx
        scale = math.sqrt(np.sum(Gf**2) * np.sum(h**2)) * dx
        worst_asym = max(worst_asym, asym / scale)
        h1 = spectral.sobolev_norm(grid, f, 1.0) ** 2
        worst_pos = max(worst_pos, -float(np.sum(Gf * f) * dx) / h1)
        quad = float(np.sum(Gf * f) * dx)
        energy = dno.strip_energy(ctx, f)
        worst_energy = max(worst_energy, abs(quad - energy) / abs(quad))
    ok = worst_asym <= 1e-8 and worst_pos <= 1e-10 and worst_energy <= 1e-6
    return CriterionResult(4, "DN self-adjointness and positivity", ok, worst_asym,
                           "asymmetry <= 1e-8, <Gf,f> >= -1e-10|f|_H1^2, energy <= 1e-6",
                           f"worst -<Gf,f>/|f|_H1^2 {worst_pos:.1e}, energy mismatch {worst_energy:.1e}")


# ------------------------------------------------------------------ 5

def shape_derivative_order(trials=5, n=128, seed=5):
    rng = np.random.default_rng(seed)
    grid = spectral.Grid(1, n)
    eps = np.array([1e-3, 1e-4])
    orders = []
    for _ in range(trials):
        eta = _smooth_field(grid, rng, 5, 0.1)
        psi = _smooth_field(grid, rng, 6, 1.0)
        dh = _smooth_field(grid, rng, 5, 1.0)
        exact = dno.shape_derivative(dno.make_context(grid, eta), psi, dh)
        errs = []
        for e in eps:
            Gp = dno.dn_apply(dno.make_context(grid, eta + e * dh), psi)
            Gm = dno.dn_apply(dno.make_context(grid, eta - e * dh), psi)
            errs.append(np.abs((Gp - Gm) / (2 * e) - exact).max())
        orders.append(_order(errs, eps))
    worst = min(orders)
    return CriterionResult(5, "shape derivative", worst >= 1.9, worst, "order >= 1.9",
                           "orders " + ", ".join(f"{o:.2f}" for o in orders))


# ------------------------------------------------------------------ 6

def bony_exactness(pairs=50, n=128, seed=6):
    rng = np.random.default_rng(seed)
    grid = spectral.Grid(1, n)
    worst_bony, worst_lp = 0.0, 0.0
    for _ in range(pairs):
        a = rng.standard_normal(n)
        u = rng.standard_normal(n)
        parts = bony_decompose(grid, a, u)
        res = np.abs(a * u - (parts.Tau + parts.Tua + parts.R)).max()
        worst_bony = max(worst_bony, res / (EPS * np.abs(a).max() * np.abs(u).max()))
        blocks = spectral.lp_decompose(grid, u)
        rec = np.abs(u - np.sum(blocks.blocks, axis=0)).max()
        worst_lp = max(worst_lp, rec / (EPS * np.abs(u).max()))
    ok = worst_bony <= 1e3 and worst_lp <= 100
    return CriterionResult(6, "Bony exactness", ok, worst_bony,
                           "Bony residual <= 1e3 eps |a||u|, LP reconstruction <= 100 eps",
                           f"LP reconstruction {worst_lp:.1f} eps")


# ------------------------------------------------------------------ 7

def smoothing_kernel(n=1024, seed=7, samples=11):
    rng = np.random.default_rng(seed)
    grid = spectral.Grid(1, n)
    u = rng.standard_normal(n)
    rates = []
    for k in range(3, 8):
        block = spectral.lp_block(grid, u, k)
        ts = np.linspace(0.0, 5.0 * 2.0**-k, samples)
        logs = [math.log(spectral.lp_norm(grid, spectral.fourier_multiplier(
            grid, block, np.exp(-t * grid.kmag)), 2)) for t in ts]
        rates.append(-float(np.polyfit(ts * 2.0**k, logs, 1)[0]))
    worst = min(rates)
    return CriterionResult(7, "smoothing kernel", worst >= 0.5, worst, "fitted rate c >= 0.5",
                           "rates " + ", ".join(f"{r:.3f}" for r in rates))


# ------------------------------------------------------------------ 8

def paralinearization(n=256, seed=8):
    rng = np.random.default_rng(seed)
    grid = spectral.Grid(1, n)
    x = grid.x[0]
    ctx = dno.make_context(grid, 0.1 * np.cos(x))
    f = rng.standard_normal(n)
    bands = list(range(3, grid.k_max))
    ratios = []
    for j in bands:
        fj = spectral.lp_block(grid, f, j)
        R = dno.dn_paralinear_remainder(ctx, fj)
        ratios.append(np.linalg.norm(R) / np.linalg.norm(dno.dn_apply(ctx, fj)))
    slope = float(np.polyfit(bands, np.log2(np.maximum(ratios, 1e-300)), 1)[0])
    return CriterionResult(8, "paralinearization smoothing", slope <= -0.4, slope,
                           "band slope <= -0.4",
                           "ratios " + ", ".join(f"{r:.1e}" for r in ratios))


# ------------------------------------------------------------------ 9

def taylor_baseline(n=64):
    grid = spectral.Grid(1, n)
    x = grid.x[0]
    zero = np.zeros_like(x)
    rest = dynamics.pressure_solve(dynamics.SurfaceState(grid, 0.0, zero, zero))
    rest_err = max(float(np.abs(rest.a - 1.0).max()), float(abs(rest.dPdn.min() - 1.0)))
    amps = np.array([1e-2, 1e-3, 1e-4])
    devs = [float(np.abs(dynamics.pressure_solve(
        dynamics.SurfaceState(grid, 0.0, zero, e * np.cos(2 * x))).a - 1.0).max()) for e in amps]
    order = _order(devs, amps)
    ok = rest_err <= 1e-8 and order >= 1.9
    return CriterionResult(9, "hydrostatic and Taylor baseline", ok, order,
                           "rest a, TS = g within 1e-8; |a-g| order >= 1.9",
                           f"rest error {rest_err:.1e}, deviations " + ", ".join(f"{d:.2e}" for d in devs))


# ------------------------------------------------------------------ 10

def _reverse(state):
    return replace(state, psi=-state.psi)


def material_identities(n=64, steps=(2e-2, 1e-2, 5e-3)):
    """Central differences of ``B`` and ``a`` along the flow against the identities."""
    grid = spectral.Grid(1, n)
    x = grid.x[0]
    s0 = dynamics.SurfaceState(grid, 0.0, 0.1 * np.cos(x) + 0.02 * np.sin(2 * x),
                               0.1 * np.sin(x))
    ctx = dynamics.context(s0)
    bundle = dynamics.pressure_solve(s0, ctx)
    V, B = dno.traces_from(ctx, s0.psi, bundle.Gpsi)
    _, Da = dynamics.material_pressure_rate(s0, ctx, bundle)

    def traces_and_a(state):
        c = dynamics.context(state)
        b = dynamics.pressure_solve(state, c)
        return dno.traces_from(c, state.psi, b.Gpsi)[1], b.a

    errB, errA = [], []
    for dt in steps:
        fwd = dynamics.step(s0, dt)
        # time reversal: (eta, psi, t) -> (eta, -psi, -t)
        bwd = _reverse(dynamics.step(_reverse(s0), dt))
        Bf, af = traces_and_a(fwd)
        Bb, ab = traces_and_a(bwd)
        DB = (Bf - Bb) / (2 * dt) + np.sum(V * spectral.grad(grid, B), axis=0)
        Dat = (af - ab) / (2 * dt) + np.sum(V * spectral.grad(grid, bundle.a), axis=0)
        errB.append(np.abs(DB - (bundle.a - s0.g)).max())
        errA.append(np.abs(Dat - Da).max())
    oB, oA = _order(errB, steps), _order(errA, steps)
    worst = min(oB, oA)
    return CriterionResult(10, "material-derivative identities", worst >= 1.8, worst,
                           "order >= 1.8", f"B identity order {oB:.2f}, Da identity order {oA:.2f}")


# ------------------------------------------------------------------ 11

def steepening(T=4.0, n=128, M=32, dt=1e-3, stride=25):
    """Monotone trends of the curvature sup and of TS for steep_cosine(1, 0.35).

    ``T`` is only a cap: the run is expected to stop by resolution
    exhaustion, and the trends are asserted on every sample before it.
    """
    cfg = config.RunConfig(n=n, M=M, dt=dt, T=T, scenario="steep_cosine(1, 0.35)",
                           sample_stride=stride)
    with tempfile.TemporaryDirectory() as tmp:
        result = config_run(cfg, tmp)
    samples = [s for s, _ in result.report.rows]
    exhausted = result.termination == "resolution-exhausted"
    # the sample that triggered exhaustion is outside the resolved window
    window = samples[:-1] if exhausted else samples
    kap = np.array([s.kappa_lp + s.kappa_l2 for s in window])
    ts = np.array([s.ts_inf for s in window])
    inc = bool(np.all(np.diff(np.maximum.accumulate(kap)) > 0))
    dec = bool(np.all(np.diff(np.minimum.accumulate(ts)) < 0))
    ok = inc and dec and len(window) > 2 and exhausted and result.exit_code == 0
    return CriterionResult(11, "steepening trends", ok, float(len(window)),
                           "resolved samples, sup kappa strictly up and TS strictly down",
                           f"termination {result.termination} at t={result.state.t:.4g} "
                           f"({result.meta['detail']}), kappa {kap[0]:.3f}->{kap[-1]:.3f}, "
                           f"TS {ts[0]:.3f}->{ts[-1]:.4f}")


def config_run(cfg, out_dir):
    from .cli import run
    return run(cfg, out_dir)


CRITERIA = {
    1: energy_conservation,
    2: linear_dispersion,
    3: flat_dn,
    4: dn_symmetry,
    5: shape_derivative_order,
    6: bony_exactness,
    7: smoothing_kernel,
    8: paralinearization,
    9: taylor_baseline,
    10: material_identities,
    11: steepening,
}

SUITES = {
    "acceptance": tuple(CRITERIA),
    "all": tuple(CRITERIA),
    "quick": (2, 3, 4, 5, 6, 7, 8, 9, 10),
    "dn": (3, 4, 5, 8),
    "paradiff": (6, 7, 8),
    "dynamics": (1, 2, 9, 10, 11),
}


def run_suite(name):
    """Run a named suite, or a single criterion given as its number."""
    if name.isdigit() and int(name) in CRITERIA:
        numbers = (int(name),)
    elif name in SUITES:
        numbers = SUITES[name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or 1-{len(CRITERIA)}")
    return [CRITERIA[i]() for i in numbers]
