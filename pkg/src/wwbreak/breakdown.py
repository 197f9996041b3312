"""Break-down monitor: curvature, trace gradients, Taylor sign, energies.

Each accepted state produces a :class:`MonitorSample`.  Samples are folded
into a :class:`BreakdownReport`, which keeps the running quantity

    M(T) = sup_t (||kappa||_{L^p} + ||kappa||_{L^2}) + int_0^T ||(grad V, grad B)||_inf^6 dt

(time integral by the trapezoid rule over sample times) and the running
minimum TS of the Taylor coefficient ``-dP/dn``.
"""
import csv
from dataclasses import dataclass, fields, replace
import math
import os

import numpy as np

from . import dno, spectral
from .errors import BlowUpDetected, OrderingError, SymmetrizerUndefinedError
from .paradiff import SymbolTable, paradiff_apply, paraproduct

COLUMNS = ("t", "kappa_lp", "kappa_l2", "grad_trace_sup", "ts_inf", "es", "e0",
           "u_s_l2", "theta_s_l2", "m_t_running")

TERMINATIONS = ("normal", "blow-up-detected", "resolution-exhausted")


def default_p(d):
    return 2 * d + 1


def default_s(d):
    return 2.5 if d == 1 else 2.25


def check_exponents(d, p, s):
    if not p > 2 * d:
        raise ValueError(f"p = {p} must satisfy p > 2d = {2 * d}")
    if not s > 1 + d / 2:
        raise ValueError(f"s = {s} must satisfy s > 1 + d/2 = {1 + d / 2}")


def curvature(grid, eta):
    """Mean curvature ``div(grad eta / sqrt(1 + |grad eta|^2))``, dealiased."""
    geta = spectral.grad(grid, eta)
    flux = geta / np.sqrt(1.0 + np.sum(geta**2, axis=0))
    return spectral.dealias(grid, spectral.div(grid, flux))


@dataclass(frozen=True)
class MonitorSample:
    t: float
    kappa_lp: float
    kappa_l2: float
    grad_trace_sup: float
    ts_inf: float
    es: float
    e0: float
    u_s_l2: float
    theta_s_l2: float

    @property
    def good_unknown_norms(self):
        return self.u_s_l2, self.theta_s_l2

    def is_finite(self):
        return all(math.isfinite(getattr(self, f.name)) for f in fields(self))


@dataclass(frozen=True)
class BreakdownReport:
    """Time-ordered samples and the running break-down quantities.

    ``rows`` pairs each sample with the value of M(T) at its time.
    """

    p: float
    s: float
    d: int = 1
    rows: tuple = ()
    sup_kappa: float = 0.0
    integral: float = 0.0
    TS: float = math.inf
    termination: str = "normal"

    def __post_init__(self):
        check_exponents(self.d, self.p, self.s)
        if self.termination not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.termination!r}")

    @property
    def samples(self):
        return tuple(sample for sample, _ in self.rows)

    @property
    def M_T(self):
        return self.sup_kappa + self.integral

    def terminated(self, cause):
        return replace(self, termination=cause)


def new_report(d, p=None, s=None):
    return BreakdownReport(p=default_p(d) if p is None else p,
                           s=default_s(d) if s is None else s, d=d)


def accumulate(report, sample, dt=None):
    """Fold one sample into the report.

    The trapezoid interval defaults to the gap between consecutive sample
    times, so strided sampling integrates over the true elapsed time; an
    explicit ``dt`` overrides it.
    """
    if not sample.is_finite():
        raise BlowUpDetected(f"non-finite monitor sample at t={sample.t:.6g}", t=sample.t)
    sup_kappa = max(report.sup_kappa, sample.kappa_lp + sample.kappa_l2)
    integral = report.integral
    if report.rows:
        last = report.rows[-1][0]
        if sample.t < last.t:
            raise OrderingError(f"sample at t={sample.t!r} precedes t={last.t!r}")
        width = sample.t - last.t if dt is None else dt
        integral += 0.5 * (last.grad_trace_sup**6 + sample.grad_trace_sup**6) * width
    TS = min(report.TS, sample.ts_inf)
    m_t = sup_kappa + integral
    return replace(report, rows=report.rows + ((sample, m_t),), sup_kappa=sup_kappa,
                   integral=integral, TS=TS)


def _sobolev_vec(grid, u, s):
    u = np.asarray(u)
    if u.ndim == grid.d:
        return spectral.sobolev_norm(grid, u, s)
    return math.sqrt(sum(spectral.sobolev_norm(grid, c, s) ** 2 for c in u))


def _l2_vec(grid, u):
    u = np.asarray(u)
    if u.ndim == grid.d:
        return spectral.lp_norm(grid, u, 2)
    return math.sqrt(sum(spectral.lp_norm(grid, c, 2) ** 2 for c in u))


def sobolev_energy(grid, eta, psi, V, B, s):
    """``E_s = ||(eta, psi)||_{H^{s+1/2}} + ||(V, B)||_{H^s}``; pairs in the Euclidean norm."""
    first = math.hypot(spectral.sobolev_norm(grid, eta, s + 0.5),
                       spectral.sobolev_norm(grid, psi, s + 0.5))
    second = math.hypot(_sobolev_vec(grid, V, s), spectral.sobolev_norm(grid, B, s))
    return first + second


def symmetrizer_q(ctx, a):
    """``q = sqrt(a / lambda)`` on the principal branch; zero where ``|xi| < 1/2``."""
    grid = ctx.grid
    a = np.asarray(a, dtype=float)
    if not np.all(a > 0):
        idx = np.unravel_index(np.argmin(a), a.shape)
        raise SymmetrizerUndefinedError(
            f"Taylor coefficient not positive (min {a[idx]:.3g})",
            a_min=float(a[idx]), location=tuple(int(i) for i in idx))
    lam = ctx.lam.samples
    far = np.broadcast_to(grid.kmag >= 0.5, lam.shape)
    a_b = a.reshape(grid.shape + (1,) * grid.d)
    q = np.zeros_like(lam)
    np.divide(a_b, lam, out=q, where=far)
    q = np.where(far, np.sqrt(q), 0.0)
    return SymbolTable(grid, -0.5, q)


def good_unknowns(state, ctx, bundle, s):
    """``(U_s, zeta_s, theta_s)`` with ``zeta = grad eta``.

    ``U_s = <D>^s V + T_zeta <D>^s B`` and ``theta_s = T_q zeta_s`` with the
    symmetrizer ``q = sqrt(a / lambda)``.
    """
    grid = state.grid
    V, B = dno.traces_from(ctx, state.psi, bundle.Gpsi)
    zeta = ctx.grad_eta
    Bs = spectral.bracket_d(grid, B, s)
    U = np.array([spectral.bracket_d(grid, V[j], s) + paraproduct(grid, zeta[j], Bs)
                  for j in range(grid.d)])
    zeta_s = spectral.bracket_d(grid, zeta, s)
    q = symmetrizer_q(ctx, bundle.a)
    theta = np.array([paradiff_apply(q, zeta_s[j]) for j in range(grid.d)])
    return U, zeta_s, theta


def monitor_sample(state, ctx, bundle, p, s):
    """All monitor quantities at one time level."""
    grid = state.grid
    if not state.is_finite:
        raise BlowUpDetected(f"non-finite state at t={state.t:.6g}", t=state.t)
    kappa = curvature(grid, state.eta)
    V, B = dno.traces_from(ctx, state.psi, bundle.Gpsi)
    grads = np.concatenate([spectral.grad(grid, V).reshape((-1,) + grid.shape),
                            spectral.grad(grid, B)], axis=0)
    e0_sq = float(np.sum(state.psi * bundle.Gpsi) * grid.dx**grid.d)
    U, _, theta = good_unknowns(state, ctx, bundle, s)
    sample = MonitorSample(
        t=float(state.t),
        kappa_lp=spectral.lp_norm(grid, kappa, p),
        kappa_l2=spectral.lp_norm(grid, kappa, 2),
        grad_trace_sup=float(np.max(np.abs(grads))),
        ts_inf=float(np.min(bundle.dPdn)),
        es=sobolev_energy(grid, state.eta, state.psi, V, B, s),
        e0=math.sqrt(max(0.0, e0_sq)),
        u_s_l2=_l2_vec(grid, U),
        theta_s_l2=_l2_vec(grid, theta),
    )
    if not sample.is_finite():
        raise BlowUpDetected(f"non-finite monitor sample at t={state.t:.6g}", t=state.t)
    return sample


# ------------------------------------------------------------ serialization

def _row(sample, m_t):
    vals = [getattr(sample, c) for c in COLUMNS[:-1]] + [m_t]
    return [repr(float(v)) for v in vals]


class ReportWriter:
    """Appends rows to an open CSV sink, flushing after each so that a
    partial file is always well formed."""

    def __init__(self, sink):
        self.sink = sink
        self.writer = csv.writer(sink, lineterminator="\n")
        self.writer.writerow(COLUMNS)
        sink.flush()

    def write(self, sample, m_t):
        self.writer.writerow(_row(sample, m_t))
        self.sink.flush()


def emit(report, sink):
    """Write the whole report as CSV to a path or a text stream."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", newline="") as fh:
            return emit(report, fh)
    writer = ReportWriter(sink)
    for sample, m_t in report.rows:
        writer.write(sample, m_t)


def read_report(source):
    """Rows of a CSV report as ``(MonitorSample, m_t)`` pairs."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_report(fh)
    reader = csv.reader(source)
    header = tuple(next(reader))
    if header != COLUMNS:
        raise ValueError(f"unexpected report header {header}")
    rows = []
    for rec in reader:
        vals = [float(v) for v in rec]
        rows.append((MonitorSample(*vals[:-1]), vals[-1]))
    return rows
