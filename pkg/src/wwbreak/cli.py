"""Command line: batch runs, acceptance suites and a norm calculator.

    wwbreak run --config run.cfg [--preset NAME] [--out DIR] [--sample-stride N]
    wwbreak check --suite NAME
    wwbreak norms --input snapshot.txt --besov s,p,q

Exit codes: 0 success, 1 failed check, 2 configuration, 3 solver,
4 blow-up, 5 I/O.
"""
import argparse
import dataclasses
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import breakdown, config, dno, dynamics, spectral
from .errors import (BlowUpDetected, ConfigError, DegenerateSymbolError, IllConditionedError,
                     SurfaceTooRoughError, SymmetrizerUndefinedError, WaterWaveError)

log = logging.getLogger("wwbreak")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4, 5

SNAPSHOT_MAGIC = "wwbreak-snapshot 1"


# ---------------------------------------------------------------- snapshots

def write_snapshot(path, state):
    """Grid header, then ``eta`` and ``psi`` rows at 17 significant digits."""
    grid = state.grid
    with open(path, "w") as fh:
        fh.write(SNAPSHOT_MAGIC + "\n")
        fh.write(f"d={grid.d} n={grid.n} L={grid.L!r} t={float(state.t)!r} g={float(state.g)!r}\n")
        for field in (state.eta, state.psi):
            fh.write(" ".join(f"{v:.17g}" for v in np.ravel(field)) + "\n")


def read_snapshot(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 4 or lines[0] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path} is not a snapshot file")
    head = dict(item.split("=", 1) for item in lines[1].split())
    grid = spectral.Grid(int(head["d"]), int(head["n"]), float(head["L"]))
    eta, psi = (np.array(line.split(), dtype=float).reshape(grid.shape) for line in lines[2:4])
    return dynamics.SurfaceState(grid, float(head["t"]), eta, psi, float(head["g"]))


# --------------------------------------------------------------------- run

def build_id():
    """SHA-1 over the package sources, in the spirit of a git tree hash."""
    h = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def spectral_tail(grid, u):
    """Fraction of the L2 norm of ``u`` in the top third of the retained modes."""
    uh = np.abs(grid.fft(u))
    kept = grid.dealias_mask
    kmax = float(np.max(grid.kmag[kept]))
    top = kept & (grid.kmag > 2 * kmax / 3)
    total = math.sqrt(float(np.sum(uh**2)))
    return 0.0 if total == 0 else math.sqrt(float(np.sum(uh[top] ** 2))) / total


@dataclasses.dataclass
class RunResult:
    exit_code: int
    termination: str
    report: breakdown.BreakdownReport
    state: dynamics.SurfaceState
    meta: dict


def strip_settings(cfg):
    return dno.StripSettings(M=cfg.M, Z_b=cfg.Z_b, delta_hint=cfg.delta_hint, tol=cfg.solver_tol)


def _sample(state, settings, cfg):
    ctx = dynamics.context(state, settings)
    bundle = dynamics.pressure_solve(state, ctx)
    return breakdown.monitor_sample(state, ctx, bundle, cfg.p, cfg.s)


def run(cfg, out_dir=None, sample_stride=None):
    """Advance the configured scenario, writing the report, metadata and snapshots.

    Returns a :class:`RunResult`; the report file is flushed row by row so an
    interrupted run leaves a well-formed prefix.
    """
    out = Path(out_dir if out_dir is not None else cfg.out)
    stride = sample_stride or cfg.sample_stride
    grid = config.make_grid(cfg)
    settings = strip_settings(cfg)
    state = config.preset(cfg.scenario, grid, cfg.g)
    filt = 36.0 if cfg.filter else None
    out.mkdir(parents=True, exist_ok=True)

    report = breakdown.new_report(cfg.d, cfg.p, cfg.s)
    meta = {"config": dataclasses.asdict(cfg), "build_id": build_id(), "sample_stride": stride}
    termination, code, detail = "normal", EXIT_OK, None
    H0 = dynamics.energy(state, settings=settings)
    steps = cfg.steps
    unstable = dynamics.cfl_number(state, cfg.dt) > dynamics.CFL_LIMIT
    start = time.perf_counter()
    done = 0
    with open(out / "report.csv", "w", newline="") as sink:
        writer = breakdown.ReportWriter(sink)

        def record(s):
            nonlocal report
            sample = _sample(s, settings, cfg)
            report = breakdown.accumulate(report, sample)
            writer.write(sample, report.M_T)

        try:
            write_snapshot(out / "snapshot_000000.txt", state)
            record(state)
            for i in range(1, steps + 1):
                state = dynamics.step(state, cfg.dt, settings, cfg.dealias, filt)
                done = i
                if cfg.snapshot_stride and i % cfg.snapshot_stride == 0:
                    write_snapshot(out / f"snapshot_{i:06d}.txt", state)
                tail = max(spectral_tail(grid, state.eta), spectral_tail(grid, state.psi))
                if tail > cfg.tail_tol:
                    record(state)
                    termination = "resolution-exhausted"
                    detail = f"spectral tail {tail:.3g} above {cfg.tail_tol:g} at t={state.t:.6g}"
                    break
                if i % stride == 0 or i == steps:
                    record(state)
        except BlowUpDetected as exc:
            termination, code, detail = "blow-up-detected", EXIT_BLOWUP, str(exc)
            meta["blow_up_time"] = exc.t
        except (SymmetrizerUndefinedError, SurfaceTooRoughError, DegenerateSymbolError,
                IllConditionedError) as exc:
            if unstable or not state.is_finite:
                # the integrator is outside its stability region: the
                # solver failure is a symptom of blow-up
                termination, code, detail = "blow-up-detected", EXIT_BLOWUP, str(exc)
                meta["blow_up_time"] = float(state.t)
            elif isinstance(exc, IllConditionedError):
                termination, code, detail = "resolution-exhausted", EXIT_SOLVER, str(exc)
            else:
                termination, detail = "resolution-exhausted", str(exc)
    report = report.terminated(termination)
    elapsed = time.perf_counter() - start

    drift = None
    if code == EXIT_OK:
        write_snapshot(out / "snapshot_final.txt", state)
        if H0 > 0:
            drift = (dynamics.energy(state, settings=settings) - H0) / H0
            if abs(drift) > cfg.tol_E and termination == "normal":
                log.warning("relative energy drift %.3g exceeds tol_E=%g", drift, cfg.tol_E)
    meta.update({
        "termination": termination,
        "detail": detail,
        "exit_code": code,
        "steps": done,
        "t_final": float(state.t),
        "wall_clock_s": elapsed,
        "energy_initial": H0,
        "energy_drift": drift,
        "M_T": report.M_T,
        "TS": report.TS if math.isfinite(report.TS) else None,
    })
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return RunResult(code, termination, report, state, meta)


# --------------------------------------------------------------------- main

def _cmd_run(args):
    overrides = {}
    if args.preset:
        overrides["scenario"] = args.preset
    if args.sample_stride is not None:
        overrides["sample_stride"] = args.sample_stride
    try:
        cfg = config.load_config(args.config)
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run(cfg, args.out)
    print(f"termination={result.termination} t={result.state.t:.6g} M_T={result.report.M_T:.6g} "
          f"TS={result.report.TS:.6g}")
    if result.meta.get("detail"):
        print(result.meta["detail"], file=sys.stderr)
    return result.exit_code


def _cmd_check(args):
    from . import acceptance
    try:
        results = acceptance.run_suite(args.suite)
    except KeyError as exc:
        print(f"config error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def _cmd_norms(args):
    try:
        s, p, q = (float(v) for v in args.besov.split(","))
    except ValueError:
        print(f"config error: --besov expects s,p,q, got {args.besov!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        state = read_snapshot(args.input)
    except (ValueError, KeyError) as exc:
        print(f"I/O error: cannot parse {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    for name, field in (("eta", state.eta), ("psi", state.psi)):
        val = spectral.besov_norm(state.grid, field, s, p, q)
        print(f"{name} B^{s:g}_{p:g},{q:g} = {val!r}")
    return EXIT_OK


def parser():
    ap = argparse.ArgumentParser(prog="wwbreak", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a simulation with the break-down monitor")
    r.add_argument("--config", required=True)
    r.add_argument("--preset")
    r.add_argument("--out")
    r.add_argument("--sample-stride", type=int)
    r.set_defaults(func=_cmd_run)
    c = sub.add_parser("check", help="run an acceptance suite")
    c.add_argument("--suite", required=True)
    c.set_defaults(func=_cmd_check)
    n = sub.add_parser("norms", help="Besov norms of a saved snapshot")
    n.add_argument("--input", required=True)
    n.add_argument("--besov", required=True)
    n.set_defaults(func=_cmd_norms)
    return ap


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpDetected as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except WaterWaveError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
