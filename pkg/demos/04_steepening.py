"""Monitoring a steepening crest.

A cosine whose crest is pushed upward steepens: the curvature grows and
the Taylor coefficient -dP/dn drops.  The monitor records both, along with
the running break-down quantity M(T).
"""
import tempfile

from wwbreak import config
from wwbreak.cli import run

cfg = config.RunConfig(n=128, M=32, dt=1e-3, T=1.0, scenario="steep_cosine(1, 0.35)",
                       sample_stride=100)
with tempfile.TemporaryDirectory() as out:
    result = run(cfg, out)

print(f"{'t':>5} {'kappa_L3':>9} {'kappa_L2':>9} {'TS':>7} {'M(T)':>9}")
for sample, m_t in result.report.rows:
    print(f"{sample.t:5.2f} {sample.kappa_lp:9.4f} {sample.kappa_l2:9.4f} "
          f"{sample.ts_inf:7.4f} {m_t:9.4f}")
print("termination:", result.termination)
