"""Splitting a vibration recording into trend + seasonal + residual.

The shaft turns at a fixed rate, so its contribution to the signal repeats
every revolution: that is the seasonal part.  Slow drift lands in the
trend.  What is left — the residual — is where fault-induced impacts live.
This script synthesizes one healthy and one faulty recording, runs the
additive decomposition, and shows where the energy goes.
"""

import numpy as np

from tdafault.data import CLASS_ORDER, FAULT_CLASSES, SynthConfig, gen_recording
from tdafault.decompose import decompose_additive, estimate_period

cfg = SynthConfig(sample_rate_hz=4096.0, duration_s=2.0, noise_sigma=0.05, seed=1)
by_name = {fc.name: fc for fc in FAULT_CLASSES}


def rms(v):
    return float(np.sqrt(np.mean(np.square(v))))


print(f"sample rate {cfg.sample_rate_hz:.0f} Hz, snapped shaft rate "
      f"{cfg.shaft_hz:.2f} Hz\n")
print(f"{'class':<12} {'period':>6} {'rms trend':>10} {'rms seasonal':>13} "
      f"{'rms residual':>13}")

for name in ("Normal_1", "IR_007_1", "IR_021_1", "OR_014_6_1"):
    ts = gen_recording(by_name[name], cfg, rec_idx=0)
    period = estimate_period(ts, hint_hz=cfg.shaft_hz)
    parts = decompose_additive(ts, period)
    lo, hi = parts.valid_range
    print(f"{name:<12} {period:>6} {rms(parts.trend[lo:hi]):>10.3f} "
          f"{rms(parts.seasonal):>13.3f} {rms(parts.residual[lo:hi]):>13.3f}")

print(
    "\nHealthy recordings leave almost nothing in the residual: the shaft\n"
    "tone is periodic and the seasonal channel absorbs it.  Defect impacts\n"
    "are NOT locked to the revolution period, so they survive into the\n"
    "residual — and grow with defect severity (compare IR_007 vs IR_021).\n"
    "The reconstruction trend + seasonal + residual equals the input exactly."
)

ts = gen_recording(by_name["Ball_014_1"], cfg, rec_idx=0)
parts = decompose_additive(ts, estimate_period(ts, hint_hz=cfg.shaft_hz))
err = np.max(np.abs(parts.trend + parts.seasonal + parts.residual - ts.samples))
print(f"max reconstruction error on Ball_014_1: {err:.2e}")
