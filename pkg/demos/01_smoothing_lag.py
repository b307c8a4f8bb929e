"""How the Hull-style constructions trade smoothing against lag.

A plain moving average delays everything it smooths.  The Hull trick —
take a short and a long average, push past the signal with 2*short - long,
then smooth the overshoot — keeps most of the noise rejection while giving
back most of the delay.  This script measures that on a noisy ramp, where
lag shows up directly as the gap between filter output and the true line.
"""

import numpy as np

from tdafault.movavg import MaConfig, ema, hema, hma, wma

rng = np.random.default_rng(0)
n = 400
ramp = 0.25 * np.arange(n)
noisy = ramp + rng.normal(0.0, 2.0, n)

WINDOW = 16
cfg = MaConfig(window=WINDOW)

candidates = {
    f"WMA({WINDOW})": wma(noisy, WINDOW),
    f"EMA(alpha=2/{WINDOW + 1})": ema(noisy, 2.0 / (WINDOW + 1)),
    f"HMA({WINDOW})": hma(noisy, cfg),
    f"HEMA({WINDOW})": hema(noisy, cfg),
}

print(f"noisy ramp, slope 0.25, sigma 2.0, window {WINDOW}\n")
print(f"{'filter':<18} {'lag (samples)':>14} {'residual rms':>14}")
for name, out in candidates.items():
    steady = slice(max(out.valid_from, 100), n)
    # on a ramp, (true - output) / slope is the delay in samples
    lag = np.mean(ramp[steady] - out.values[steady]) / 0.25
    resid = np.sqrt(np.mean((out.values[steady] - ramp[steady] + lag * 0.25) ** 2))
    print(f"{name:<18} {lag:>14.2f} {resid:>14.2f}")

print(
    "\nThe staged constructions cut the delay to a fraction of their window\n"
    "while still averaging noise over it; that low lag is what makes them\n"
    "usable as per-window trend references for fault features."
)
