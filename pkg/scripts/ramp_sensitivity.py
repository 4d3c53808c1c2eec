"""Sensitivity of the headline |beta-|^2 to the unspecified ramp shape, ramp time and peak."""

import dataclasses
import math

import numpy as np

from phonon_pairs.cli import shipped_config
from phonon_pairs.scale import TabulatedWaveform
from phonon_pairs.scenario import run_scenario

TWO_PI = 2 * math.pi
SHAPES = {
    "cosine": lambda s: (1 - np.cos(np.pi * s)) / 2,
    "linear": lambda s: s,
    "smoothstep": lambda s: s * s * (3 - 2 * s),
}


def shaped_pulse(shape, base, peak, ramp=0.5e-6, hold=0.5e-6, on_square=True, n=4001):
    # ramp either omega_ax^2 or omega_ax with the given profile, sampled densely
    t = np.linspace(-0.1e-6, 2 * ramp + hold + 0.1e-6, n)
    up = np.clip(t / ramp, 0, 1)
    down = np.clip((t - ramp - hold) / ramp, 0, 1)
    s = SHAPES[shape](up) - SHAPES[shape](down)
    if on_square:
        return TabulatedWaveform(t, base**2 + (peak**2 - base**2) * s)
    return TabulatedWaveform(t, (base + (peak - base) * s) ** 2)


def show(label, r):
    print(f"{label:<34} numeric {r.beta_sq_numeric:8.4f}   p1p2 {r.p1p2_beta_sq:8.4f}   b_min {r.b_min[1]:.4f}")


def main():
    s = shipped_config()
    base, peak = s.trap.omega_ax_in, s.drive.plateau
    show("canonical (cosine on w^2)", run_scenario(s))
    for shape in SHAPES:
        for on_square in (True, False):
            wf = shaped_pulse(shape, base, peak, on_square=on_square)
            label = f"{shape} on {'w^2' if on_square else 'w'} (tabulated)"
            show(label, run_scenario(dataclasses.replace(s, drive_kind="tabulated", drive=wf)))
    for ramp in (0.4, 0.45, 0.55, 0.6):
        show(f"ramp {ramp} us", run_scenario(s.with_value("pulse.ramp", ramp * 1e-6)))
    for f in (0.68, 0.69, 0.71, 0.72, 0.73):
        show(f"peak {f} MHz", run_scenario(s.with_value("pulse.omega_ax_max", TWO_PI * f * 1e6)))


if __name__ == "__main__":
    main()
