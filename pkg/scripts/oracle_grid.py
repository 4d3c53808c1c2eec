"""Relative error of numerical collision and expansion |beta|^2 against the closed forms."""

import math

import numpy as np

from phonon_pairs.bogoliubov import model_bogoliubov
from phonon_pairs.closed_forms import analytic_collision_beta, analytic_expansion_beta
from phonon_pairs.scale import CollisionModel, ExpansionModel

TWO_PI = 2 * math.pi
W_AX = TWO_PI * 0.2e6
DEPTHS = np.linspace(0.3, 0.9, 5)
RATES = np.linspace(0.02, 0.2, 5)


def grid(label, make, exact, w_rad):
    print(label)
    print("  dW/W_in \\ w/W_in " + " ".join(f"{w:9.3f}" for w in RATES))
    for d in DEPTHS:
        errs = []
        for w in RATES:
            m = make(d, w)
            num = abs(model_bogoliubov(m, w_rad).beta) ** 2
            errs.append(abs(num / exact(m) - 1))
        print(f"  {d:16.2f} " + " ".join(f"{e:9.1e}" for e in errs))


def main():
    w_rad = TWO_PI * 3.5e6
    w_in = math.sqrt(w_rad**2 - W_AX**2)
    grid("collision", lambda d, w: CollisionModel((d * w_in) ** 2, w * w_in, W_AX), lambda m: analytic_collision_beta(m, w_rad), w_rad)
    w_rad = 1.2 * W_AX
    w_in = math.sqrt(w_rad**2 - W_AX**2)
    for sign, name in ((1, "expansion (dW^2 > 0)"), (-1, "expansion (dW^2 < 0)")):
        grid(name, lambda d, w: ExpansionModel(sign * (d * w_in) ** 2, w * w_in, W_AX), lambda m: analytic_expansion_beta(m, w_in), w_rad)


if __name__ == "__main__":
    main()
