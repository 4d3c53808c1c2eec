"""Acceptance criteria; each test prints one PASS/FAIL line."""

import cmath
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from phonon_pairs import bogoliubov as bg
from phonon_pairs.bogoliubov import BogoliubovCoefficients
from phonon_pairs.cli import FIG3_RANGE, shipped_config
from phonon_pairs.closed_forms import analytic_collision_beta, analytic_expansion_beta, sudden_quench_beta
from phonon_pairs.entanglement import (
    ThermalOccupation,
    basis_change,
    closed_form_pt_eigenvalues,
    entanglement_of_formation,
    evolve_covariance,
    is_entangled,
    perturbative_state,
    pt_symplectic_eigenvalues,
    squeeze_transform,
    thermal_covariance,
)
from phonon_pairs.scale import CollisionModel, ExpansionModel
from phonon_pairs.scenario import SweepSpec, run_scenario, run_sweep
from phonon_pairs.trap import MG25, TrapConfig, solve_equilibrium

TWO_PI = 2 * math.pi
W_AX = TWO_PI * 0.2e6
W_RAD = TWO_PI * 3.5e6
W_IN = math.sqrt(W_RAD**2 - W_AX**2)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_equilibrium_distance():
    t = time.perf_counter()
    dx = solve_equilibrium(TrapConfig(MG25, 2, W_RAD, W_AX)).separation
    dt = time.perf_counter() - t
    report(1, abs(dx - 19.1e-6) <= 0.2e-6 and dt < 1, f"dx_eq = {dx * 1e6:.4f} um (19.1 +- 0.2), {dt:.3g} s (< 1 s)")


def test_criterion_2_headline_phonon_number():
    t = time.perf_counter()
    r = run_scenario(shipped_config())
    dt = time.perf_counter() - t
    num, est = r.beta_sq_numeric, r.p1p2_beta_sq
    ok = 0.15 <= num <= 0.21 and 0.15 <= est <= 0.25 and dt < 5
    report(2, ok, f"numeric |beta-|^2 = {num:.4f} in [0.15, 0.21]; p1p2 = {est:.4f} in [0.15, 0.25]; {dt:.3g} s (< 5 s)")


def test_criterion_3_collision_oracle():
    t = time.perf_counter()
    worst = 0.0
    for d in np.linspace(0.3, 0.9, 5):
        for w in np.linspace(0.02, 0.2, 5):
            m = CollisionModel((d * W_IN) ** 2, w * W_IN, W_AX)
            num = abs(bg.model_bogoliubov(m, W_RAD).beta) ** 2
            exact = analytic_collision_beta(m, W_RAD)
            worst = max(worst, abs(num / exact - 1))
    dt = time.perf_counter() - t
    report(3, worst < 1e-5 and dt < 30, f"worst relative error {worst:.2e} (< 1e-5) over 5x5 grid, {dt:.3g} s (< 30 s)")


def test_criterion_4_expansion_oracle():
    w_rad = 1.2 * W_AX  # weak radial confinement so that |dOmega_ex| reaches 0.9 Omega_in
    w_in = math.sqrt(w_rad**2 - W_AX**2)
    worst = 0.0
    for sign in (1, -1):
        for d in np.linspace(0.3, 0.9, 5):
            for w in np.linspace(0.02, 0.2, 5):
                m = ExpansionModel(sign * (d * w_in) ** 2, w * w_in, W_AX)
                num = abs(bg.model_bogoliubov(m, w_rad).beta) ** 2
                worst = max(worst, abs(num / analytic_expansion_beta(m, w_in) - 1))
    sudden = 0.0
    for dsq in (2.0, -0.75):
        for ratio in (100, 300, 1000):
            m = ExpansionModel(dsq * w_in**2, ratio * w_in, W_AX)
            w_out = math.sqrt(w_in**2 + m.delta_omega_ex_sq)
            num = abs(bg.model_bogoliubov(m, w_rad).beta) ** 2
            sudden = max(sudden, abs(num / sudden_quench_beta(w_in, w_out) - 1))
    ok = worst < 1e-5 and sudden < 0.01
    report(4, ok, f"grid worst {worst:.2e} (< 1e-5, both signs); sudden limit worst {sudden:.2e} (< 1e-2) at w_ex/W_in = 100..1000")


def test_criterion_5_wkb_slope():
    d = 0.5 * W_IN
    rates = np.linspace(0.02, 0.06, 10) * W_IN
    logs = [math.log(abs(bg.model_bogoliubov(CollisionModel(d**2, w, W_AX), W_RAD).beta) ** 2) for w in rates]
    slope = np.polyfit((W_IN - d) / rates, logs, 1)[0]
    report(5, abs(slope / (-2 * math.pi) - 1) <= 0.05, f"slope {slope:.5f} vs -2 pi = {-2 * math.pi:.5f} (+- 5%)")


def test_criterion_6_fig3_sweep():
    t = time.perf_counter()
    table = run_sweep(shipped_config(), SweepSpec.from_range("pulse.omega_ax_max", FIG3_RANGE))
    dt = time.perf_counter() - t
    ratios, values, errors = [], [], []
    for row in table.rows:
        if row["error"]:
            errors.append(f"{row['value']:.3g} MHz")
            continue
        values.append(row["beta_sq_numeric"])
        ratios.append(row["beta_sq_numeric"] / row["beta_sq_p1p2"])
    within = all(1 / 3 <= q <= 3 for q in ratios) and not errors
    span = math.log10(max(values) / min(values)) if values else 0.0
    ratio_txt = ", ".join(f"{q:.3g}" for q in ratios)
    ok = within and span >= 3 and dt < 60
    report(6, ok, f"numeric/p1p2 = [{ratio_txt}] (each in [1/3, 3]); failed rows {errors}; span {span:.2f} decades (>= 3); {dt:.3g} s (< 60 s)")


def _random_corpus(rng):
    # collisions, expansions and pulse scenarios with randomized parameters
    for _ in range(40):
        d, w = rng.uniform(0.05, 0.95), rng.uniform(0.02, 0.5)
        yield "collision", bg.model_bogoliubov(CollisionModel((d * W_IN) ** 2, w * W_IN, W_AX), W_RAD)
    w_rad = 1.2 * W_AX
    w_in = math.sqrt(w_rad**2 - W_AX**2)
    for _ in range(30):
        d, w = rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.5)
        yield "expansion", bg.model_bogoliubov(ExpansionModel(rng.choice([-1, 1]) * (d * w_in) ** 2, w * w_in, W_AX), w_rad)
    base = shipped_config()
    for _ in range(30):
        s = base.with_value("pulse.omega_ax_max", TWO_PI * rng.uniform(0.3, 0.75) * 1e6)
        s = s.with_value("pulse.ramp", rng.uniform(0.3, 1.0) * 1e-6)
        s = s.with_value("pulse.hold", rng.uniform(0.1, 1.0) * 1e-6)
        for m in run_scenario(s).modes:
            yield "pulse", BogoliubovCoefficients(m.alpha, m.beta)


def test_criterion_7_normalisation_corpus():
    errs = [c.normalization_error for _, c in _random_corpus(np.random.default_rng(2024))]
    worst = max(errs)
    report(7, len(errs) >= 100 and worst < 1e-8, f"{len(errs)} extractions, worst ||alpha|^2 - |beta|^2 - 1| = {worst:.2e} (< 1e-8)")


def test_criterion_8_symplectic_closed_form():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(2000):
        n_plus, n_minus, r = rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 3)
        pa, pb = rng.uniform(-math.pi, math.pi, 2)
        coeffs = BogoliubovCoefficients(math.cosh(r) * cmath.exp(1j * pa), math.sinh(r) * cmath.exp(1j * pb))
        occ = ThermalOccupation(n_plus, n_minus)
        sigma = basis_change(evolve_covariance(thermal_covariance(occ), squeeze_transform(coeffs)))
        lam = np.array(pt_symplectic_eigenvalues(sigma))
        worst = max(worst, np.max(np.abs(lam / np.array(closed_form_pt_eigenvalues(occ, r)) - 1)))
    boundary = 0.0
    for _ in range(500):
        n_plus, n_minus = rng.uniform(0, 5, 2)
        r = 0.5 * math.log((1 + 2 * n_plus) * (1 + 2 * n_minus))
        occ = ThermalOccupation(n_plus, n_minus)
        sigma = evolve_covariance(thermal_covariance(occ), squeeze_transform(BogoliubovCoefficients(math.cosh(r), math.sinh(r))))
        margin = is_entangled(sigma)[1]
        closed = math.sqrt((1 + 2 * n_minus) * (1 + 2 * n_plus)) * math.exp(-r)
        boundary = max(boundary, abs(margin), abs(closed - 1))
    ok = worst < 1e-10 and boundary < 1e-10
    report(8, ok, f"eigenvalue relative error {worst:.2e} (< 1e-10, 2000 states); boundary deviation {boundary:.2e} (< 1e-10)")


def test_criterion_9_entanglement_of_formation():
    grid = np.linspace(1e-6, 0.5 - 1e-9, 20001)
    vals = np.array([entanglement_of_formation(x) for x in grid])
    decreasing = bool(np.all(np.diff(vals) < 0))
    direct = (0.75**2 / 0.5) * math.log(0.75**2 / 0.5) - (0.25**2 / 0.5) * math.log(0.25**2 / 0.5)
    err = abs(entanglement_of_formation(0.25) - direct)
    ok = entanglement_of_formation(0.5) == 0 and decreasing and err < 1e-12
    report(9, ok, f"E_F(1/2) = {entanglement_of_formation(0.5)}; strictly decreasing: {decreasing}; |E_F(0.25) - direct| = {err:.1e} (< 1e-12)")


def test_criterion_10_small_parameter_criterion():
    rng = np.random.default_rng(10)
    samples = [(n, x) for n in np.linspace(0, 0.05, 201) for x in np.linspace(0, 0.1, 201)]
    samples += list(zip(rng.uniform(0, 0.05, 20000), rng.uniform(0, 0.1, 20000)))
    widest, disagreements = 0.0, 0
    for n_th, xi in samples:
        if not perturbative_state(n_th, xi).agrees:
            disagreements += 1
            widest = max(widest, abs(xi - n_th) / n_th)
    report(10, widest <= 0.15, f"{disagreements} disagreements in {len(samples)} samples, widest band |xi| - n_th = {widest:.4f} n_th (<= 0.15 n_th)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
