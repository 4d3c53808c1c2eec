"""Closed-form and approximate Bogoliubov coefficients for the scale models."""

from __future__ import annotations

import math

import numpy as np

from .scale import CollisionModel, ExpansionModel

__all__ = [
    "log_analytic_collision_beta",
    "analytic_collision_beta",
    "analytic_expansion_beta",
    "sudden_quench_beta",
    "p1p2_parameters",
    "p1p2_collision_model",
    "p1p2_beta",
    "higher_mode_exponent",
    "higher_mode_exponents",
    "RegimeError",
]


class RegimeError(ValueError):
    """Inputs are outside the regime an approximation is defined for."""


def _log_sinh(x: float) -> float:
    # log(sinh x) for x > 0 without overflow
    return x + math.log1p(-math.exp(-2 * x)) - math.log(2)


def _log_abs_cosh_sqrt(radicand: float, prefactor: float) -> float:
    # log|cosh(prefactor * sqrt(radicand))| with sqrt taken on the complex plane
    if radicand >= 0:
        x = prefactor * math.sqrt(radicand)
        return x + math.log1p(math.exp(-2 * x)) - math.log(2)
    c = abs(math.cos(prefactor * math.sqrt(-radicand)))
    return math.log(c) if c > 0 else -math.inf


def log_analytic_collision_beta(model: CollisionModel, omega_rad: float, omega_kappa: float | None = None) -> float:
    """Natural log of the exact collision ``|beta|^2``.

    For a mode other than the rocking mode the sech^2 depth is rescaled by
    ``(omega_kappa / omega_ax_in)^2``, which keeps the profile in the same
    family and reduces to the two-ion result for ``omega_kappa = omega_ax_in``.
    """
    if omega_kappa is None:
        omega_kappa = model.omega_ax_in
    w_in_sq = omega_rad**2 - omega_kappa**2
    if w_in_sq <= 0:
        raise RegimeError("Omega_in^2 = omega_rad^2 - omega_kappa^2 must be positive")
    w_in = math.sqrt(w_in_sq)
    depth_sq = model.delta_omega_col_sq * (omega_kappa / model.omega_ax_in) ** 2
    radicand = 4 * depth_sq / model.omega_col**2 - 1
    num = _log_abs_cosh_sqrt(radicand, math.pi / 2)
    return 2 * (num - _log_sinh(math.pi * w_in / model.omega_col))


def analytic_collision_beta(model: CollisionModel, omega_rad: float, omega_kappa: float | None = None) -> float:
    """``|cosh(pi/2 sqrt(4 dW^2/w^2 - 1)) / sinh(pi W_in / w)|^2``."""
    return math.exp(log_analytic_collision_beta(model, omega_rad, omega_kappa))


def analytic_expansion_beta(model: ExpansionModel, omega_in: float) -> float:
    """Exact expansion ``|beta|^2`` with ``Omega_out = sqrt(Omega_in^2 + dW_ex^2)``."""
    w_out_sq = omega_in**2 + model.delta_omega_ex_sq
    if omega_in <= 0 or w_out_sq <= 0:
        raise RegimeError("both asymptotic frequencies must be positive")
    w_out = math.sqrt(w_out_sq)
    w = model.omega_ex
    gap = abs(w_out - omega_in) * math.pi / (2 * w)
    if gap == 0:
        return 0.0
    log_val = 2 * _log_sinh(gap) - _log_sinh(math.pi * omega_in / w) - _log_sinh(math.pi * w_out / w)
    return math.exp(log_val)


def sudden_quench_beta(omega_in: float, omega_out: float) -> float:
    if omega_in <= 0 or omega_out <= 0:
        raise RegimeError("frequencies must be positive")
    return (omega_out - omega_in) ** 2 / (4 * omega_in * omega_out)


def p1p2_parameters(dx_eq: float, dx_min: float, omega_ax_0: float, omega_ax_in: float) -> tuple[float, float]:
    """Compression ``p1 = (dx_eq/dx_min)^3`` and confinement ratio ``p2 = (w_ax(0)/w_in)^2``."""
    return (dx_eq / dx_min) ** 3, (omega_ax_0 / omega_ax_in) ** 2


def p1p2_collision_model(p1: float, p2: float, omega_ax_in: float) -> CollisionModel:
    """Model collision sharing the turning-point compression and confinement."""
    if p1 <= 1:
        raise RegimeError(f"p1={p1:.6g} must exceed 1 (the ions must approach)")
    w_col_sq = omega_ax_in**2 * 3 * p1 * (p1 - p2) / (2 * (p1 - 1))
    if w_col_sq <= 0:
        raise RegimeError(f"omega_col^2={w_col_sq:.6g} <= 0 for p1={p1:.6g}, p2={p2:.6g}")
    return CollisionModel(omega_ax_in**2 * (p1 - 1), math.sqrt(w_col_sq), omega_ax_in)


def p1p2_beta(dx_eq: float, dx_min: float, omega_ax_0: float, omega_ax_in: float, omega_rad: float) -> float:
    """Approximate rocking-mode ``|beta|^2`` of a collision from its turning point."""
    p1, p2 = p1p2_parameters(dx_eq, dx_min, omega_ax_0, omega_ax_in)
    return analytic_collision_beta(p1p2_collision_model(p1, p2, omega_ax_in), omega_rad)


def higher_mode_exponent(omega_kappa: float, omega_rad: float, model: CollisionModel) -> float:
    """Exponent of the slow-collision suppression of mode ``kappa``."""
    if omega_rad**2 <= omega_kappa**2:
        raise RegimeError("omega_rad must exceed omega_kappa")
    gap = math.sqrt(omega_rad**2 - omega_kappa**2) - model.delta_omega_col * omega_kappa / model.omega_ax_in
    return -2 * math.pi * gap / model.omega_col


def higher_mode_exponents(omega_kappas, omega_rad: float, model: CollisionModel):
    """Exponents for every mode and the mode indices ordered from least to most suppressed."""
    exps = np.array([higher_mode_exponent(w, omega_rad, model) for w in np.asarray(omega_kappas, dtype=float)])
    ranking = np.argsort(-exps, kind="stable")
    return exps, ranking
