"""WKB estimate of the exponential suppression of pair creation.

For a slow, stable dip of Omega^2(t) with its minimum at ``t0``,
``|beta|^2 ~ exp(-4 Im int_{t0}^{t*} Omega dt)`` where ``t*`` is the zero of
Omega^2 in the upper half plane.  Only exponents are returned; the prefactor
is not determined at this order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import newton

__all__ = ["WKBExponent", "WKBError", "wkb_beta_exponent", "taylor_wkb_exponent"]


class WKBError(RuntimeError):
    pass


@dataclass(frozen=True)
class WKBExponent:
    exponent: float
    turning_point: complex
    notes: tuple[str, ...] = ()

    def __float__(self):
        return self.exponent


def taylor_wkb_exponent(omega_min_sq: float, K_sq: float) -> float:
    """Exponent ``-sqrt(2) pi Omega_min^2 / K`` for ``Omega^2 ~ Omega_min^2 + K^2 t^2 / 2``."""
    if omega_min_sq <= 0 or K_sq <= 0:
        raise ValueError("Omega_min^2 and the curvature K^2 must be positive")
    return -math.sqrt(2) * math.pi * omega_min_sq / math.sqrt(K_sq)


def _curvature(omega_sq, t0, h):
    f0 = omega_sq(t0)
    return float(np.real(omega_sq(t0 + h) - 2 * f0 + omega_sq(t0 - h))) / h**2


def wkb_beta_exponent(
    omega_sq,
    *,
    t0: float = 0.0,
    d_omega_sq=None,
    curvature_sq: float | None = None,
    timescale: float | None = None,
    n_nodes: int = 400,
    maxiter: int = 100,
) -> WKBExponent:
    """Locate the complex turning point and integrate Omega along ``t0 -> t*``.

    ``omega_sq`` must accept complex arguments.  The Newton iteration starts from
    the quadratic estimate ``t* ~ t0 + i sqrt(2) Omega_min / K``.  ``timescale``
    sets the finite-difference step for the curvature (default ``1/Omega_min``).
    """
    w2_min = float(np.real(omega_sq(t0)))
    if w2_min <= 0:
        raise WKBError(f"Omega^2(t0) = {w2_min:.4g} is not positive; the mode is unstable")
    w_min = math.sqrt(w2_min)
    if timescale is None:
        timescale = 1.0 / w_min
    if curvature_sq is None:
        curvature_sq = _curvature(omega_sq, t0, 1e-3 * timescale)
    if curvature_sq <= 0:
        raise WKBError("Omega^2 has no minimum at t0 (non-positive curvature)")
    guess = t0 + 1j * math.sqrt(2) * w_min / math.sqrt(curvature_sq)
    guess = _seed_on_ray(omega_sq, t0, guess.imag, w2_min)
    # solve in z = (t - t0) / L so the secant start and tolerance are scale-free
    L = abs(guess - t0)
    g = lambda z: omega_sq(t0 + L * z) / w2_min
    dg = None if d_omega_sq is None else (lambda z: d_omega_sq(t0 + L * z) * L / w2_min)
    try:
        with np.errstate(all="ignore"):
            z = complex(newton(g, (guess - t0) / L, fprime=dg, maxiter=maxiter, tol=1e-14))
        t_star = t0 + L * z
    except (RuntimeError, OverflowError, ZeroDivisionError) as exc:
        raise WKBError(f"turning point search failed from {guess}: {exc}") from exc
    if not np.isfinite(t_star) or t_star.imag <= 0:
        raise WKBError(f"turning point {t_star} is not in the upper half plane")
    if abs(omega_sq(t_star)) > 1e-8 * w2_min:
        raise WKBError(f"turning point did not converge: |Omega^2(t*)| = {abs(omega_sq(t_star)):.3e}")

    # sigma = 1 - x^2 maps the sqrt endpoint singularity to a smooth integrand
    x, wts = np.polynomial.legendre.leggauss(n_nodes)
    x = 0.5 * (x + 1)
    wts = 0.5 * wts
    order = np.argsort(-x)  # from sigma = 0 upwards
    x, wts = x[order], wts[order]
    sigma = 1 - x**2
    path = t0 + (t_star - t0) * sigma
    root = np.sqrt(np.asarray(omega_sq(path), dtype=complex))
    _continuous_branch(root, w_min)
    integral = np.sum(root * (t_star - t0) * 2 * x * wts)
    notes = _assumption_notes(omega_sq, t0, abs(t_star))
    return WKBExponent(float(-4 * integral.imag), t_star, notes)


def _seed_on_ray(omega_sq, t0, height, w2_min, n=2000):
    # The quadratic estimate overshoots badly for shallow dips (it can land past a
    # pole), so take the first local minimum of |Omega^2| on the ray above t0.
    ys = np.linspace(0, 2 * height, n + 1)[1:]
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(omega_sq(t0 + 1j * ys), dtype=complex))
    vals[~np.isfinite(vals)] = np.inf
    for i in range(1, n - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < 0.5 * w2_min:
            return t0 + 1j * ys[i]
    return t0 + 1j * height


def _continuous_branch(root, start):
    prev = complex(start)
    for i in range(len(root)):
        if abs(root[i] + prev) < abs(root[i] - prev):
            root[i] = -root[i]
        prev = root[i]


def _assumption_notes(omega_sq, t0, span, n=2001):
    ts = t0 + np.linspace(-3 * span, 3 * span, n)
    w2 = np.real(omega_sq(ts))
    notes = []
    if np.any(w2 <= 0):
        notes.append("Omega^2 reaches zero on the real axis")
        return tuple(notes)
    w = np.sqrt(w2)
    slowness = np.max(np.abs(np.gradient(w, ts)) / w2)
    if slowness > 0.1:
        notes.append(f"not slow: max |dOmega/dt|/Omega^2 = {slowness:.3g}")
    return tuple(notes)
