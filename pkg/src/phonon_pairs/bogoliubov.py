"""Mode-function integration and Bogoliubov coefficient extraction.

Each radial normal mode obeys ``c'' + Omega(t)^2 c = 0``.  The in-solution is
``c(t_in) = exp(-i Omega_in t_in) / sqrt(2 Omega_in)``; at ``t_out`` the mode
function is split into positive and negative frequency parts at ``Omega_out``,

    c = (A exp(-i Omega t) + B exp(i Omega t)) / sqrt(2 Omega),

with ``alpha = conj(A)`` and ``beta = -B`` so that the out ladder operator is
``a_out = conj(alpha) a_in - conj(beta) a_in^dagger``.  Units are natural
(hbar = 1, mass absorbed into the normal coordinate); alpha, beta and xi are
dimensionless.

For profiles that are analytic near the real axis the integration can run along
the shifted line ``t = s - i tau``.  The coefficients are unchanged there while
the negative-frequency part is enhanced by ``exp(2 Omega tau)``, which is what
makes exponentially small ``|beta|^2`` resolvable in double precision.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import gammaln

from .scale import CollisionModel, ExpansionModel, ScaleFunction

log = logging.getLogger(__name__)

__all__ = [
    "ModeSolution",
    "BogoliubovCoefficients",
    "SqueezingParameter",
    "ModeInstabilityError",
    "IntegrationAccuracyError",
    "mode_profile",
    "integrate_mode",
    "extract_bogoliubov",
    "mean_phonons",
    "squeezing_from_bogoliubov",
    "squeezed_state_amplitudes",
    "model_contour_shift",
    "model_mode_solution",
    "model_bogoliubov",
]

FrequencyProfile = Callable[[np.ndarray], np.ndarray]


class ModeInstabilityError(RuntimeError):
    """Omega^2 crosses zero inside the integration window."""

    def __init__(self, time: float):
        super().__init__(f"mode frequency squared crosses zero at t={time:.6e} s (radial instability)")
        self.time = time


class IntegrationAccuracyError(RuntimeError):
    pass


@dataclass(frozen=True)
class BogoliubovCoefficients:
    alpha: complex
    beta: complex
    mode: int | None = None

    @property
    def normalization_error(self) -> float:
        return abs(abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1.0)


@dataclass(frozen=True)
class SqueezingParameter:
    xi: complex

    @property
    def r(self) -> float:
        return abs(self.xi)

    @property
    def phase(self) -> float:
        return cmath.phase(self.xi) if self.xi != 0 else 0.0


@dataclass(frozen=True)
class ModeSolution:
    """Mode function on the integration grid.

    ``grid`` is real; the physical time is ``grid - 1j * contour_shift``.
    ``omega_sq`` is kept so extraction can use the instantaneous frequency.
    """

    grid: np.ndarray
    c: np.ndarray
    c_dot: np.ndarray
    omega_in: float
    omega_out: float
    contour_shift: float
    omega_sq: FrequencyProfile = field(repr=False, compare=False)
    out_adiabaticity: float = 0.0
    _dense: object = field(repr=False, compare=False, default=None)

    @property
    def t_in(self) -> float:
        return float(self.grid[0])

    @property
    def t_out(self) -> float:
        return float(self.grid[-1])

    def wronskian(self) -> np.ndarray:
        """``c conj(c') - conj(c) c'``; equals ``i`` for canonical normalisation on the real axis."""
        return self.c * np.conj(self.c_dot) - np.conj(self.c) * self.c_dot

    def at(self, s):
        """``(c, c')`` at real contour parameter(s) ``s``."""
        u, v = self._dense(s)
        factor = math.exp(-self.omega_in * self.contour_shift) / math.sqrt(2 * self.omega_in)
        return u * factor, v * factor * self.omega_in


def mode_profile(source: ScaleFunction, omega_rad: float, omega_kappa_sq: float) -> FrequencyProfile:
    """``Omega_kappa(t)^2 = omega_rad^2 - omega_kappa^2 / b(t)^3`` for a scale source."""

    def omega_sq(t):
        b = source.scale(t)[0]
        return omega_rad**2 - omega_kappa_sq / b**3

    return omega_sq


def _local_adiabaticity(omega_sq, t, omega):
    h = 1e-3 / omega
    d = (omega_sq(t + h) - omega_sq(t - h)).real / (2 * h)
    return abs(d) / (2 * omega**3)  # |dOmega/dt| / Omega^2


def _check_positive(omega_sq, t0, t1, n=20001):
    ts = np.linspace(t0, t1, n)
    w2 = np.real(omega_sq(ts))
    bad = np.flatnonzero(w2 <= 0)
    if bad.size:
        i = bad[0]
        if i == 0:
            raise ModeInstabilityError(float(ts[0]))
        f = lambda s: float(np.real(omega_sq(s)))
        raise ModeInstabilityError(brentq(f, ts[i - 1], ts[i]))


def integrate_mode(
    omega_sq: FrequencyProfile,
    window: tuple[float, float],
    *,
    contour_shift: float = 0.0,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    method: str = "DOP853",
    max_step: float | None = None,
    stationary_tol: float = 1e-6,
) -> ModeSolution:
    """Evolve the in-mode function through ``window`` under ``omega_sq``.

    ``omega_sq`` must accept real arrays, and complex ones when
    ``contour_shift`` (tau, in seconds) is non-zero.  The real-axis profile is
    checked for zero crossings before integrating.
    """
    t_in, t_out = map(float, window)
    if not t_out > t_in:
        raise ValueError(f"invalid window {window}")
    w2_in = float(np.real(omega_sq(t_in)))
    w2_out = float(np.real(omega_sq(t_out)))
    if w2_in <= 0:
        raise ModeInstabilityError(t_in)
    if w2_out <= 0:
        raise ModeInstabilityError(t_out)
    _check_positive(omega_sq, t_in, t_out)
    w_in, w_out = math.sqrt(w2_in), math.sqrt(w2_out)
    ad_in = _local_adiabaticity(omega_sq, t_in, w_in)
    if ad_in > stationary_tol:
        raise ValueError(f"Omega is not stationary at t_in (|dOmega/dt|/Omega^2 = {ad_in:.2e})")
    ad_out = _local_adiabaticity(omega_sq, t_out, w_out)
    if ad_out > stationary_tol:
        log.debug("Omega not stationary at t_out: adiabaticity %.2e", ad_out)

    tau = float(contour_shift)
    if tau:
        shifted = lambda s: omega_sq(s - 1j * tau)
    else:
        shifted = omega_sq

    # scaled state: u = c sqrt(2 W_in) e^{W_in tau}, v = c' sqrt(2 W_in) e^{W_in tau} / W_in
    def rhs(s, y):
        return np.array([w_in * y[1], -(shifted(s) / w_in) * y[0]])

    u0 = cmath.exp(-1j * w_in * t_in)
    y0 = np.array([u0, -1j * u0], dtype=complex)
    if max_step is None:
        max_step = np.inf
    sol = solve_ivp(rhs, (t_in, t_out), y0, method=method, rtol=rtol, atol=atol, max_step=max_step, dense_output=True)
    if sol.status != 0:
        raise IntegrationAccuracyError(f"mode integration failed: {sol.message}")
    factor = math.exp(-w_in * tau) / math.sqrt(2 * w_in)
    c = sol.y[0] * factor
    c_dot = sol.y[1] * factor * w_in
    return ModeSolution(sol.t, c, c_dot, w_in, w_out, tau, omega_sq, ad_out, sol.sol)


def extract_bogoliubov(
    solution: ModeSolution,
    *,
    n_samples: int = 8,
    tolerance: float = 1e-6,
    mode: int | None = None,
) -> BogoliubovCoefficients:
    """Project the final mode function onto in/out positive and negative frequencies.

    The projection uses the instantaneous real-axis frequency and accumulated
    phase at ``n_samples`` times spanning the final period and averages the
    complex coefficients.
    Normalisation is checked, never imposed.
    """
    w_out = solution.omega_out
    period = 2 * np.pi / w_out
    s_hi = solution.t_out
    s_lo = s_hi - period
    if s_lo < solution.t_in:
        raise ValueError("window shorter than one final period; extend t_out")
    s = s_hi - period * np.arange(n_samples) / n_samples
    c, cd = solution.at(s)
    w = np.sqrt(np.real(solution.omega_sq(s)))
    # first-order adiabatic basis f = exp(-i phi)/sqrt(2W), phi' = W, f' = (-iW - W'/2W) f;
    # reduces to the plane-wave projection when Omega is stationary
    h = 1e-3 / w
    w_dot = np.real(solution.omega_sq(s + h) - solution.omega_sq(s - h)) / (4 * h * w)
    cd = cd + w_dot / (2 * w) * c
    phi = w_out * s_hi - _accumulated_phase(solution.omega_sq, s)
    amp = np.sqrt(w / 2)
    shift = np.exp(w * solution.contour_shift)
    A = amp * (c + 1j * cd / w) * np.exp(1j * phi) * shift
    B = amp * (c - 1j * cd / w) * np.exp(-1j * phi) / shift
    alpha = complex(np.conj(A.mean()))
    beta = complex(-B.mean())
    coeffs = BogoliubovCoefficients(alpha, beta, mode)
    if coeffs.normalization_error > tolerance:
        raise IntegrationAccuracyError(
            f"|alpha|^2 - |beta|^2 - 1 = {abs(alpha)**2 - abs(beta)**2 - 1:.3e} exceeds {tolerance:g}"
        )
    return coeffs


def _accumulated_phase(omega_sq, s, n_nodes=16):
    # int_{s_k}^{s_0} Omega for descending samples s_0 > s_1 > ...
    x, wts = np.polynomial.legendre.leggauss(n_nodes)
    out = np.zeros(len(s))
    for k in range(1, len(s)):
        a, b = s[k], s[k - 1]
        nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
        out[k] = out[k - 1] + 0.5 * (b - a) * np.dot(wts, np.sqrt(np.real(omega_sq(nodes))))
    return out


def mean_phonons(coeffs: BogoliubovCoefficients) -> float:
    """Mean number of created phonons from the vacuum, ``|beta|^2``."""
    return abs(coeffs.beta) ** 2


def squeezing_from_bogoliubov(coeffs: BogoliubovCoefficients) -> SqueezingParameter:
    r = math.asinh(abs(coeffs.beta))
    if r == 0.0:
        return SqueezingParameter(0j)
    phase = -(cmath.phase(coeffs.alpha) + cmath.phase(coeffs.beta))
    return SqueezingParameter(cmath.rect(r, phase))


def squeezed_state_amplitudes(xi, truncation: int = 2, *, exact: bool = False) -> np.ndarray:
    """Fock amplitudes ``[c_0, c_1, ..., c_truncation]`` of the squeezed vacuum.

    By default this is the first-order pair-creation state
    ``|0> + xi/sqrt(2) |2>``, normalised.  With ``exact=True`` the full expansion of
    ``exp(xi a^+2 / 2 - h.c.)|0>`` is returned (normalised after truncation).
    """
    if isinstance(xi, SqueezingParameter):
        xi = xi.xi
    xi = complex(xi)
    if truncation < 2:
        raise ValueError("truncation must include the two-phonon state")
    amps = np.zeros(truncation + 1, dtype=complex)
    if exact:
        r, phi = abs(xi), cmath.phase(xi)
        n = np.arange(0, truncation // 2 + 1)
        logmag = 0.5 * gammaln(2 * n + 1) - n * math.log(2) - gammaln(n + 1)
        with np.errstate(divide="ignore"):
            amps[2 * n] = np.exp(logmag) * (np.exp(1j * phi) * math.tanh(r)) ** n / math.sqrt(math.cosh(r))
    else:
        if abs(xi) > 0.5:
            warnings.warn(f"|xi|={abs(xi):.3g} is outside the perturbative regime", stacklevel=2)
        amps[0] = 1.0
        amps[2] = xi / math.sqrt(2)
    return amps / np.linalg.norm(amps)


def model_contour_shift(model, omega_in: float, omega_kappa_sq: float | None = None, *, cap: float = 0.9) -> float:
    """Contour shift that balances the |alpha| and |beta| parts for a model profile.

    For the collision the shift is ``(1 - dOmega/Omega_in)`` of the pole distance,
    for the expansion ``min(Omega_in, Omega_out)/Omega_out``; both capped at ``cap``.
    """
    if omega_kappa_sq is None:
        omega_kappa_sq = model.omega_ax_in**2
    ratio = omega_kappa_sq / model.omega_ax_in**2
    if isinstance(model, CollisionModel):
        d_omega = math.sqrt(model.delta_omega_col_sq * ratio)
        theta = 1.0 - d_omega / omega_in
    elif isinstance(model, ExpansionModel):
        w2_out = omega_in**2 + model.delta_omega_ex_sq * ratio
        if w2_out <= 0:
            raise ModeInstabilityError(math.inf)
        w_out = math.sqrt(w2_out)
        theta = min(omega_in, w_out) / w_out
    else:
        raise TypeError(f"no contour heuristic for {type(model).__name__}")
    return min(max(theta, 0.0), cap) * model.pole_distance


def model_mode_solution(
    model,
    omega_rad: float,
    omega_kappa_sq: float | None = None,
    *,
    contour: bool = True,
    window: tuple[float, float] | None = None,
    **kwargs,
) -> ModeSolution:
    """Integrate a radial mode driven by a closed-form scale model."""
    if omega_kappa_sq is None:
        omega_kappa_sq = model.omega_ax_in**2
    profile = mode_profile(model, omega_rad, omega_kappa_sq)
    w_in = math.sqrt(omega_rad**2 - omega_kappa_sq)
    tau = model_contour_shift(model, w_in, omega_kappa_sq) if contour else 0.0
    if window is None:
        t0, t1 = model.window()
        w2_out = float(np.real(profile(t1)))
        if w2_out <= 0:
            raise ModeInstabilityError(t1)
        t1 += 2 * np.pi / math.sqrt(w2_out)  # room for the averaging period
        window = (t0, t1)
    return integrate_mode(profile, window, contour_shift=tau, **kwargs)


def _contour_gain(model, omega_in: float, omega_out: float, omega_kappa_sq: float, tau: float) -> float:
    # log of the factor by which early integration errors grow relative to beta,
    # using the slow-regime exponent |beta| ~ exp(-pi gap / rate)
    rate = math.pi / (2 * model.pole_distance)
    if isinstance(model, CollisionModel):
        gap = omega_in - math.sqrt(model.delta_omega_col_sq * omega_kappa_sq) / model.omega_ax_in
    else:
        gap = min(omega_in, omega_out)
    return math.pi * gap / rate - 2 * omega_in * tau


def model_bogoliubov(
    model,
    omega_rad: float,
    omega_kappa_sq: float | None = None,
    *,
    mode: int | None = None,
    tolerance: float = 1e-6,
    max_gain: float = 3.0,
    cap: float = 0.97,
    **kwargs,
) -> BogoliubovCoefficients:
    """Bogoliubov coefficients of a model-driven mode, robust to exponentially small beta.

    The balanced contour shift resolves alpha and beta in one run when the
    contour gain is small (collisions).  Otherwise beta is taken from a run
    shifted to ``cap`` times the pole distance and alpha from a real-axis run;
    normalisation is then checked across the two independent runs.
    """
    if omega_kappa_sq is None:
        omega_kappa_sq = model.omega_ax_in**2
    w_in = math.sqrt(omega_rad**2 - omega_kappa_sq)
    window = kwargs.pop("window", None)
    if isinstance(model, ExpansionModel) and model.delta_omega_ex_sq == 0:
        # flat profile: nothing to resolve off the real axis
        sol = model_mode_solution(model, omega_rad, omega_kappa_sq, window=window, contour=False, **kwargs)
        return extract_bogoliubov(sol, tolerance=tolerance, mode=mode)
    sol = model_mode_solution(model, omega_rad, omega_kappa_sq, window=window, **kwargs)
    if sol.contour_shift == 0 or _contour_gain(model, w_in, sol.omega_out, omega_kappa_sq, sol.contour_shift) <= max_gain:
        return extract_bogoliubov(sol, tolerance=tolerance, mode=mode)
    profile = sol.omega_sq
    window = (sol.t_in, sol.t_out)
    high = integrate_mode(profile, window, contour_shift=cap * model.pole_distance, **kwargs)
    real = integrate_mode(profile, window, **kwargs)
    beta = extract_bogoliubov(high, tolerance=math.inf).beta
    alpha = extract_bogoliubov(real, tolerance=tolerance).alpha
    coeffs = BogoliubovCoefficients(alpha, beta, mode)
    if coeffs.normalization_error > tolerance:
        raise IntegrationAccuracyError(
            f"|alpha|^2 - |beta|^2 - 1 = {abs(alpha)**2 - abs(beta)**2 - 1:.3e} exceeds {tolerance:g}"
        )
    return coeffs

