"""Scale function b(t) of the axial breathing motion.

The chain keeps its shape during axial driving, ``x_k(t) = b(t) x_k^eq``, with

    b'' + omega_ax(t)^2 b = omega_ax_in^2 / b^2,    b(t_in) = 1, b'(t_in) = 0.

This module integrates that ODE for a prescribed waveform, inverts it to get
the waveform that realises a prescribed ``b(t)``, and provides the two closed
form scale functions (collision and expansion) used for analytic comparisons.
Model scale functions accept complex ``t`` so the mode equation can be
integrated along shifted contours.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .trap import EquilibriumChain

__all__ = [
    "ScaleFunction",
    "AxialWaveform",
    "ConstantWaveform",
    "RampPulse",
    "TabulatedWaveform",
    "ScaleDerivedWaveform",
    "ScaleTrajectory",
    "CollisionModel",
    "ExpansionModel",
    "ChainCollapseError",
    "ScaleIntegrationError",
    "solve_scale_ode",
    "axial_frequency_from_scale",
    "collision_scale",
    "expansion_scale",
    "mode_frequency",
    "ion_separation",
    "read_waveform_csv",
    "WAVEFORM_CSV_COLUMNS",
]

WAVEFORM_CSV_COLUMNS = ("time_s", "omega_ax_over_2pi_Hz")


class ScaleIntegrationError(RuntimeError):
    pass


class ChainCollapseError(ScaleIntegrationError):
    def __init__(self, time: float):
        super().__init__(f"scale function collapsed towards b=0 at t={time:.6e} s")
        self.time = time


class ScaleFunction(Protocol):
    def scale(self, t) -> tuple: ...


# -- waveforms ---------------------------------------------------------------


class AxialWaveform:
    """Time-dependent axial confinement omega_ax(t), queried as omega_ax(t)^2."""

    kind: str = "abstract"

    def omega_sq(self, t):
        raise NotImplementedError

    def omega(self, t):
        return np.sqrt(np.asarray(self.omega_sq(t)))

    def support(self) -> tuple[float, float]:
        """Interval outside of which the waveform is constant."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantWaveform(AxialWaveform):
    value: float  # rad/s
    duration: float = 1e-6  # s, nominal span used for default windows
    kind = "constant"

    def omega_sq(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value**2)

    def support(self):
        return (0.0, self.duration)


@dataclass(frozen=True)
class RampPulse(AxialWaveform):
    """Raise omega_ax from ``base`` to ``plateau``, hold, and return.

    omega_ax^2 follows ``(1 - cos(pi s)) / 2`` over each ramp, so the waveform
    is continuously differentiable.
    """

    base: float  # rad/s
    plateau: float  # rad/s
    ramp: float = 0.5e-6  # s
    hold: float = 0.5e-6  # s
    start: float = 0.0  # s
    kind = "piecewise-ramp"

    def __post_init__(self):
        if self.ramp <= 0 or self.hold < 0:
            raise ValueError("ramp must be positive and hold non-negative")
        if self.base <= 0 or self.plateau <= 0:
            raise ValueError("waveform frequencies must be positive")

    def omega_sq(self, t):
        t = np.asarray(t, dtype=float) - self.start
        lo, hi = self.base**2, self.plateau**2
        r, h = self.ramp, self.hold
        up = lo + (hi - lo) * 0.5 * (1 - np.cos(np.pi * np.clip(t / r, 0, 1)))
        down = hi - (hi - lo) * 0.5 * (1 - np.cos(np.pi * np.clip((t - r - h) / r, 0, 1)))
        return np.where(t < r + h, up, down)

    def support(self):
        return (self.start, self.start + 2 * self.ramp + self.hold)


@dataclass(frozen=True)
class TabulatedWaveform(AxialWaveform):
    """Sampled omega_ax^2 with monotone cubic interpolation, clamped outside."""

    times: np.ndarray
    omega_sq_samples: np.ndarray
    kind = "tabulated"
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        w2 = np.asarray(self.omega_sq_samples, dtype=float)
        if t.ndim != 1 or t.shape != w2.shape or len(t) < 2:
            raise ValueError("need matching 1-D arrays of at least two samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "omega_sq_samples", w2)
        object.__setattr__(self, "_interp", PchipInterpolator(t, w2, extrapolate=False))

    def omega_sq(self, t):
        t = np.asarray(t, dtype=float)
        return self._interp(np.clip(t, self.times[0], self.times[-1]))

    def support(self):
        return (float(self.times[0]), float(self.times[-1]))


def read_waveform_csv(path) -> TabulatedWaveform:
    """Read a two-column ``time_s, omega_ax_over_2pi_Hz`` table."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(row for row in fh if row.strip() and not row.lstrip().startswith("#"))
        header = [h.strip() for h in next(reader)]
        if tuple(header) != WAVEFORM_CSV_COLUMNS:
            raise ValueError(f"{path}: header must be {','.join(WAVEFORM_CSV_COLUMNS)}, got {','.join(header)}")
        rows = [(float(a), float(b)) for a, b in reader]
    data = np.array(rows)
    return TabulatedWaveform(data[:, 0], (2 * np.pi * data[:, 1]) ** 2)


@dataclass(frozen=True)
class ScaleDerivedWaveform(AxialWaveform):
    """omega_ax^2 = omega_ax_in^2 / b^3 - b''/b for a prescribed scale function.

    ``repulsive_intervals`` lists the windows where this is negative, i.e. where
    the requested motion needs a temporarily repulsive axial potential.
    """

    source: ScaleFunction
    omega_ax_in: float
    window: tuple[float, float]
    repulsive_intervals: tuple[tuple[float, float], ...] = ()
    kind = "from-scale"

    def omega_sq(self, t):
        b, _, bdd = self.source.scale(t)
        return self.omega_ax_in**2 / b**3 - bdd / b

    def omega(self, t):
        w2 = np.asarray(self.omega_sq(t))
        if np.any(w2 < 0):
            raise ValueError("waveform is repulsive here; use omega_sq for the signed value")
        return np.sqrt(w2)

    @property
    def is_repulsive(self) -> bool:
        return bool(self.repulsive_intervals)

    def support(self):
        return self.window


# -- closed-form scale functions ----------------------------------------------


def _asymptotic_halfwidth(amplitude: float, rate: float, tol: float = 1e-12) -> float:
    # |b - b_inf| ~ (|a|/3) * 4 exp(-2 rate T) for both sech^2 and tanh tails
    a = max(abs(amplitude), 1.0)
    return max(15.0, 0.5 * math.log(4 * a / (3 * tol))) / rate


@dataclass(frozen=True)
class CollisionModel:
    """b(t) = (1 + dW^2/w_in^2 * sech^2(w_col t))^(-1/3): approach and return."""

    delta_omega_col_sq: float
    omega_col: float
    omega_ax_in: float

    def __post_init__(self):
        if not self.delta_omega_col_sq > 0 or not self.omega_col > 0 or not self.omega_ax_in > 0:
            raise ValueError("collision parameters must be positive")

    @property
    def delta_omega_col(self) -> float:
        return math.sqrt(self.delta_omega_col_sq)

    @property
    def b_min(self) -> float:
        return (1 + self.delta_omega_col_sq / self.omega_ax_in**2) ** (-1 / 3)

    @property
    def pole_distance(self) -> float:
        """Distance from the real axis of the nearest singularity of b(t)^-3."""
        return math.pi / (2 * self.omega_col)

    def window(self) -> tuple[float, float]:
        T = _asymptotic_halfwidth(self.delta_omega_col_sq / self.omega_ax_in**2, self.omega_col)
        return (-T, T)

    def scale(self, t):
        return collision_scale(self, t)


@dataclass(frozen=True)
class ExpansionModel:
    """b(t) = (1 - dW^2/(2 w_in^2) (tanh(w_ex t) + 1))^(-1/3): step to a new spacing."""

    delta_omega_ex_sq: float
    omega_ex: float
    omega_ax_in: float

    def __post_init__(self):
        if not self.omega_ex > 0 or not self.omega_ax_in > 0:
            raise ValueError("expansion rate and initial frequency must be positive")
        if self.delta_omega_ex_sq >= self.omega_ax_in**2:
            raise ValueError("delta_omega_ex_sq >= omega_ax_in^2: final spacing would diverge")

    @property
    def b_final(self) -> float:
        return (1 - self.delta_omega_ex_sq / self.omega_ax_in**2) ** (-1 / 3)

    @property
    def pole_distance(self) -> float:
        return math.pi / (2 * self.omega_ex)

    def window(self) -> tuple[float, float]:
        T = _asymptotic_halfwidth(self.delta_omega_ex_sq / self.omega_ax_in**2, self.omega_ex)
        return (-T, T)

    def scale(self, t):
        return expansion_scale(self, t)


def _power_chain(g, g1, g2):
    # b = g^(-1/3) and its first two derivatives
    b = g ** (-1 / 3)
    bd = -(1 / 3) * g ** (-4 / 3) * g1
    bdd = (4 / 9) * g ** (-7 / 3) * g1**2 - (1 / 3) * g ** (-4 / 3) * g2
    return b, bd, bdd


def collision_scale(model: CollisionModel, t):
    """Return ``(b, b_dot, b_ddot)`` of the collision scale function at ``t``."""
    w = model.omega_col
    a = model.delta_omega_col_sq / model.omega_ax_in**2
    if np.ndim(t) == 0:
        # scalar fast path for ODE right-hand sides
        t = t.item() if hasattr(t, "item") else t
        z = w * complex(t) if isinstance(t, complex) else w * float(t)
        z = -z if z.real < 0 else z  # sech is even; keeps exp(-2z) bounded
        e = cmath.exp(-2 * z) if isinstance(z, complex) else math.exp(-2 * z)
        th = cmath.tanh(w * t) if isinstance(z, complex) else math.tanh(w * t)
    else:
        t = np.asarray(t)
        z = w * t
        z = np.where(np.real(z) < 0, -z, z)
        e = np.exp(-2 * z)
        th = np.tanh(w * t)
    u = 4 * e / (1 + e) ** 2
    u1 = -2 * w * u * th
    u2 = 2 * w**2 * u * (2 - 3 * u)
    return _power_chain(1 + a * u, a * u1, a * u2)


def expansion_scale(model: ExpansionModel, t):
    """Return ``(b, b_dot, b_ddot)`` of the expansion scale function at ``t``."""
    w = model.omega_ex
    a = model.delta_omega_ex_sq / model.omega_ax_in**2
    h = np.tanh(w * np.asarray(t))
    h1 = w * (1 - h**2)
    h2 = -2 * w**2 * h * (1 - h**2)
    return _power_chain(1 - 0.5 * a * (h + 1), -0.5 * a * h1, -0.5 * a * h2)


# -- numerical scale trajectory -----------------------------------------------


@dataclass(frozen=True)
class ScaleTrajectory:
    """Solution of the scale ODE with dense output.

    ``grid``, ``b``, ``b_dot``, ``b_ddot`` hold the integrator's accepted steps;
    :meth:`scale` evaluates anywhere inside ``[t_in, t_out]``.
    """

    grid: np.ndarray
    b: np.ndarray
    b_dot: np.ndarray
    b_ddot: np.ndarray
    t_in: float
    t_out: float
    waveform: AxialWaveform
    omega_ax_in: float
    _dense: object = field(repr=False, compare=False, default=None)

    def scale(self, t):
        t = np.asarray(t, dtype=float)
        y = self._dense(t)
        b, bd = y[0], y[1]
        bdd = -self.waveform.omega_sq(t) * b + self.omega_ax_in**2 / b**2
        return b, bd, bdd

    def residual(self, t, h: float | None = None):
        """Relative ODE residual with b'' taken from the dense b' by differencing.

        Normalised by ``omega_ax_in^2``.  Uses a five-point stencil of step ``h``.
        """
        t = np.asarray(t, dtype=float)
        if h is None:
            h = 2e-3 / self.omega_ax_in
        lo, hi = self.t_in + 2 * h, self.t_out - 2 * h
        t = np.clip(t, lo, hi)
        bd = lambda s: self._dense(s)[1]
        bdd = (bd(t - 2 * h) - 8 * bd(t - h) + 8 * bd(t + h) - bd(t + 2 * h)) / (12 * h)
        b = self._dense(t)[0]
        r = bdd + self.waveform.omega_sq(t) * b - self.omega_ax_in**2 / b**2
        return r / self.omega_ax_in**2

    def minimum(self) -> tuple[float, float]:
        """Time and value of the global minimum of b on the trajectory."""
        i = int(np.argmin(self.b))
        lo = self.grid[max(i - 1, 0)]
        hi = self.grid[min(i + 1, len(self.grid) - 1)]
        fine = np.linspace(lo, hi, 201)
        j = int(np.argmin(self._dense(fine)[0]))
        a, c = fine[max(j - 1, 0)], fine[min(j + 1, 200)]
        bd_a, bd_c = self._dense(a)[1], self._dense(c)[1]
        if bd_a < 0 < bd_c:
            tmin = brentq(lambda s: self._dense(s)[1], a, c, xtol=1e-15 * max(abs(a), 1e-9))
        else:
            tmin = fine[j]
        return float(tmin), float(self._dense(tmin)[0])


def solve_scale_ode(
    waveform: AxialWaveform,
    omega_ax_in: float,
    window: tuple[float, float],
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    method: str = "DOP853",
    max_step: float | None = None,
    collapse_floor: float = 1e-6,
) -> ScaleTrajectory:
    """Integrate the scale ODE from ``b(t_in)=1, b'(t_in)=0`` across ``window``."""
    t_in, t_out = map(float, window)
    if not (np.isfinite(t_in) and np.isfinite(t_out) and t_out > t_in):
        raise ValueError(f"invalid window {window}")
    w0 = float(np.sqrt(waveform.omega_sq(t_in)))
    if not math.isclose(w0, omega_ax_in, rel_tol=1e-9):
        raise ValueError(
            f"waveform gives omega_ax(t_in)={w0:.9g} rad/s, expected omega_ax_in={omega_ax_in:.9g}"
        )
    win2 = omega_ax_in**2

    def rhs(t, y):
        return [y[1], -waveform.omega_sq(t) * y[0] + win2 / y[0] ** 2]

    def collapse(t, y):
        return y[0] - collapse_floor

    collapse.terminal = True
    collapse.direction = -1

    # b is O(1) and b' is O(omega_ax_in); atol is scaled per component
    if max_step is None:
        max_step = 0.25 / math.sqrt(max(float(np.max(waveform.omega_sq(np.linspace(t_in, t_out, 2001)))), win2))
    sol = solve_ivp(
        rhs,
        (t_in, t_out),
        [1.0, 0.0],
        method=method,
        rtol=rtol,
        atol=[atol, atol * omega_ax_in],
        max_step=max_step,
        dense_output=True,
        events=collapse,
    )
    if sol.status == 1:
        raise ChainCollapseError(float(sol.t_events[0][0]))
    if sol.status != 0:
        raise ScaleIntegrationError(f"scale ODE failed: {sol.message}")
    b, bd = sol.y
    bdd = -waveform.omega_sq(sol.t) * b + win2 / b**2
    return ScaleTrajectory(sol.t, b, bd, bdd, t_in, t_out, waveform, omega_ax_in, sol.sol)


def axial_frequency_from_scale(
    trajectory: ScaleFunction,
    omega_ax_in: float,
    window: tuple[float, float] | None = None,
    *,
    n_check: int = 4001,
) -> ScaleDerivedWaveform:
    """Waveform that makes the scale ODE reproduce ``trajectory``.

    Sign changes of the radicand are located by bracketing on an ``n_check``
    grid and refined with Brent's method.
    """
    if window is None:
        if hasattr(trajectory, "window"):
            window = trajectory.window() if callable(trajectory.window) else trajectory.window
        else:
            window = (trajectory.t_in, trajectory.t_out)
    t0, t1 = map(float, window)
    wf = ScaleDerivedWaveform(trajectory, omega_ax_in, (t0, t1))
    ts = np.linspace(t0, t1, n_check)
    w2 = wf.omega_sq(ts)
    if np.any(np.asarray(trajectory.scale(ts)[0]) <= 0):
        raise ValueError("scale function must stay positive")
    f = lambda s: float(wf.omega_sq(s))
    neg = w2 < 0
    intervals = []
    i = 0
    while i < n_check:
        if neg[i]:
            j = i
            while j + 1 < n_check and neg[j + 1]:
                j += 1
            start = t0 if i == 0 else brentq(f, ts[i - 1], ts[i], xtol=1e-14 * max(abs(ts[i]), 1e-12))
            stop = t1 if j == n_check - 1 else brentq(f, ts[j], ts[j + 1], xtol=1e-14 * max(abs(ts[j]), 1e-12))
            intervals.append((float(start), float(stop)))
            i = j + 1
        else:
            i += 1
    return ScaleDerivedWaveform(trajectory, omega_ax_in, (t0, t1), tuple(intervals))


def mode_frequency(omega_kappa_sq, omega_rad: float, b):
    """Instantaneous radial mode frequency squared, rad^2/s^2 (sign preserved)."""
    return omega_rad**2 - omega_kappa_sq / b**3


def ion_separation(chain: EquilibriumChain, b):
    """Two-ion distance ``b * dx_eq`` in metres."""
    if chain.n_ions != 2:
        raise ValueError(f"ion separation is defined for two ions, chain has {chain.n_ions}")
    return np.asarray(b) * chain.separation
