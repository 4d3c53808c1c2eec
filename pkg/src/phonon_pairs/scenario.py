"""Scenario configuration, end-to-end runs, sweeps and figure tables.

Configuration documents are flat ``key = value`` text with ``#`` comments.
Dimensional values carry a unit suffix; frequencies are ordinary frequencies
and are converted to angular frequencies on parsing.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bogoliubov as bg
from . import closed_forms as cf
from .entanglement import (
    ThermalOccupation,
    basis_change,
    entanglement_of_formation,
    evolve_covariance,
    is_entangled,
    pt_symplectic_eigenvalues,
    squeeze_transform,
    thermal_covariance,
)
from .scale import (
    CollisionModel,
    ConstantWaveform,
    ExpansionModel,
    RampPulse,
    ScaleIntegrationError,
    axial_frequency_from_scale,
    read_waveform_csv,
    solve_scale_ode,
)
from .trap import IonSpecies, TrapConfig, coupling_matrix, critical_scale, mode_spectrum, solve_equilibrium
from .wkb import WKBError, taylor_wkb_exponent, wkb_beta_exponent

__all__ = [
    "ConfigError",
    "StageError",
    "Scenario",
    "SweepSpec",
    "ScenarioResult",
    "ModeResult",
    "EntanglementResult",
    "SweepTable",
    "parse_scenario",
    "load_scenario",
    "run_scenario",
    "run_sweep",
    "emit_figures",
    "write_comparison",
    "read_csv",
    "FIGURE_SCHEMAS",
]

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    """Invalid configuration document; messages carry line numbers."""


class StageError(RuntimeError):
    """A numerical failure inside one pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


# -- units and keys -------------------------------------------------------------

_UNITS = {
    "freq": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6, "nK": 1e-9},
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
}
#: unit used for sweep ranges and tables
DISPLAY_UNIT = {"freq": "MHz", "time": "us", "temperature": "uK", "length": "um"}

# key -> kind; kinds: freq, sfreq (signed frequency), time, temperature, float, int, bool, str
KEYS = {
    "name": "str",
    "trap.mass_u": "float",
    "trap.charge": "int",
    "trap.n_ions": "int",
    "trap.omega_rad": "freq",
    "trap.omega_ax_in": "freq",
    "pulse.omega_ax_max": "freq",
    "pulse.ramp": "time",
    "pulse.hold": "time",
    "pulse.start": "time",
    "collision.delta_omega": "freq",
    "collision.omega": "freq",
    "expansion.delta_omega": "sfreq",
    "expansion.omega": "freq",
    "tabulated.path": "str",
    "constant.duration": "time",
    "window.t_in": "stime",
    "window.t_out": "stime",
    "analysis.bogoliubov": "bool",
    "analysis.entanglement": "bool",
    "analysis.wkb": "bool",
    "analysis.p1p2": "bool",
    "thermal.n_th": "float",
    "thermal.temperature": "temperature",
    "ode.rtol": "float",
    "ode.atol": "float",
    "output.dir": "str",
}
REQUIRED = ("trap.omega_rad", "trap.omega_ax_in")
DRIVES = {
    "pulse": ("pulse.omega_ax_max",),
    "collision": ("collision.delta_omega", "collision.omega"),
    "expansion": ("expansion.delta_omega", "expansion.omega"),
    "tabulated": ("tabulated.path",),
    "constant": ("constant.duration",),
}
DEFAULTS = {
    "name": "scenario",
    "trap.mass_u": 25.0,
    "trap.charge": 1,
    "trap.n_ions": 2,
    "pulse.ramp": 0.5e-6,
    "pulse.hold": 0.5e-6,
    "pulse.start": 0.0,
    "analysis.bogoliubov": True,
    "analysis.entanglement": True,
    "analysis.wkb": True,
    "analysis.p1p2": True,
    "ode.rtol": 1e-10,
    "ode.atol": 1e-12,
    "output.dir": "out",
}
NUMERIC_KINDS = ("freq", "sfreq", "time", "stime", "temperature", "float", "int")

_QUANTITY = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d.+-][^\s]*)?$")


def _unit_kind(kind: str) -> str | None:
    return {"freq": "freq", "sfreq": "freq", "time": "time", "stime": "time", "temperature": "temperature"}.get(kind)


def _convert(key: str, raw: str, lineno: int | None) -> Any:
    kind = KEYS[key]
    where = f"line {lineno}: " if lineno is not None else ""
    if kind == "str":
        if not raw:
            raise ConfigError(f"{where}{key} is empty")
        return raw
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{where}{key} expects a boolean, got {raw!r}")
    m = _QUANTITY.match(raw)
    if not m:
        raise ConfigError(f"{where}{key} expects a number, got {raw!r}")
    number, unit = m.group(1), m.group(2)
    ukind = _unit_kind(kind)
    if ukind is None:
        if unit:
            raise ConfigError(f"{where}{key} is dimensionless, unexpected unit {unit!r}")
        if kind == "int":
            value = float(number)
            if value != int(value):
                raise ConfigError(f"{where}{key} expects an integer, got {raw!r}")
            return int(value)
        return float(number)
    table = _UNITS[ukind]
    if unit is None:
        raise ConfigError(f"{where}{key} needs a unit suffix, one of {sorted(table)}")
    if unit not in table:
        raise ConfigError(f"{where}{key}: bad unit suffix {unit!r}, expected one of {sorted(table)}")
    value = float(number) * table[unit]
    if ukind == "freq":
        value *= TWO_PI
    return value


def display_to_si(key: str, value: float) -> float:
    """Convert a value given in the key's display unit (MHz, us, uK) to SI/angular."""
    ukind = _unit_kind(KEYS[key])
    if ukind is None:
        return int(value) if KEYS[key] == "int" else float(value)
    v = float(value) * _UNITS[ukind][DISPLAY_UNIT[ukind]]
    return v * TWO_PI if ukind == "freq" else v


def si_to_display(key: str, value: float) -> float:
    ukind = _unit_kind(KEYS[key])
    if ukind is None:
        return value
    v = value / TWO_PI if ukind == "freq" else value
    return v / _UNITS[ukind][DISPLAY_UNIT[ukind]]


# -- scenario --------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisFlags:
    bogoliubov: bool = True
    entanglement: bool = True
    wkb: bool = True
    p1p2: bool = True


@dataclass(frozen=True)
class Scenario:
    """Validated scenario.  ``values`` keeps the parsed SI values for sweeps."""

    name: str
    trap: TrapConfig
    drive_kind: str
    drive: Any  # RampPulse | CollisionModel | ExpansionModel | TabulatedWaveform | ConstantWaveform
    analysis: AnalysisFlags
    n_th: float | None
    temperature: float | None
    window: tuple[float | None, float | None]
    rtol: float
    atol: float
    output_dir: Path
    values: dict = field(repr=False, compare=False)
    base_dir: Path = field(default=Path("."), repr=False, compare=False)

    def with_value(self, key: str, value) -> "Scenario":
        """Copy with one parameter replaced (SI/angular units)."""
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        vals = dict(self.values)
        vals[key] = value
        return build_scenario(vals, base_dir=self.base_dir)


def parse_scenario(text: str, *, base_dir: str | Path = ".") -> Scenario:
    """Parse and validate a configuration document."""
    entries: dict[str, tuple[Any, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first defined on line {entries[key][1]})")
        entries[key] = (_convert(key, raw, lineno), lineno)
    return build_scenario({k: v for k, (v, _) in entries.items()}, lines={k: n for k, (_, n) in entries.items()}, base_dir=base_dir)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_scenario(text, base_dir=path.parent)


def build_scenario(values: dict, *, lines: dict | None = None, base_dir: str | Path = ".") -> Scenario:
    lines = lines or {}
    at = lambda k: f"line {lines[k]}: " if k in lines else ""
    base_dir = Path(base_dir)

    missing = [k for k in REQUIRED if k not in values]
    drives = sorted({k.split(".")[0] for k in values if k.split(".")[0] in DRIVES}, key=lambda d: min(lines.get(k, 0) for k in values if k.startswith(d + ".")))
    if not drives:
        missing.append("one drive section (" + ", ".join(f"{d}.*" for d in DRIVES) + ")")
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))
    if len(drives) > 1:
        where = ", ".join(f"{d} (line {min(lines.get(k, 0) for k in values if k.startswith(d + '.'))})" for d in drives)
        raise ConfigError(f"conflicting drives: {where}; exactly one drive is allowed")
    kind = drives[0]
    absent = [k for k in DRIVES[kind] if k not in values]
    if absent:
        raise ConfigError(f"missing required keys for the {kind} drive: " + ", ".join(absent))
    if "thermal.n_th" in values and "thermal.temperature" in values:
        raise ConfigError(f"{at('thermal.temperature')}give either thermal.n_th or thermal.temperature, not both")

    v = dict(DEFAULTS)
    v.update(values)
    for k, val in v.items():
        if KEYS[k] in ("freq", "time", "temperature") and not val > 0:
            if k == "pulse.start" or (k == "thermal.temperature" and val == 0):
                continue
            raise ConfigError(f"{at(k)}{k} must be positive, got {si_to_display(k, val):g} {DISPLAY_UNIT[_unit_kind(KEYS[k])]}")
    if v.get("thermal.n_th", 0.0) < 0:
        raise ConfigError(f"{at('thermal.n_th')}thermal.n_th must be non-negative")
    for k in ("ode.rtol", "ode.atol"):
        if not v[k] > 0:
            raise ConfigError(f"{at(k)}{k} must be positive")

    try:
        species = IonSpecies.from_atomic_mass(v["trap.mass_u"], v["trap.charge"])
        trap = TrapConfig(species, v["trap.n_ions"], v["trap.omega_rad"], v["trap.omega_ax_in"])
    except ValueError as exc:
        raise ConfigError(f"invalid trap: {exc}") from exc

    w_in = trap.omega_ax_in
    try:
        if kind == "pulse":
            drive = RampPulse(w_in, v["pulse.omega_ax_max"], v["pulse.ramp"], v["pulse.hold"], v["pulse.start"])
        elif kind == "collision":
            drive = CollisionModel(v["collision.delta_omega"] ** 2, v["collision.omega"], w_in)
        elif kind == "expansion":
            d = v["expansion.delta_omega"]
            drive = ExpansionModel(math.copysign(d * d, d), v["expansion.omega"], w_in)
        elif kind == "tabulated":
            path = Path(v["tabulated.path"])
            if not path.is_absolute():
                path = base_dir / path
            if not path.is_file():
                raise ConfigError(f"{at('tabulated.path')}waveform file {path} does not exist")
            drive = read_waveform_csv(path)
            w0 = float(np.sqrt(drive.omega_sq(drive.support()[0])))
            if not math.isclose(w0, w_in, rel_tol=1e-6):
                raise ConfigError(f"{at('tabulated.path')}waveform starts at {w0 / TWO_PI:g} Hz, trap.omega_ax_in is {w_in / TWO_PI:g} Hz")
        else:
            drive = ConstantWaveform(w_in, v["constant.duration"])
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(f"invalid {kind} drive: {exc}") from exc

    return Scenario(
        name=v["name"],
        trap=trap,
        drive_kind=kind,
        drive=drive,
        analysis=AnalysisFlags(v["analysis.bogoliubov"], v["analysis.entanglement"], v["analysis.wkb"], v["analysis.p1p2"]),
        n_th=v.get("thermal.n_th"),
        temperature=v.get("thermal.temperature"),
        window=(v.get("window.t_in"), v.get("window.t_out")),
        rtol=v["ode.rtol"],
        atol=v["ode.atol"],
        output_dir=Path(v["output.dir"]),
        values=dict(values),
        base_dir=base_dir,
    )


# -- results ---------------------------------------------------------------------


@dataclass(frozen=True)
class ModeResult:
    index: int
    omega_kappa: float  # rad/s
    omega_in: float  # radial mode frequency before the drive, rad/s
    alpha: complex
    beta: complex

    @property
    def beta_sq(self) -> float:
        return abs(self.beta) ** 2

    @property
    def xi(self) -> complex:
        return bg.squeezing_from_bogoliubov(bg.BogoliubovCoefficients(self.alpha, self.beta)).xi

    @property
    def normalization_error(self) -> float:
        return abs(abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1)


@dataclass(frozen=True)
class EntanglementResult:
    occupation: ThermalOccupation
    lambda_plus: float
    lambda_minus: float
    entangled: bool
    margin: float
    e_f: float | None


@dataclass
class ScenarioResult:
    scenario: Scenario
    positions: np.ndarray  # m
    separation: float  # m, outermost ions
    gamma: float
    omega_kappa: np.ndarray  # rad/s, ascending
    b_critical: float  # b at which the highest mode reaches Omega = 0
    window: tuple[float, float]
    t: np.ndarray  # s
    b: np.ndarray
    omega_ax: np.ndarray  # rad/s; signed sqrt where the confinement is repulsive
    b_min: tuple[float, float]  # (time, value)
    modes: list[ModeResult] = field(default_factory=list)
    p1p2_beta_sq: float | None = None
    wkb_exponent: float | None = None
    entanglement: EntanglementResult | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def delta_x(self) -> np.ndarray:
        return self.b * self.separation

    @property
    def critical_distance(self) -> float:
        return self.b_critical * self.separation

    @property
    def beta_sq_numeric(self) -> float | None:
        """|beta|^2 of the highest (rocking / zig-zag) mode."""
        return self.modes[-1].beta_sq if self.modes else None

    def summary(self) -> dict:
        out = {
            "name": self.scenario.name,
            "drive": self.scenario.drive_kind,
            "separation_um": self.separation * 1e6,
            "positions_um": [float(x) * 1e6 for x in self.positions],
            "critical_distance_um": self.critical_distance * 1e6,
            "t_in_us": self.window[0] * 1e6,
            "t_out_us": self.window[1] * 1e6,
            "b_min": self.b_min[1],
            "t_b_min_us": self.b_min[0] * 1e6,
            "modes": [
                {
                    "index": m.index,
                    "omega_kappa_over_2pi_MHz": m.omega_kappa / TWO_PI / 1e6,
                    "Omega_in_over_2pi_MHz": m.omega_in / TWO_PI / 1e6,
                    "alpha": [m.alpha.real, m.alpha.imag],
                    "beta": [m.beta.real, m.beta.imag],
                    "beta_sq": m.beta_sq,
                    "xi": [m.xi.real, m.xi.imag],
                }
                for m in self.modes
            ],
            "beta_sq_p1p2": self.p1p2_beta_sq,
            "wkb_exponent": self.wkb_exponent,
            "notes": list(self.notes),
        }
        if self.entanglement is not None:
            e = self.entanglement
            out["entanglement"] = {
                "n_plus": e.occupation.n_plus,
                "n_minus": e.occupation.n_minus,
                "lambda_plus_pt": e.lambda_plus,
                "lambda_minus_pt": e.lambda_minus,
                "entangled": e.entangled,
                "margin": e.margin,
                "entanglement_of_formation": e.e_f,
            }
        return out


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, StageError):
        raise
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


class _ConstantScale:
    """b = 1 for a drive that never leaves equilibrium."""

    def __init__(self, window):
        self._window = window

    def window(self):
        return self._window

    def scale(self, t):
        t = np.asarray(t)
        one = np.ones(np.shape(t))
        return one, 0 * one, 0 * one


def _first_maximum_after(traj, t_end: float, n: int = 20001) -> float | None:
    ts = np.linspace(t_end, traj.t_out, n)
    bd = traj._dense(ts)[1]
    idx = np.flatnonzero((bd[:-1] > 0) & (bd[1:] <= 0))
    if idx.size == 0:
        return None
    from scipy.optimize import brentq

    i = idx[0]
    return float(brentq(lambda s: traj._dense(s)[1], ts[i], ts[i + 1], xtol=1e-16))


def _solve_trajectory(s: Scenario):
    """Scale source, analysis window and axial waveform for the drive."""
    w_in = s.trap.omega_ax_in
    t_in_opt, t_out_opt = s.window
    drive = s.drive
    if isinstance(drive, (CollisionModel, ExpansionModel)):
        t0, t1 = drive.window()
        t0 = t0 if t_in_opt is None else t_in_opt
        t1 = t1 if t_out_opt is None else t_out_opt
        wf = axial_frequency_from_scale(drive, w_in, (t0, t1))
        return drive, (t0, t1), wf
    if isinstance(drive, ConstantWaveform):
        t0 = 0.0 if t_in_opt is None else t_in_opt
        t1 = t0 + drive.duration if t_out_opt is None else t_out_opt
        return _ConstantScale((t0, t1)), (t0, t1), drive
    # pulse or tabulated: integrate the scale ODE
    lo, hi = drive.support()
    t0 = lo if t_in_opt is None else t_in_opt
    if t_out_opt is not None:
        traj = solve_scale_ode(drive, w_in, (t0, t_out_opt), rtol=s.rtol, atol=s.atol)
        return traj, (t0, t_out_opt), drive
    # default t_out: first maximum of b after the waveform ends
    search = hi + 2 * TWO_PI / w_in
    traj = solve_scale_ode(drive, w_in, (t0, search), rtol=s.rtol, atol=s.atol)
    t1 = _first_maximum_after(traj, hi)
    if t1 is None:
        t1 = hi + TWO_PI / w_in
    return traj, (t0, t1), drive


def _mode_window(profile, window):
    # leave room for the final averaging period
    t0, t1 = window
    w2 = float(np.real(profile(t1)))
    if w2 <= 0:
        raise bg.ModeInstabilityError(t1)
    if t1 - t0 < 2 * TWO_PI / math.sqrt(w2):
        raise ValueError("analysis window is shorter than two radial periods")
    return t0, t1


def _solve_modes(s: Scenario, source, window, omega_kappa_sq) -> list[ModeResult]:
    kw = dict(rtol=s.rtol, atol=s.atol)
    out = []
    w_rad = s.trap.omega_rad
    for k, wk2 in enumerate(omega_kappa_sq):
        wk2 = max(float(wk2), 0.0)
        w_in = math.sqrt(w_rad**2 - wk2)
        if isinstance(source, (CollisionModel, ExpansionModel)) and wk2 > 0:
            win = None if s.window == (None, None) else window
            c = bg.model_bogoliubov(source, w_rad, wk2, mode=k, window=win, **kw)
        else:
            profile = bg.mode_profile(source, w_rad, wk2)
            sol = bg.integrate_mode(profile, _mode_window(profile, window), **kw)
            c = bg.extract_bogoliubov(sol, mode=k)
        out.append(ModeResult(k, math.sqrt(wk2), w_in, c.alpha, c.beta))
    return out


def _p1p2(s: Scenario, source, separation, b_min) -> float:
    if s.trap.n_ions != 2:
        raise cf.RegimeError("the p1p2 estimate is defined for two ions")
    w_in = s.trap.omega_ax_in
    t_min, bmin = b_min
    if isinstance(source, CollisionModel):
        w0 = float(np.sqrt(axial_frequency_from_scale(source, w_in).omega_sq(0.0) + 0j).real)
    elif isinstance(source, (ExpansionModel, _ConstantScale)):
        raise cf.RegimeError(f"the p1p2 estimate needs a collision, drive is {s.drive_kind}")
    else:
        w0 = math.sqrt(float(s.drive.omega_sq(t_min)))
    return cf.p1p2_beta(separation, bmin * separation, w0, w_in, s.trap.omega_rad)


def _wkb(s: Scenario, source, b_min, wk2) -> float:
    w_rad = s.trap.omega_rad
    if isinstance(source, CollisionModel):
        profile = bg.mode_profile(source, w_rad, wk2)
        return wkb_beta_exponent(profile, t0=0.0, timescale=1.0 / source.omega_col).exponent
    if isinstance(source, (ExpansionModel, _ConstantScale)):
        raise cf.RegimeError(f"no frequency dip to expand around for the {s.drive_kind} drive")
    t_min, _ = b_min
    b, bd, bdd = source.scale(t_min)
    b, bd, bdd = float(b), float(bd), float(bdd)
    w2_min = w_rad**2 - wk2 / b**3
    k2 = wk2 * (3 * bdd / b**4 - 12 * bd**2 / b**5)
    return taylor_wkb_exponent(w2_min, k2)


def _entanglement(s: Scenario, modes) -> EntanglementResult:
    if s.trap.n_ions != 2:
        raise cf.RegimeError("the entanglement analysis is defined for two ions")
    plus, minus = modes[0], modes[1]
    if s.temperature is not None:
        occ = ThermalOccupation.from_temperature(s.temperature, plus.omega_in, minus.omega_in)
    else:
        occ = ThermalOccupation.symmetric(s.n_th)
    alpha_plus = plus.alpha / abs(plus.alpha) if plus.beta_sq < 1e-12 else plus.alpha
    S = squeeze_transform(bg.BogoliubovCoefficients(minus.alpha, minus.beta), alpha_plus, tol=1e-6)
    sigma = basis_change(evolve_covariance(thermal_covariance(occ), S))
    lam_p, lam_m = pt_symplectic_eigenvalues(sigma)
    entangled, margin = is_entangled(sigma)
    d1, d2 = sigma.block_determinants()
    e_f = entanglement_of_formation(lam_m) if math.isclose(d1, d2, rel_tol=1e-9) else None
    return EntanglementResult(occ, lam_p, lam_m, entangled, margin, e_f)


def run_scenario(s: Scenario, *, n_series: int = 1001) -> ScenarioResult:
    """Run every requested stage; numerical failures raise :class:`StageError`."""
    chain = _stage("equilibrium", solve_equilibrium, s.trap)
    spec = _stage("modes", lambda: mode_spectrum(coupling_matrix(chain)))
    wk2 = np.clip(spec.eigenvalues, 0.0, None)
    b_crit = critical_scale(s.trap, float(wk2[-1])) if wk2[-1] > 0 else 0.0

    source, window, waveform = _stage("scale", _solve_trajectory, s)
    t = np.linspace(window[0], window[1], n_series)
    b = np.asarray(source.scale(t)[0], dtype=float)
    w2 = np.asarray(waveform.omega_sq(t), dtype=float)
    omega_ax = np.sign(w2) * np.sqrt(np.abs(w2))
    if isinstance(source, CollisionModel):
        b_min = (0.0, source.b_min)
    elif hasattr(source, "minimum"):
        b_min = source.minimum()
    else:
        i = int(np.argmin(b))
        b_min = (float(t[i]), float(b[i]))

    result = ScenarioResult(
        s, chain.positions, chain.separation, chain.gamma, spec.frequencies, b_crit, window, t, b, omega_ax, b_min
    )
    if b_crit >= b_min[1]:
        result.notes.append(f"b reaches {b_min[1]:.6g} below the critical scale {b_crit:.6g}")

    if s.analysis.bogoliubov:
        result.modes = _stage("bogoliubov", _solve_modes, s, source, window, wk2)
    if s.analysis.p1p2:
        try:
            result.p1p2_beta_sq = _stage("p1p2", _p1p2, s, source, chain.separation, b_min)
        except StageError as exc:
            if not isinstance(exc.cause, cf.RegimeError):
                raise
            result.notes.append(str(exc))
    if s.analysis.wkb and wk2[-1] > 0:
        try:
            result.wkb_exponent = _stage("wkb", _wkb, s, source, b_min, float(wk2[-1]))
        except StageError as exc:
            if not isinstance(exc.cause, (cf.RegimeError, WKBError)):
                raise
            result.notes.append(str(exc))
    if s.analysis.entanglement and result.modes and (s.n_th is not None or s.temperature is not None):
        try:
            result.entanglement = _stage("entanglement", _entanglement, s, result.modes)
        except StageError as exc:
            if not isinstance(exc.cause, cf.RegimeError):
                raise
            result.notes.append(str(exc))
    return result


# -- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Parameter key and its values in SI/angular units."""

    key: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.key not in KEYS or KEYS[self.key] not in NUMERIC_KINDS:
            raise ConfigError(f"sweep key {self.key!r} is not a numeric scenario field")
        if len(self.values) < 2:
            raise ConfigError("a sweep needs at least two values")

    @classmethod
    def from_range(cls, key: str, spec: str) -> "SweepSpec":
        """``start:stop:count[:log]`` in the key's display unit (MHz, us, uK)."""
        parts = spec.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
            raise ConfigError(f"range {spec!r} is not start:stop:count[:log]")
        try:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"range {spec!r}: {exc}") from exc
        if n < 2:
            raise ConfigError("a sweep needs at least two values")
        if key not in KEYS or KEYS[key] not in NUMERIC_KINDS:
            raise ConfigError(f"sweep key {key!r} is not a numeric scenario field")
        if len(parts) == 4 and parts[3] == "log":
            if a <= 0 or b <= 0:
                raise ConfigError("log spacing needs positive endpoints")
            pts = np.geomspace(a, b, n)
        else:
            pts = np.linspace(a, b, n)
        return cls(key, tuple(display_to_si(key, float(p)) for p in pts))

    def display_values(self) -> list[float]:
        return [si_to_display(self.key, v) for v in self.values]


@dataclass
class SweepTable:
    key: str
    rows: list[dict]

    COLUMNS = ("value", "beta_sq_numeric", "beta_sq_p1p2", "wkb_exponent", "error")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        unit = _unit_kind(KEYS[self.key])
        head = f"{self.key}" + (f"_{DISPLAY_UNIT[unit]}" if unit else "")
        w.writerow((head,) + self.COLUMNS[1:])
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.COLUMNS])
        return buf.getvalue()


def _sweep_row(args) -> dict:
    base, key, value = args
    row = {"value": si_to_display(key, value), "beta_sq_numeric": None, "beta_sq_p1p2": None, "wkb_exponent": None, "error": ""}
    try:
        r = run_scenario(base.with_value(key, value))
        row.update(beta_sq_numeric=r.beta_sq_numeric, beta_sq_p1p2=r.p1p2_beta_sq, wkb_exponent=r.wkb_exponent)
    except (ConfigError, StageError, ScaleIntegrationError) as exc:
        row["error"] = str(exc)
    return row


def run_sweep(s: Scenario, sweep: SweepSpec, *, workers: int | None = None) -> SweepTable:
    """Evaluate the scenario at every sweep value; failures go to the error column."""
    jobs = [(s, sweep.key, v) for v in sweep.values]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    return SweepTable(sweep.key, rows)


# -- figure tables ---------------------------------------------------------------

FIGURE_SCHEMAS = {
    "fig_wax.csv": ("t_us", "omega_ax_over_2pi_MHz"),
    "fig_delta_x.csv": ("t_us", "delta_x_um", "critical_distance_um"),
    "fig_comparison.csv": ("omega_ax_max_over_2pi_MHz", "beta_sq_numeric", "beta_sq_p1p2"),
}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, str)):
        return str(x)
    return repr(float(x))


def _write(path: Path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_figures(result: ScenarioResult, outdir: str | Path) -> list[Path]:
    """Write ``fig_wax.csv`` and (two ions) ``fig_delta_x.csv``."""
    outdir = Path(outdir)
    t_us = result.t * 1e6
    paths = [_write(outdir / "fig_wax.csv", FIGURE_SCHEMAS["fig_wax.csv"], zip(t_us, result.omega_ax / TWO_PI / 1e6))]
    if result.scenario.trap.n_ions == 2:
        dx = result.delta_x * 1e6
        crit = np.full_like(dx, result.critical_distance * 1e6)
        paths.append(_write(outdir / "fig_delta_x.csv", FIGURE_SCHEMAS["fig_delta_x.csv"], zip(t_us, dx, crit)))
    return paths


def write_comparison(table: SweepTable | None, outdir: str | Path) -> Path:
    """Write ``fig_comparison.csv`` from an ``omega_ax_max`` sweep (header only when empty)."""
    rows = []
    if table is not None:
        if table.key != "pulse.omega_ax_max":
            raise ValueError("the comparison figure needs a pulse.omega_ax_max sweep")
        rows = [(r["value"], r["beta_sq_numeric"], r["beta_sq_p1p2"]) for r in table.rows]
    return _write(Path(outdir) / "fig_comparison.csv", FIGURE_SCHEMAS["fig_comparison.csv"], rows)


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Re-parse an emitted figure table; checks the header against the schema."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header = tuple(rows[0])
    expected = FIGURE_SCHEMAS.get(path.name)
    if expected is not None and header != expected:
        raise ValueError(f"{path.name}: header {header} does not match {expected}")
    cols = list(zip(*rows[1:])) if len(rows) > 1 else [()] * len(header)
    return {h: np.array([float(x) if x else math.nan for x in c]) for h, c in zip(header, cols)}
