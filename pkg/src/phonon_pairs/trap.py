"""Static ion chain: Coulomb strength, equilibrium positions and radial modes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants

__all__ = [
    "IonSpecies",
    "TrapConfig",
    "EquilibriumChain",
    "ModeSpectrum",
    "EquilibriumError",
    "MG25",
    "coulomb_constant",
    "solve_equilibrium",
    "coupling_matrix",
    "mode_spectrum",
    "critical_scale",
]


class EquilibriumError(RuntimeError):
    """Raised when the force-balance iteration does not converge."""


@dataclass(frozen=True)
class IonSpecies:
    mass: float  # kg
    charge_multiple: int = 1

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"ion mass must be positive, got {self.mass}")
        if int(self.charge_multiple) != self.charge_multiple or self.charge_multiple < 1:
            raise ValueError(f"charge_multiple must be a positive integer, got {self.charge_multiple}")

    @classmethod
    def from_atomic_mass(cls, mass_u: float, charge_multiple: int = 1) -> "IonSpecies":
        return cls(mass_u * constants.atomic_mass, charge_multiple)


MG25 = IonSpecies.from_atomic_mass(25.0)


@dataclass(frozen=True)
class TrapConfig:
    """Linear trap with constant radial and initial axial secular frequencies.

    All frequencies are angular (rad/s).
    """

    species: IonSpecies
    n_ions: int
    omega_rad: float
    omega_ax_in: float

    def __post_init__(self):
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise ValueError(f"n_ions must be a positive integer, got {self.n_ions}")
        if not self.omega_ax_in > 0:
            raise ValueError("omega_ax_in must be positive")
        if not self.omega_rad > self.omega_ax_in:
            raise ValueError(
                "radial confinement must be stronger than axial: "
                f"omega_rad={self.omega_rad:g} <= omega_ax_in={self.omega_ax_in:g}"
            )


@dataclass(frozen=True)
class EquilibriumChain:
    positions: np.ndarray  # m, ascending
    gamma: float  # m^3/s^2
    omega_ax: float  # axial frequency the chain is balanced against

    @property
    def n_ions(self) -> int:
        return len(self.positions)

    @property
    def separation(self) -> float:
        """Distance between the outermost ions (the two-ion separation for N=2)."""
        return float(self.positions[-1] - self.positions[0])

    def force_residual(self) -> np.ndarray:
        return _force_balance(self.positions, self.gamma, self.omega_ax**2)


@dataclass(frozen=True)
class ModeSpectrum:
    eigenvalues: np.ndarray  # omega_kappa^2, ascending
    eigenvectors: np.ndarray  # columns are mode shapes

    @property
    def frequencies(self) -> np.ndarray:
        """omega_kappa = sqrt(eigenvalue), with round-off negatives clipped to zero."""
        return np.sqrt(np.clip(self.eigenvalues, 0.0, None))


def coulomb_constant(species: IonSpecies) -> float:
    """Coulomb strength gamma = q^2 / (4 pi eps0 m), in m^3/s^2."""
    q = species.charge_multiple * constants.elementary_charge
    return q**2 / (4 * np.pi * constants.epsilon_0 * species.mass)


def _force_balance(x, gamma, omega_sq):
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    coulomb = np.sum(np.sign(diff) / diff**2, axis=1)
    return omega_sq * x - gamma * coulomb


def solve_equilibrium(config: TrapConfig, *, rtol: float = 1e-10, max_iter: int = 200) -> EquilibriumChain:
    """Equilibrium positions of the linear chain by damped Newton iteration.

    The problem is solved in units of ``(gamma / omega_ax_in^2)^(1/3)``, where the
    force balance reads ``x_k = sum_l sign(x_k - x_l) / (x_k - x_l)^2``.  The
    Jacobian of that residual is ``I + 2 M`` with ``M`` the (scaled) coupling
    matrix, so every Newton step is a small dense solve.
    """
    gamma = coulomb_constant(config.species)
    n = config.n_ions
    length = (gamma / config.omega_ax_in**2) ** (1 / 3)
    if n == 1:
        return EquilibriumChain(np.zeros(1), gamma, config.omega_ax_in)

    spacing = 2.018 / n**0.559  # empirical mean spacing of long chains
    x = (np.arange(n) - (n - 1) / 2) * spacing
    if n == 2:
        x = np.array([-0.5, 0.5]) * 2 ** (1 / 3)

    res = _force_balance(x, 1.0, 1.0)
    for _ in range(max_iter):
        scale = max(np.max(np.abs(x)), 1.0)
        if np.max(np.abs(res)) < rtol * scale:
            break
        jac = np.eye(n) + 2 * _scaled_coupling(x)
        step = np.linalg.solve(jac, -res)
        norm0 = np.linalg.norm(res)
        damping = 1.0
        while True:
            trial = x + damping * step
            if np.all(np.diff(trial) > 0):
                trial_res = _force_balance(trial, 1.0, 1.0)
                if np.linalg.norm(trial_res) < norm0 or damping < 1e-3:
                    break
            damping *= 0.5
            if damping < 1e-12:
                raise EquilibriumError("Newton step collapsed ion ordering")
        x, res = trial, trial_res
    else:
        raise EquilibriumError(
            f"equilibrium did not converge in {max_iter} iterations; "
            f"max residual {np.max(np.abs(res)):.3e} (scaled units)"
        )
    # enforce exact mirror symmetry and zero centre of charge
    x = 0.5 * (x - x[::-1])
    return EquilibriumChain(x * length, gamma, config.omega_ax_in)


def _scaled_coupling(x):
    diff = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(diff, np.inf)
    inv = 1.0 / diff**3
    return np.diag(inv.sum(axis=1)) - inv


def coupling_matrix(chain: EquilibriumChain) -> np.ndarray:
    """Radial coupling matrix ``M_kl`` whose eigenvalues are omega_kappa^2."""
    x = np.asarray(chain.positions, dtype=float)
    if len(x) > 1 and np.min(np.abs(np.diff(np.sort(x)))) <= 0:
        raise ValueError("coincident ion positions in chain")
    return chain.gamma * _scaled_coupling(x)


def mode_spectrum(M: np.ndarray) -> ModeSpectrum:
    """Eigen-decomposition of a symmetric coupling matrix.

    Eigenvalues are sorted ascending and each eigenvector's first significant
    component is made positive so the output is deterministic.
    """
    M = np.asarray(M, dtype=float)
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(np.abs(M).max(), 1e-300)):
        raise ValueError("coupling matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        k = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())[0]
        if col[k] < 0:
            v[:, j] = -col
    return ModeSpectrum(w, v)


def critical_scale(config: TrapConfig, omega_kappa_sq: float | None = None) -> float:
    """Scale factor ``b`` at which the mode frequency Omega_kappa^2 reaches zero.

    Defaults to the two-ion rocking mode, ``omega_kappa^2 = omega_ax_in^2``.
    """
    if omega_kappa_sq is None:
        omega_kappa_sq = config.omega_ax_in**2
    return (omega_kappa_sq / config.omega_rad**2) ** (1 / 3)
