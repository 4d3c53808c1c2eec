"""Two-mode Gaussian states of the radial motion of two ions.

Phase-space vectors are ordered ``(y_1, p_1, y_2, p_2)`` in the ion basis and
``(y_+, p_+, y_-, p_-)`` in the normal-mode basis, non-dimensionalised so the
vacuum covariance is ``identity / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .bogoliubov import BogoliubovCoefficients

__all__ = [
    "ION",
    "NORMAL",
    "D",
    "J",
    "PT",
    "CovarianceMatrix",
    "ThermalOccupation",
    "SymplecticTransform",
    "PerturbativeState",
    "thermal_covariance",
    "bose_occupation",
    "basis_change",
    "squeeze_transform",
    "evolve_covariance",
    "pt_symplectic_eigenvalues",
    "closed_form_pt_eigenvalues",
    "is_entangled",
    "entanglement_of_formation",
    "perturbative_state",
]

ION = "ion"
NORMAL = "normal"

#: (y_1, p_1, y_2, p_2) -> (y_+, p_+, y_-, p_-); orthogonal and its own inverse
D = np.array(
    [
        [1, 0, 1, 0],
        [0, 1, 0, 1],
        [1, 0, -1, 0],
        [0, 1, 0, -1],
    ],
    dtype=float,
) / math.sqrt(2)

#: symplectic form for (q_1, p_1, q_2, p_2) ordering
J = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))

#: partial transposition of ion 1 (p_1 -> -p_1)
PT = np.diag([1.0, -1.0, 1.0, 1.0])


@dataclass(frozen=True)
class CovarianceMatrix:
    sigma: np.ndarray
    basis: str = NORMAL

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.shape != (4, 4):
            raise ValueError("covariance matrix must be 4x4")
        if not np.allclose(s, s.T, rtol=0, atol=1e-12 * max(1.0, np.abs(s).max())):
            raise ValueError("covariance matrix must be symmetric")
        if self.basis not in (ION, NORMAL):
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "sigma", 0.5 * (s + s.T))

    def uncertainty_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of ``sigma + i J / 2`` (Hermitian), non-negative for physical states."""
        return np.linalg.eigvalsh(self.sigma + 0.5j * J)

    def is_physical(self, tol: float = 1e-10) -> bool:
        return bool(self.uncertainty_eigenvalues().min() >= -tol)

    def block_determinants(self) -> tuple[float, float]:
        return float(np.linalg.det(self.sigma[:2, :2])), float(np.linalg.det(self.sigma[2:, 2:]))


@dataclass(frozen=True)
class ThermalOccupation:
    n_plus: float
    n_minus: float

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError("occupation numbers must be non-negative")

    @classmethod
    def symmetric(cls, n_th: float) -> "ThermalOccupation":
        """Split a total radial occupation ``n_th`` equally over the two modes."""
        return cls(n_th / 2, n_th / 2)

    @classmethod
    def from_temperature(cls, temperature: float, omega_plus: float, omega_minus: float) -> "ThermalOccupation":
        return cls(bose_occupation(temperature, omega_plus), bose_occupation(temperature, omega_minus))


@dataclass(frozen=True)
class SymplecticTransform:
    matrix: np.ndarray
    kind: str = "composite"

    def symplectic_error(self) -> float:
        S = self.matrix
        return float(np.abs(S @ J @ S.T - J).max())


@dataclass(frozen=True)
class PerturbativeState:
    """First-order description of a weakly squeezed, weakly thermal pair of ions."""

    p_vacuum: float
    p_one_phonon_each: float  # per ion, |1>_1|0>_2 and |0>_1|1>_2
    pt_eigenvalues: tuple[float, float]  # n_th +- |xi|
    entangled_first_order: bool
    entangled_exact: bool
    in_regime: bool

    @property
    def agrees(self) -> bool:
        return self.entangled_first_order == self.entangled_exact


def bose_occupation(temperature: float, omega: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(hbar omega / k_B T) - 1)``."""
    if temperature < 0 or omega <= 0:
        raise ValueError("need temperature >= 0 and omega > 0")
    if temperature == 0:
        return 0.0
    x = constants.hbar * omega / (constants.k * temperature)
    return 1.0 / math.expm1(x)


def thermal_covariance(occ: ThermalOccupation) -> CovarianceMatrix:
    d = np.array([1 + 2 * occ.n_plus] * 2 + [1 + 2 * occ.n_minus] * 2) / 2
    return CovarianceMatrix(np.diag(d), NORMAL)


def basis_change(sigma: CovarianceMatrix) -> CovarianceMatrix:
    """Switch between ion and normal-mode bases (``D sigma D``)."""
    other = ION if sigma.basis == NORMAL else NORMAL
    return CovarianceMatrix(D @ sigma.sigma @ D, other)


def squeeze_transform(coeffs: BogoliubovCoefficients, alpha_plus: complex = 1.0, *, tol: float = 1e-8) -> SymplecticTransform:
    """Normal-basis symplectic map: rotation of the + mode, Bogoliubov map of the - mode."""
    a, b = complex(coeffs.alpha), complex(coeffs.beta)
    if abs(abs(a) ** 2 - abs(b) ** 2 - 1) > tol:
        raise ValueError("Bogoliubov coefficients are not normalised")
    ap = complex(alpha_plus)
    if abs(abs(ap) - 1) > tol:
        raise ValueError("the centre-of-mass coefficient must be a pure phase")
    S = np.zeros((4, 4))
    S[:2, :2] = [[ap.real, ap.imag], [-ap.imag, ap.real]]
    S[2:, 2:] = [[(a - b).real, (a + b).imag], [-(a - b).imag, (a + b).real]]
    return SymplecticTransform(S, "squeeze")


def evolve_covariance(sigma_in: CovarianceMatrix, transform: SymplecticTransform) -> CovarianceMatrix:
    S = transform.matrix
    return CovarianceMatrix(S @ sigma_in.sigma @ S.T, sigma_in.basis)


def pt_symplectic_eigenvalues(sigma: CovarianceMatrix) -> tuple[float, float]:
    """Symplectic eigenvalues ``(lambda_+, lambda_-)`` of the partial transpose.

    Computed as the positive eigenvalues of ``i J sigma^PT`` in the ion basis.
    """
    if sigma.basis != ION:
        sigma = basis_change(sigma)
    spt = PT @ sigma.sigma @ PT
    ev = np.linalg.eigvals(1j * J @ spt)
    if np.abs(ev.imag).max() > 1e-12 * max(1.0, np.abs(ev).max()):
        raise np.linalg.LinAlgError(f"complex symplectic spectrum {ev}")
    pos = np.sort(ev.real[ev.real > 0])
    if pos.size != 2:
        raise np.linalg.LinAlgError(f"expected two positive eigenvalues, got {ev.real}")
    return float(pos[1]), float(pos[0])


def closed_form_pt_eigenvalues(occ: ThermalOccupation, xi_minus_abs: float) -> tuple[float, float]:
    g = 0.5 * math.sqrt((1 + 2 * occ.n_minus) * (1 + 2 * occ.n_plus))
    return g * math.exp(xi_minus_abs), g * math.exp(-xi_minus_abs)


def is_entangled(sigma: CovarianceMatrix) -> tuple[bool, float]:
    """Peres-Horodecki verdict and margin ``1/2 - lambda_-``."""
    lam_minus = pt_symplectic_eigenvalues(sigma)[1]
    margin = 0.5 - lam_minus
    return margin > 0, margin


def _f(x: float) -> float:
    p = (0.5 + x) ** 2 / (2 * x)
    m = (0.5 - x) ** 2 / (2 * x)
    return p * math.log(p) - (m * math.log(m) if m > 0 else 0.0)


def entanglement_of_formation(lambda_minus_pt: float) -> float:
    """Entanglement of formation of a symmetric two-mode Gaussian state."""
    if lambda_minus_pt <= 0:
        raise ValueError("symplectic eigenvalue must be positive")
    if lambda_minus_pt >= 0.5:
        return 0.0
    return _f(lambda_minus_pt)


def perturbative_state(n_th: float, xi_minus: complex, *, regime: float = 0.1) -> PerturbativeState:
    """Leading-order thermal density matrix and entanglement verdict.

    The exact verdict uses the Gaussian criterion with ``n_+ = n_- = n_th/2``;
    ``in_regime`` is false when either parameter exceeds ``regime``.
    """
    if n_th < 0:
        raise ValueError("n_th must be non-negative")
    r = abs(xi_minus)
    occ = ThermalOccupation.symmetric(n_th)
    # lambda_- < 1/2 in log form, which keeps tiny margins representable
    threshold = 0.5 * (math.log1p(2 * occ.n_plus) + math.log1p(2 * occ.n_minus))
    return PerturbativeState(
        p_vacuum=1 - n_th,
        p_one_phonon_each=n_th / 2,
        pt_eigenvalues=(n_th + r, n_th - r),
        entangled_first_order=r > n_th,
        entangled_exact=r > threshold,
        in_regime=n_th <= regime and r <= regime,
    )
