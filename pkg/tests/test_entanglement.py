import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants

from phonon_pairs.bogoliubov import BogoliubovCoefficients
from phonon_pairs.entanglement import (
    D,
    ION,
    J,
    NORMAL,
    CovarianceMatrix,
    ThermalOccupation,
    basis_change,
    bose_occupation,
    closed_form_pt_eigenvalues,
    entanglement_of_formation,
    evolve_covariance,
    is_entangled,
    perturbative_state,
    pt_symplectic_eigenvalues,
    squeeze_transform,
    thermal_covariance,
)

occupations = st.floats(0, 5)
radii = st.floats(0, 3)
phases = st.floats(-math.pi, math.pi)


def squeezed_thermal(n_plus, n_minus, r, phase_a=0.0, phase_b=0.0, phase_plus=0.0):
    coeffs = BogoliubovCoefficients(math.cosh(r) * cmath.exp(1j * phase_a), math.sinh(r) * cmath.exp(1j * phase_b))
    S = squeeze_transform(coeffs, cmath.exp(1j * phase_plus))
    return evolve_covariance(thermal_covariance(ThermalOccupation(n_plus, n_minus)), S)


def test_d_is_orthogonal_involution():
    assert D @ D == pytest.approx(np.eye(4), abs=1e-12)
    assert D @ D.T == pytest.approx(np.eye(4), abs=1e-12)


def test_thermal_covariance_values():
    assert thermal_covariance(ThermalOccupation(0, 0)).sigma == pytest.approx(np.eye(4) / 2)
    assert np.diag(thermal_covariance(ThermalOccupation.symmetric(0.05)).sigma) == pytest.approx([0.525] * 4)
    with pytest.raises(ValueError):
        ThermalOccupation(-0.1, 0)


@given(n_plus=st.floats(0, 10), n_minus=st.floats(0, 10))
def test_thermal_states_physical(n_plus, n_minus):
    assert thermal_covariance(ThermalOccupation(n_plus, n_minus)).is_physical()


def test_bose_occupation():
    w = 2 * math.pi * 3.5e6
    t_of = lambda x: constants.hbar * w / (constants.k * x)
    assert bose_occupation(0.0, w) == 0.0
    assert bose_occupation(t_of(math.log(2)), w) == pytest.approx(1.0, rel=1e-12)
    assert bose_occupation(t_of(math.log(21)), w) == pytest.approx(0.05, rel=1e-12)
    assert ThermalOccupation.from_temperature(t_of(math.log(2)), w, w).n_minus == pytest.approx(1.0)
    with pytest.raises(ValueError):
        bose_occupation(-1.0, w)


def test_basis_change():
    eye = CovarianceMatrix(np.eye(4), NORMAL)
    assert basis_change(eye).sigma == pytest.approx(np.eye(4))
    assert basis_change(eye).basis == ION
    sym = thermal_covariance(ThermalOccupation(0.3, 0.3))
    assert basis_change(sym).sigma == pytest.approx(sym.sigma, abs=1e-15)
    asym = thermal_covariance(ThermalOccupation(0.7, 0.2))
    ion = basis_change(asym).sigma
    assert ion[0, 2] == pytest.approx((0.7 - 0.2) / 2)
    assert ion[1, 3] == pytest.approx((0.7 - 0.2) / 2)
    assert basis_change(basis_change(asym)).sigma == pytest.approx(asym.sigma, abs=1e-12)


def test_squeeze_transform_examples():
    assert squeeze_transform(BogoliubovCoefficients(1, 0)).matrix == pytest.approx(np.eye(4))
    r = 0.7
    S = squeeze_transform(BogoliubovCoefficients(math.cosh(r), math.sinh(r))).matrix
    assert S == pytest.approx(np.diag([1, 1, math.exp(-r), math.exp(r)]))
    out = evolve_covariance(thermal_covariance(ThermalOccupation(0, 0)), squeeze_transform(BogoliubovCoefficients(math.cosh(r), math.sinh(r))))
    assert np.diag(out.sigma) == pytest.approx([0.5, 0.5, math.exp(-2 * r) / 2, math.exp(2 * r) / 2])
    with pytest.raises(ValueError):
        squeeze_transform(BogoliubovCoefficients(1.0, 0.5))
    with pytest.raises(ValueError):
        squeeze_transform(BogoliubovCoefficients(1.0, 0.0), 1.2)


@settings(max_examples=200)
@given(r=radii, pa=phases, pb=phases, pp=phases, n_plus=occupations, n_minus=occupations)
def test_squeezing_properties(r, pa, pb, pp, n_plus, n_minus):
    coeffs = BogoliubovCoefficients(math.cosh(r) * cmath.exp(1j * pa), math.sinh(r) * cmath.exp(1j * pb))
    S = squeeze_transform(coeffs, cmath.exp(1j * pp))
    assert S.symplectic_error() < 1e-12 * max(1.0, math.exp(2 * r))
    sigma_in = thermal_covariance(ThermalOccupation(n_plus, n_minus))
    out = evolve_covariance(sigma_in, S)
    assert out.is_physical(tol=1e-10 * max(1.0, math.exp(2 * r)))
    assert out.block_determinants() == pytest.approx(sigma_in.block_determinants(), rel=1e-10)


def test_pt_eigenvalue_examples():
    assert pt_symplectic_eigenvalues(thermal_covariance(ThermalOccupation(0, 0))) == pytest.approx((0.5, 0.5))
    assert pt_symplectic_eigenvalues(squeezed_thermal(0, 0, 1.0)) == pytest.approx((math.e / 2, 0.5 / math.e), rel=1e-12)
    assert (math.e / 2, 0.5 / math.e) == pytest.approx((1.3591, 0.1839), abs=1e-4)
    assert pt_symplectic_eigenvalues(thermal_covariance(ThermalOccupation(0.5, 0.5))) == pytest.approx((1.0, 1.0))


@settings(max_examples=200)
@given(n_plus=occupations, n_minus=occupations, r=radii, pa=phases, pb=phases)
def test_pt_eigenvalues_match_closed_form(n_plus, n_minus, r, pa, pb):
    sigma = squeezed_thermal(n_plus, n_minus, r, pa, pb)
    lam = pt_symplectic_eigenvalues(sigma)
    occ = ThermalOccupation(n_plus, n_minus)
    assert lam == pytest.approx(closed_form_pt_eigenvalues(occ, r), rel=1e-10)
    assert lam[0] * lam[1] == pytest.approx((1 + 2 * n_plus) * (1 + 2 * n_minus) / 4, rel=1e-10)


def test_entanglement_verdicts():
    ok, margin = is_entangled(squeezed_thermal(0, 0, 0.01))
    assert ok and margin > 0
    assert not is_entangled(thermal_covariance(ThermalOccupation(0.1, 0.1)))[0]


@pytest.mark.parametrize("n", [0.0, 0.025, 0.3, 2.0])
def test_entanglement_boundary(n):
    sigma = squeezed_thermal(n, n, math.log(1 + 2 * n))
    assert is_entangled(sigma)[1] == pytest.approx(0.0, abs=1e-10)


def test_entanglement_of_formation():
    assert entanglement_of_formation(0.5) == 0.0
    assert entanglement_of_formation(0.7) == 0.0
    direct = (0.5625 / 0.5) * math.log(1.125) - (0.0625 / 0.5) * math.log(0.125)
    assert entanglement_of_formation(0.25) == pytest.approx(direct, abs=1e-12)
    assert direct == pytest.approx(0.3925, abs=1e-3)
    grid = np.linspace(1e-4, 0.5 - 1e-6, 2000)
    vals = np.array([entanglement_of_formation(x) for x in grid])
    assert np.all(np.diff(vals) < 0)
    assert entanglement_of_formation(0.5 - 1e-9) < 1e-8  # continuous at the boundary
    with pytest.raises(ValueError):
        entanglement_of_formation(0.0)


def test_perturbative_examples():
    assert perturbative_state(0.0, 0.01).entangled_first_order
    assert perturbative_state(0.0, 0.01).entangled_exact
    edge = perturbative_state(0.05, 0.05)
    assert not edge.entangled_first_order  # boundary: |xi| = n_th is not strictly larger
    above = perturbative_state(0.05, 0.06)
    assert above.entangled_first_order and above.entangled_exact and above.agrees and above.in_regime
    assert above.pt_eigenvalues == pytest.approx((0.11, -0.01))
    assert not perturbative_state(0.5, 0.01).in_regime


@settings(max_examples=500)
@given(n_th=st.floats(0, 0.05), xi=st.floats(0, 0.1))
def test_first_order_criterion_disagrees_only_near_threshold(n_th, xi):
    s = perturbative_state(n_th, xi)
    if not s.agrees:
        assert abs(xi - n_th) <= 0.15 * n_th
