import pytest
from unittest.mock import patch
import numpy as np
from hypothesis import given, settings, strategies as st

from qtradeoff.core.constructions import (
    BlochObservable,
    anticommuting_set,
    appendix_c_pair,
    mub_set,
    projective_povm,
    qubit_observable,
)
from qtradeoff.core.measures import DistanceKind, EntropyKind
from qtradeoff.core.optimizer import random_pure_state
from qtradeoff.core.qcore import (
    DimensionMismatchError,
    PureState,
    ValidationError,
    pauli,
    projective_instrument,
    spectral_decompose,
)
from qtradeoff.core.tradeoffs import (
    INHERITED_NOTE,
    anticommuting_bound,
    average_disturbance,
    average_entropy,
    common_eigenvector,
    disturbance_report,
    metaur_sum,
    mub_bound,
    mub_probability_sum,
    qubit_bound,
    qubit_geometry,
    qubit_objective,
    qubit_objective_minimum,
    qubit_pair,
    uncertainty_zero_state,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def pauli_instruments():
    return [projective_instrument(spectral_decompose(pauli(k))) for k in "XYZ"]


def test_bounds():
    assert mub_bound(3, 2) == pytest.approx(1 / 3)
    assert mub_bound(4, 3) == pytest.approx(0.5)
    assert anticommuting_bound(3) == pytest.approx(1 / 3)
    assert anticommuting_bound(2) == pytest.approx(0.25)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_pauli_average_is_one_third(seed):
    instruments = [projective_instrument(spectral_decompose(pauli(k))) for k in "XYZ"]
    psi = random_pure_state(seed, 2)
    assert average_disturbance(DistanceKind.FIDELITY, instruments, psi) == pytest.approx(1 / 3, abs=1e-12)


def test_average_disturbance_rejects_bad_input(pauli_instruments):
    with pytest.raises(ValidationError):
        average_disturbance(DistanceKind.FIDELITY, [], PureState.basis(2, 0))
    with pytest.raises(DimensionMismatchError):
        average_disturbance(DistanceKind.FIDELITY, pauli_instruments, PureState.basis(3, 0))


def test_average_entropy_of_certain_outcomes():
    z = projective_povm(np.eye(2, dtype=complex))
    assert average_entropy(EntropyKind.shannon(), [z, z], PureState.basis(2, 1)) == 0.0


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_complete_mub_probability_sum(seed):
    family = mub_set(3, 4)
    assert mub_probability_sum(family, random_pure_state(seed, 3)) == pytest.approx(2.0, abs=1e-12)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_qubit_expectation_sum_is_one(seed):
    assert metaur_sum(anticommuting_set(3), random_pure_state(seed, 2)) == pytest.approx(1.0, abs=1e-12)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_expectation_sum_bounded(seed):
    assert metaur_sum(anticommuting_set(5), random_pure_state(seed, 4)) <= 1 + 1e-12


def test_qubit_geometry_at_right_angle():
    geometry = qubit_geometry(*qubit_pair(np.pi / 2))
    assert geometry.theta == pytest.approx(np.pi / 2)
    assert geometry.c == pytest.approx(np.sqrt(0.5))
    np.testing.assert_allclose(geometry.r_plus, np.array([1, 0, 1]) / np.sqrt(2), atol=1e-12)
    np.testing.assert_allclose(geometry.r_minus, np.array([1, 0, -1]) / np.sqrt(2), atol=1e-12)
    assert geometry.r_plus @ geometry.r_minus == pytest.approx(0.0, abs=1e-12)


def test_both_bisectors_minimize_at_right_angle():
    a, b = qubit_pair(np.pi / 2)
    geometry = qubit_geometry(a, b)
    instruments = [projective_instrument(qubit_observable(x)) for x in (a, b)]
    for r in (geometry.r_plus, geometry.r_minus):
        value = average_disturbance(DistanceKind.FIDELITY, instruments, PureState.from_bloch(r))
        assert value == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("theta", [np.pi / 3, 2 * np.pi / 3])
def test_exterior_bisector(theta):
    a, b = qubit_pair(theta)
    geometry = qubit_geometry(a, b)
    assert geometry.r_plus @ geometry.r_minus == pytest.approx(0.0, abs=1e-12)
    assert a.vector @ geometry.r_minus == pytest.approx(np.cos(theta / 2 + np.pi / 2), abs=1e-12)
    assert a.vector @ geometry.r_plus == pytest.approx(np.cos(theta / 2), abs=1e-12)
    expected = geometry.r_plus if theta <= np.pi / 2 else geometry.r_minus
    np.testing.assert_array_equal(geometry.minimizer, expected)


@pytest.mark.parametrize("theta", [0.0, np.pi])
def test_degenerate_bisector_is_perpendicular(theta):
    a, b = qubit_pair(theta)
    geometry = qubit_geometry(a, b)
    for r in (geometry.r_plus, geometry.r_minus):
        assert np.linalg.norm(r) == pytest.approx(1.0)
    assert a.vector @ geometry.r_plus == pytest.approx(np.cos(theta / 2), abs=1e-12)
    assert a.vector @ geometry.r_minus == pytest.approx(np.cos(theta / 2 + np.pi / 2), abs=1e-12)


@pytest.mark.parametrize("theta, bound", [
    (0.0, 0.0),
    (np.pi / 3, 0.125),
    (np.pi / 2, 0.25),
    (2 * np.pi / 3, 0.125),
    (np.pi, 0.0),
])
def test_qubit_bound_is_tight(theta, bound):
    report = qubit_bound(*qubit_pair(theta))
    assert report.bound == pytest.approx(bound, abs=1e-12)
    assert report.achieved == pytest.approx(bound, abs=1e-12)
    assert report.gap == pytest.approx(0.0, abs=1e-12)


def test_qubit_bound_ignores_spectrum():
    a = BlochObservable.along((1, 0, 0), alpha1=3.0, alpha2=-2.0)
    b = BlochObservable.along((1, 0, 1))
    assert qubit_bound(a, b).bound == pytest.approx(qubit_bound(*qubit_pair(np.pi / 4)).bound)


def test_trace_report_carries_inherited_note():
    a, b = qubit_pair(np.pi / 3)
    report = qubit_bound(a, b, kind=DistanceKind.TRACE)
    assert report.note == INHERITED_NOTE
    assert report.achieved >= report.bound - 1e-12
    out = report.to_dict()
    assert out["kind"] == "D_1"
    assert out["note"] == INHERITED_NOTE
    assert set(out) == {"kind", "achieved", "bound", "gap", "argmin", "note"}


def test_disturbance_report_without_note(pauli_instruments):
    report = disturbance_report(DistanceKind.FIDELITY, pauli_instruments, PureState.basis(2, 0), 1 / 3)
    assert report.note == ""
    assert "note" not in report.to_dict()


@given(st.floats(min_value=0.0, max_value=float(np.pi)))
@settings(max_examples=50, deadline=None)
def test_objective_minimum_matches_overlap(theta):
    c = qubit_geometry(*qubit_pair(theta)).c
    assert qubit_objective_minimum(theta) == pytest.approx(1 - c ** 2, abs=1e-9)
    alphas = np.linspace(0, np.pi, 721)
    assert qubit_objective_minimum(theta) <= np.min(qubit_objective(theta, alphas)) + 1e-12


def test_common_eigenvector_of_commuting_matrices():
    a = np.diag([1.0, 2.0, 3.0])
    b = np.diag([5.0, 5.0, 7.0])
    psi = common_eigenvector([a, b])
    assert psi is not None
    for m in (a, b):
        lam = psi.expectation(m).real
        assert np.linalg.norm(m @ psi.amplitudes - lam * psi.amplitudes) < 1e-8


def test_common_eigenvector_refines_degenerate_space():
    psi = common_eigenvector([np.eye(2), pauli("X")])
    assert abs(psi.expectation(pauli("X"))) == pytest.approx(1.0)


def test_common_eigenvector_tries_every_candidate():
    def residual(m, psi):
        # reject the first candidate, |0>
        return 1.0 if abs(psi.amplitudes[0]) > 0.5 else 0.0

    with patch("qtradeoff.core.tradeoffs._eigen_residual", side_effect=residual):
        psi = common_eigenvector([np.diag([1.0, 2.0])])
    assert psi is not None
    assert psi.overlap(PureState.basis(2, 1)) == pytest.approx(1.0)


def test_common_eigenvector_absent():
    assert common_eigenvector([pauli("X"), pauli("Z")]) is None


def test_common_eigenvector_rejects_non_hermitian():
    with pytest.raises(ValidationError, match="not Hermitian"):
        common_eigenvector([np.array([[0, 1], [0, 0]])])


def test_appendix_c_pair_has_no_certain_outcome_state():
    povms = appendix_c_pair()
    assert uncertainty_zero_state(povms) is None
    shared = common_eigenvector([e for p in povms for e in p.effects])
    assert shared.overlap(PureState.basis(3, 0)) == pytest.approx(1.0)


def test_uncertainty_zero_state_for_shared_basis_vector():
    c, s = np.cos(0.3), np.sin(0.3)
    rotated = np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=complex)
    povms = [projective_povm(np.eye(3, dtype=complex)), projective_povm(rotated)]
    psi = uncertainty_zero_state(povms)
    assert psi.overlap(PureState.basis(3, 0)) == pytest.approx(1.0)


def test_qubit_pair_instruments_have_zero_average_at_theta_zero():
    a, b = qubit_pair(0.0)
    instruments = [projective_instrument(qubit_observable(x)) for x in (a, b)]
    assert average_disturbance(DistanceKind.FIDELITY, instruments, PureState.basis(2, 0)) == pytest.approx(0.0)
