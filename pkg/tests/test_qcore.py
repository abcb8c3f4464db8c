import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from qtradeoff.core.qcore import (
    DensityOperator,
    DimensionMismatchError,
    Distribution,
    Instrument,
    Povm,
    ProjectiveObservable,
    PureState,
    ValidationError,
    apply_channel,
    ensure_same_dim,
    luders_instrument,
    matrix_sqrt,
    outcome_distribution,
    outcome_probabilities,
    pauli,
    projective_channel,
    projective_instrument,
    spectral_decompose,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_vector(seed, d):
    rng = np.random.default_rng(seed)
    return rng.normal(size=d) + 1j * rng.normal(size=d)


@pytest.fixture
def plus():
    return PureState.from_vector([1, 1])


def test_pauli_returns_copy():
    x = pauli("x")
    x[0, 0] = 5
    assert pauli("X")[0, 0] == 0


def test_pauli_unknown():
    with pytest.raises(ValidationError, match="Unknown Pauli"):
        pauli("W")


def test_pure_state_normalizes_and_fixes_phase():
    psi = PureState.from_vector([2j, 0])
    np.testing.assert_allclose(psi.amplitudes, [1, 0])


def test_pure_state_rejects_unnormalized():
    with pytest.raises(ValidationError, match="not normalized"):
        PureState(np.array([1.0, 1.0]))


def test_pure_state_rejects_zero_vector():
    with pytest.raises(ValidationError):
        PureState.from_vector([0, 0])


def test_pure_state_amplitudes_are_read_only(plus):
    with pytest.raises(ValueError):
        plus.amplitudes[0] = 0


@pytest.mark.parametrize("r", [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, -1)])
def test_bloch_round_trip(r):
    np.testing.assert_allclose(PureState.from_bloch(r).bloch_vector(), r, atol=1e-12)


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_bloch_vector_is_unit(seed):
    psi = PureState.from_vector(random_vector(seed, 2))
    assert np.linalg.norm(psi.bloch_vector()) == pytest.approx(1.0, abs=1e-12)


def test_bloch_vector_needs_qubit():
    with pytest.raises(DimensionMismatchError):
        PureState.basis(3, 0).bloch_vector()


def test_overlap(plus):
    assert plus.overlap(PureState.basis(2, 0)) == pytest.approx(0.5)


def test_density_operator_validation():
    with pytest.raises(ValidationError, match="trace"):
        DensityOperator(np.eye(2))
    with pytest.raises(ValidationError, match="negative eigenvalue"):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityOperator(np.array([[0.5, 0.5], [0, 0.5]]))


def test_maximally_mixed():
    np.testing.assert_allclose(DensityOperator.maximally_mixed(4).matrix, np.eye(4) / 4)


def test_projective_observable_rejects_overlapping_projectors():
    p = np.diag([1.0, 0.0])
    with pytest.raises(ValidationError, match="not orthogonal"):
        ProjectiveObservable((1.0, 2.0), (p, p))


def test_projective_observable_rejects_repeated_eigenvalues():
    with pytest.raises(ValidationError, match="distinct"):
        ProjectiveObservable((1.0, 1.0), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))


def test_spectral_decompose_merges_degenerate_eigenvalues():
    obs = spectral_decompose(np.diag([1.0, 1.0, 2.0]))
    assert obs.eigenvalues == (1.0, 2.0)
    assert np.trace(obs.projectors[0]).real == pytest.approx(2.0)
    np.testing.assert_allclose(obs.matrix(), np.diag([1.0, 1.0, 2.0]), atol=1e-12)


def test_spectral_decompose_rejects_non_hermitian():
    with pytest.raises(ValidationError, match="not Hermitian"):
        spectral_decompose(np.array([[0, 1], [0, 0]]))


def test_matrix_sqrt():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    root = matrix_sqrt(m)
    np.testing.assert_allclose(root @ root, m, atol=1e-12)
    with pytest.raises(ValidationError, match="positive semidefinite"):
        matrix_sqrt(np.diag([1.0, -1.0]))


def test_povm_rejects_incomplete_effects():
    with pytest.raises(ValidationError):
        Povm((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))


def test_instrument_rejects_incomplete_kraus():
    with pytest.raises(ValidationError, match="completeness"):
        Instrument(((np.diag([1.0, 0.0]),),))


def test_instrument_effects_match_povm():
    povm = Povm((np.diag([0.25, 0.5]), np.diag([0.75, 0.5])))
    inst = luders_instrument(povm)
    for got, want in zip(inst.effects(), povm.effects):
        np.testing.assert_allclose(got, want, atol=1e-12)
    assert inst.stacked().shape == (2, 2, 2)


def test_distribution_must_sum_to_one():
    with pytest.raises(ValidationError, match="sum"):
        Distribution([0.5, 0.6])
    assert len(Distribution([0.25, 0.75])) == 2


def test_projective_channel_matches_instrument(plus):
    obs = spectral_decompose(pauli("Z"))
    rho = plus.density()
    direct = projective_channel(obs, rho)
    via_instrument = apply_channel(projective_instrument(obs), rho)
    np.testing.assert_allclose(direct.matrix, np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(via_instrument.matrix, direct.matrix, atol=1e-12)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_channel_output_is_a_state(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    inst = projective_instrument(spectral_decompose(g + g.conj().T))
    out = apply_channel(inst, PureState.from_vector(random_vector(seed, 3)).density())
    assert np.trace(out.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_outcome_distribution(plus):
    z = spectral_decompose(pauli("Z")).as_povm()
    np.testing.assert_allclose(outcome_distribution(z, PureState.basis(2, 1).density()).probs, [1, 0], atol=1e-12)
    np.testing.assert_allclose(outcome_probabilities(z, plus), [0.5, 0.5])


def test_dimension_mismatch():
    z = spectral_decompose(pauli("Z")).as_povm()
    with pytest.raises(DimensionMismatchError):
        outcome_probabilities(z, PureState.basis(3, 0))
    with pytest.raises(DimensionMismatchError):
        ensure_same_dim([z, Povm((np.eye(3),))], "povms")
    with pytest.raises(ValidationError, match="empty"):
        ensure_same_dim([], "povms")
