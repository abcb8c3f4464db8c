import pytest
import numpy as np

from qtradeoff.core.constructions import appendix_c_pair, qubit_observable, random_observable, random_unitary
from qtradeoff.core.measures import DistanceKind, EntropyKind
from qtradeoff.core.optimizer import (
    Estimate,
    OptimizerConfig,
    bloch_scan,
    disturbance_objective,
    entropy_objective,
    minimize_average_disturbance,
    minimize_average_entropy,
    random_pure_state,
    refine,
)
from qtradeoff.core.qcore import (
    PureState,
    ValidationError,
    luders_instrument,
    projective_instrument,
    spectral_decompose,
)
from qtradeoff.core.tradeoffs import average_disturbance, average_entropy, qubit_pair


@pytest.fixture
def small_cfg():
    return OptimizerConfig(restarts=4, restarts_per_dim=2, bloch_grid=(61, 121), seed=7)


@pytest.fixture
def pair_instruments():
    return [projective_instrument(qubit_observable(x)) for x in qubit_pair(np.pi / 3)]


@pytest.mark.parametrize("field, value", [
    ("restarts", 0),
    ("max_iters", 0),
    ("tol", 0.0),
    ("seed", -1),
    ("bloch_grid", (1, 10)),
    ("workers", 0),
])
def test_config_validation(field, value):
    with pytest.raises(ValidationError):
        OptimizerConfig(**{field: value})


def test_restarts_scale_with_dimension():
    cfg = OptimizerConfig(restarts=8, restarts_per_dim=4)
    assert cfg.restarts_for(2) == 8
    assert cfg.restarts_for(3) == 12
    assert OptimizerConfig(bloch_grid=[5, 7]).bloch_grid == (5, 7)


def test_random_pure_state_is_seeded():
    a = random_pure_state(11, 3)
    b = random_pure_state(11, 3)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
    with pytest.raises(ValidationError):
        random_pure_state(11, 1)


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_batched_disturbance_matches_scalar(kind):
    rng = np.random.default_rng(5)
    instruments = [projective_instrument(random_observable(rng, 3)) for _ in range(2)]
    states = [random_pure_state(rng, 3) for _ in range(6)]
    batched = disturbance_objective(kind, instruments)(np.array([s.amplitudes for s in states]))
    scalar = [average_disturbance(kind, instruments, s) for s in states]
    np.testing.assert_allclose(batched, scalar, atol=1e-10)


@pytest.mark.parametrize("entropy", [EntropyKind.shannon(), EntropyKind.tsallis(2), EntropyKind.tsallis(0.5)])
def test_batched_entropy_matches_scalar(entropy):
    povms = appendix_c_pair()
    rng = np.random.default_rng(9)
    states = [random_pure_state(rng, 3) for _ in range(6)]
    batched = entropy_objective(entropy, povms)(np.array([s.amplitudes for s in states]))
    scalar = [average_entropy(entropy, povms, s) for s in states]
    np.testing.assert_allclose(batched, scalar, atol=1e-10)


def test_objectives_carry_dimension(pair_instruments):
    assert disturbance_objective(DistanceKind.FIDELITY, pair_instruments).dim == 2


def test_bloch_scan_needs_qubits():
    objective = entropy_objective(EntropyKind.tsallis(2), appendix_c_pair())
    with pytest.raises(ValidationError, match="qubit objective"):
        bloch_scan(objective, (11, 21))


def test_bloch_scan_brackets_the_bound(pair_instruments):
    scan = bloch_scan(disturbance_objective(DistanceKind.FIDELITY, pair_instruments), (61, 121))
    assert scan.probes == 61 * 121
    assert 0.125 - 1e-12 <= scan.value <= 0.125 + scan.grid_error


def test_refine_polishes_grid_point(pair_instruments):
    objective = disturbance_objective(DistanceKind.FIDELITY, pair_instruments)
    scan = bloch_scan(objective, (11, 21))
    polished = refine(objective, scan)
    assert polished.value <= scan.value
    assert polished.value == pytest.approx(0.125, abs=1e-8)
    assert polished.probes > scan.probes


def test_minimize_qubit_pair(pair_instruments, small_cfg):
    estimate = minimize_average_disturbance(DistanceKind.FIDELITY, pair_instruments, small_cfg, bound=0.125)
    assert estimate.value == pytest.approx(0.125, abs=1e-6)
    assert estimate.certified_gap == pytest.approx(estimate.value - 0.125)
    assert estimate.grid_error is not None
    assert estimate.seed == 7


def test_minimize_is_deterministic(pair_instruments, small_cfg):
    first = minimize_average_disturbance(DistanceKind.FIDELITY, pair_instruments, small_cfg)
    second = minimize_average_disturbance(DistanceKind.FIDELITY, pair_instruments, small_cfg)
    assert first.value == second.value
    np.testing.assert_array_equal(first.state.amplitudes, second.state.amplitudes)


def test_threaded_restarts_match_serial():
    rng = np.random.default_rng(2)
    instruments = [projective_instrument(random_observable(rng, 3)) for _ in range(2)]
    serial = OptimizerConfig(restarts=4, restarts_per_dim=2, seed=3)
    threaded = OptimizerConfig(restarts=4, restarts_per_dim=2, seed=3, workers=3)
    a = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, serial)
    b = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, threaded)
    assert a.value == b.value
    assert a.probes == b.probes


def test_single_observable_reaches_zero(small_cfg):
    instruments = [projective_instrument(random_observable(np.random.default_rng(4), 3))]
    estimate = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, small_cfg)
    assert estimate.value < 1e-8
    assert estimate.grid_error is None


def test_appendix_c_lueders_minimum_is_zero(small_cfg):
    instruments = [luders_instrument(p) for p in appendix_c_pair()]
    estimate = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, small_cfg)
    assert estimate.value < 1e-8


def test_appendix_c_entropy_minimum(small_cfg):
    estimate = minimize_average_entropy(EntropyKind.tsallis(2), appendix_c_pair(), small_cfg)
    assert estimate.value > 0.1
    assert estimate.value == pytest.approx(0.5, abs=1e-6)


def test_estimate_to_dict():
    estimate = Estimate(0.25, PureState.basis(2, 0), certified_gap=None, probes=3, seed=1)
    assert estimate.to_dict() == {
        "value": 0.25,
        "state": {"re": [1.0, 0.0], "im": [0.0, 0.0]},
        "certified_gap": None,
        "probes": 3,
        "seed": 1,
    }


def test_haar_states_have_uniform_first_weight():
    rng = np.random.default_rng(2024)
    weights = [abs(random_pure_state(rng, 2).amplitudes[0]) ** 2 for _ in range(100_000)]
    assert np.mean(weights) == pytest.approx(0.5, abs=0.01)


def test_more_restarts_never_worsen_the_minimum():
    rng = np.random.default_rng(8)
    instruments = [projective_instrument(random_observable(rng, 3)) for _ in range(3)]
    values = [minimize_average_disturbance(DistanceKind.FIDELITY, instruments,
                                           OptimizerConfig(restarts=r, restarts_per_dim=1, seed=5)).value
              for r in (1, 2, 4, 8)]
    for fewer, more in zip(values, values[1:]):
        assert more <= fewer + 1e-12


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_estimate_state_reproduces_value(kind, small_cfg):
    rng = np.random.default_rng(13)
    instruments = [projective_instrument(random_observable(rng, 3)) for _ in range(2)]
    estimate = minimize_average_disturbance(kind, instruments, small_cfg)
    assert average_disturbance(kind, instruments, estimate.state) == pytest.approx(estimate.value, abs=1e-10)


@pytest.fixture
def xz_instruments():
    return [projective_instrument(qubit_observable(x)) for x in qubit_pair(np.pi / 2)]


@pytest.mark.parametrize("kind", [DistanceKind.FIDELITY, DistanceKind.TRACE])
def test_incompatible_pair_always_disturbs(kind, xz_instruments):
    rng = np.random.default_rng(21)
    states = np.array([random_pure_state(rng, 2).amplitudes for _ in range(10_000)])
    values = disturbance_objective(kind, xz_instruments)(states)
    assert values.min() > 0
    assert values.min() >= 0.25 - 1e-12


def test_incompatible_pair_grid_minimum(xz_instruments):
    scan = bloch_scan(disturbance_objective(DistanceKind.FIDELITY, xz_instruments), (181, 361))
    assert scan.value > 0.24


def test_qubit_local_searches_stay_cheap():
    cfg = OptimizerConfig(restarts=8, restarts_per_dim=4, bloch_grid=(181, 361), seed=42)
    instruments = [projective_instrument(qubit_observable(x)) for x in qubit_pair(1.1)]
    estimate = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, cfg)
    # nine local searches on top of the grid
    assert estimate.probes - 181 * 361 < 20_000
    assert estimate.value == pytest.approx(0.5 * (1 - np.cos(0.55) ** 2), abs=1e-9)


@pytest.mark.parametrize("d", [3, 4])
def test_single_shared_eigenvector_reaches_zero(d):
    rng = np.random.default_rng(d)
    u = random_unitary(rng, d)
    block = np.eye(d, dtype=complex)
    block[1:, 1:] = random_unitary(rng, d - 1)
    observables = [w @ np.diag(rng.normal(size=d)) @ w.conj().T for w in (u, u @ block)]
    instruments = [projective_instrument(spectral_decompose(m)) for m in observables]
    cfg = OptimizerConfig(restarts=8, restarts_per_dim=4, seed=42)
    estimate = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, cfg)
    assert estimate.value < 1e-9
    assert estimate.state.overlap(PureState.from_vector(u[:, 0])) == pytest.approx(1.0, abs=1e-6)
