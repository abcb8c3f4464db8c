import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import pandas as pd
import plotille

from qtradeoff.config import ConfigError, optimizer_config
from qtradeoff.core.constructions import (
    anticommuting_set,
    appendix_c_pair,
    measure_and_prepare_instrument,
    mub_set,
    projective_povm,
    qubit_observable,
    random_bloch_observable,
    random_observable,
    random_povm,
    random_unitary,
)
from qtradeoff.core.formats import state_to_json
from qtradeoff.core.measures import (
    DistanceKind,
    EntropyKind,
    disturbance,
    entropy_of,
    projective_disturbance,
    state_disturbance,
    t2_of_measurement,
    zero_disturbance_residual,
)
from qtradeoff.core.optimizer import (
    OptimizerConfig,
    bloch_scan,
    disturbance_objective,
    minimize_average_disturbance,
    minimize_average_entropy,
    random_pure_state,
    refine,
)
from qtradeoff.core.qcore import (
    DensityOperator,
    PureState,
    ValidationError,
    luders_instrument,
    outcome_probabilities,
    pauli,
    projective_instrument,
    spectral_decompose,
)
from qtradeoff.core.tradeoffs import (
    anticommuting_bound,
    average_disturbance,
    common_eigenvector,
    metaur_sum,
    mub_bound,
    mub_probability_sum,
    qubit_bound,
    qubit_geometry,
    qubit_objective_minimum,
    qubit_pair,
    uncertainty_zero_state,
)

# checks that hold to rounding error regardless of --tol
STRICT_TOL = 1e-10
VANISHING_TOL = 1e-12
APPENDIX_C_ENTROPY_FLOOR = 0.1
COMMON_EIGEN_TOL = 1e-8
CHECKS = ("lower", "upper", "equal")
SWEEP_COLUMNS = ["theta", "c", "bound", "grid_min", "abs_err"]
T2 = EntropyKind.tsallis(2)


@dataclass(frozen=True)
class VerificationRecord:
    """
    One checked relation.

    `check` is "lower" (achieved >= bound - tolerance), "upper"
    (achieved <= bound + tolerance) or "equal" (|achieved - bound| <= tolerance).
    """

    name: str
    relation: str
    check: str
    achieved: float
    bound: float
    tolerance: float
    runtime_ms: int = 0

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ValidationError(f"Unknown check '{self.check}'. Expected one of {', '.join(CHECKS)}")

    @property
    def passed(self) -> bool:
        if self.check == "lower":
            return self.achieved >= self.bound - self.tolerance
        if self.check == "upper":
            return self.achieved <= self.bound + self.tolerance
        return abs(self.achieved - self.bound) <= self.tolerance

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "name": self.name,
            "relation": self.relation,
            "check": self.check,
            "status": self.status,
            "achieved": self.achieved,
            "bound": self.bound,
            "tolerance": self.tolerance,
        }
        if timings:
            out["runtime_ms"] = self.runtime_ms
        return out


@dataclass(frozen=True)
class SuiteOptions:
    samples: int = 1000
    seed: int = 42
    pairs: int = 100
    d: Optional[int] = None
    n: Optional[int] = None
    tol_equality: float = 1e-9
    tol_inequality: float = 1e-8
    tol_optimizer: float = 1e-6
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError(f"samples must be >= 1, got {self.samples}")
        if self.pairs < 1:
            raise ValidationError(f"pairs must be >= 1, got {self.pairs}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")
        for name in ("tol_equality", "tol_inequality", "tol_optimizer"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be non-negative, got {getattr(self, name)}")

    @classmethod
    def from_settings(cls, settings: dict, tol: Optional[float] = None, restarts: Optional[int] = None,
                      workers: Optional[int] = None, **overrides) -> "SuiteOptions":
        """
        Builds suite options from the `verify` settings section.

        The optimizer cross-checks use the `optimizer` section overlaid with
        `verify.optimizer` and share the suite seed. `tol` replaces both the
        equality and inequality tolerances. None values are ignored.
        """
        section = dict(settings.get("verify", {}))
        search = dict(section.pop("optimizer", None) or {})
        section.update({k: v for k, v in overrides.items() if v is not None})
        if tol is not None:
            section["tol_equality"] = section["tol_inequality"] = tol
        search.update(seed=section.get("seed", search.get("seed")), restarts=restarts, workers=workers)
        try:
            return cls(optimizer=optimizer_config(settings, **search), **section)
        except TypeError as e:
            raise ConfigError(f"bad verify settings: {e}")


def _record(name: str, relation: str, check: str, achieved: float, bound: float, tolerance: float,
            started: float) -> VerificationRecord:
    runtime_ms = int(round((time.perf_counter() - started) * 1000))
    return VerificationRecord(name, relation, check, float(achieved), float(bound), float(tolerance), runtime_ms)


def _worst(values, target: float) -> float:
    """The sample furthest from `target`."""
    values = np.asarray(values, dtype=float)
    return float(values[np.argmax(np.abs(values - target))])


def _states(rng: np.random.Generator, d: int, count: int) -> list:
    return [random_pure_state(rng, d) for _ in range(count)]


def suite_pauli(opts: SuiteOptions) -> list:
    """Pauli identity sum D_F = 1 and the bounds it implies for qubits."""
    rng = np.random.default_rng(opts.seed)
    states = _states(rng, 2, opts.samples)
    instruments = [projective_instrument(spectral_decompose(pauli(k))) for k in "XYZ"]
    records = []

    started = time.perf_counter()
    sums = [3 * average_disturbance(DistanceKind.FIDELITY, instruments, psi) for psi in states]
    records.append(_record("pauli-fidelity-sum", "Pauli disturbance identity: sum_{X,Y,Z} D_F = 1", "equal",
                           _worst(sums, 1.0), 1.0, opts.tol_equality, started))

    started = time.perf_counter()
    bloch = [sum(np.real(psi.expectation(pauli(k))) ** 2 for k in "XYZ") for psi in states]
    records.append(_record("pauli-expectation-sum",
                           "Pauli expectation identity: sum_{X,Y,Z} <sigma>^2 = 1",
                           "equal",
                           _worst(bloch, 1.0), 1.0, opts.tol_equality, started))

    started = time.perf_counter()
    trace = [average_disturbance(DistanceKind.TRACE, instruments, psi) for psi in states]
    records.append(_record("pauli-trace-average",
                           "Pauli trace disturbance bound: (1/3) sum D_1 >= 1/3",
                           "lower",
                           min(trace), mub_bound(3, 2), opts.tol_inequality, started))
    return records


def _mub_grid(opts: SuiteOptions) -> list:
    dims = [opts.d] if opts.d else [2, 3, 5]
    if opts.n and not opts.d:
        dims = [d for d in dims if opts.n <= d + 1]
        if not dims:
            raise ValidationError(f"no default dimension admits {opts.n} mutually unbiased bases; pass --d")
    return [(d, n) for d in dims for n in ([opts.n] if opts.n else range(2, d + 2))]


def suite_mub(opts: SuiteOptions) -> list:
    """Probability-sum and average-disturbance bounds for N mutually unbiased bases."""
    records = []
    for d, n in _mub_grid(opts):
        family = mub_set(d, n)
        instruments = [projective_instrument(o) for o in family.observables()]
        states = _states(np.random.default_rng([opts.seed, d, n]), d, opts.samples)
        complete = n == d + 1
        prefix = f"mub-d{d}-n{n}"

        started = time.perf_counter()
        sums = [mub_probability_sum(family, psi) for psi in states]
        ceiling = 1 + (n - 1) / d
        records.append(_record(f"{prefix}-probability",
                               "MUB probability bound: sum_m sum_i p_m(i)^2 <= 1 + (N-1)/d",
                               "upper",
                               max(sums), ceiling, opts.tol_inequality, started))
        if complete:
            records.append(_record(f"{prefix}-probability-equality",
                                   "MUB probability bound, complete set: sum_m sum_i p_m(i)^2 = 1 + (N-1)/d",
                                   "equal", _worst(sums, ceiling), ceiling, opts.tol_equality, started))

        started = time.perf_counter()
        averages = [average_disturbance(DistanceKind.FIDELITY, instruments, psi) for psi in states]
        bound = mub_bound(n, d)
        records.append(_record(f"{prefix}-disturbance",
                               "MUB disturbance bound: (1/N) sum D_F >= (1 - 1/N)(1 - 1/d)",
                               "lower",
                               min(averages), bound, opts.tol_inequality, started))
        if complete:
            records.append(_record(f"{prefix}-disturbance-equality",
                                   "MUB disturbance bound, complete set: (1/N) sum D_F = (1 - 1/N)(1 - 1/d)",
                                   "equal", _worst(averages, bound), bound, opts.tol_equality, started))
    return records


def suite_anticommute(opts: SuiteOptions) -> list:
    """Expectation-sum and average-disturbance bounds for pairwise anticommuting observables."""
    records = []
    for n in ([opts.n] if opts.n else [2, 3, 4, 5]):
        aset = anticommuting_set(n)
        instruments = [projective_instrument(o) for o in aset.projective()]
        states = _states(np.random.default_rng([opts.seed, n]), aset.dim, opts.samples)
        prefix = f"anticommute-n{n}"

        started = time.perf_counter()
        sums = [metaur_sum(aset, psi) for psi in states]
        records.append(_record(f"{prefix}-expectation-sum",
                               "anticommuting expectation bound: sum_i <A_i>^2 <= 1",
                               "upper",
                               max(sums), 1.0, opts.tol_inequality, started))

        started = time.perf_counter()
        averages = [average_disturbance(DistanceKind.FIDELITY, instruments, psi) for psi in states]
        bound = anticommuting_bound(n)
        records.append(_record(f"{prefix}-disturbance",
                               "anticommuting disturbance bound: (1/N) sum D_F >= (1/2)(1 - 1/N)",
                               "lower",
                               min(averages), bound, opts.tol_inequality, started))
        if aset.dim == 2 and n == 3:
            records.append(_record(f"{prefix}-disturbance-equality",
                                   "anticommuting disturbance bound, qubit triple: (1/N) sum D_F = (1/2)(1 - 1/N)",
                                   "equal", _worst(averages, bound), bound, opts.tol_equality, started))
    return records


def suite_qubit(opts: SuiteOptions) -> list:
    """Tightness of (1 - c^2)/2 for random qubit pairs, cross-checked by the optimizer."""
    rng = np.random.default_rng(opts.seed)
    records = []
    for i in range(opts.pairs):
        a, b = random_bloch_observable(rng), random_bloch_observable(rng)
        instruments = [projective_instrument(qubit_observable(x)) for x in (a, b)]
        prefix = f"qubit-{i}"

        started = time.perf_counter()
        report = qubit_bound(a, b)
        records.append(_record(f"{prefix}-tightness",
                               "optimal qubit bound, tightness: (1/2) sum D_F(r_+ or r_-) = (1 - c^2)/2",
                               "equal",
                               report.achieved, report.bound, opts.tol_equality, started))

        started = time.perf_counter()
        theta = qubit_geometry(a, b).theta
        records.append(_record(f"{prefix}-objective",
                               "optimal qubit bound, angular objective: (1/2) min_alpha F_theta(alpha) = (1 - c^2)/2",
                               "equal",
                               qubit_objective_minimum(theta) / 2, report.bound, opts.tol_equality, started))

        started = time.perf_counter()
        estimate = minimize_average_disturbance(DistanceKind.FIDELITY, instruments, opts.optimizer, report.bound)
        records.append(_record(f"{prefix}-optimizer",
                               "optimal qubit bound, numerical minimum: min_psi (1/2) sum D_F = (1 - c^2)/2",
                               "equal",
                               estimate.value, report.bound, opts.tol_optimizer, started))

        started = time.perf_counter()
        trace = average_disturbance(DistanceKind.TRACE, instruments, estimate.state)
        records.append(_record(f"{prefix}-trace",
                               "optimal qubit bound, inherited by D_1: (1/2) sum D_1 >= (1 - c^2)/2",
                               "lower",
                               trace, report.bound, opts.tol_inequality, started))
    return records


def _sharing_first_vector(rng: np.random.Generator, d: int) -> tuple:
    """Two random unitaries whose first columns coincide."""
    u = random_unitary(rng, d)
    block = np.eye(d, dtype=complex)
    block[1:, 1:] = random_unitary(rng, d - 1)
    return u, u @ block


def _hermitian_pair(rng: np.random.Generator, d: int, kind: int) -> tuple:
    """kind 0: commuting, 1: one shared eigenvector, 2: generic."""
    if kind == 0:
        u = v = random_unitary(rng, d)
    elif kind == 1:
        u, v = _sharing_first_vector(rng, d)
    else:
        u, v = random_unitary(rng, d), random_unitary(rng, d)
    return tuple(w @ np.diag(rng.normal(size=d)) @ w.conj().T for w in (u, v))


def _joint_eigenvector_by_search(a: np.ndarray, b: np.ndarray, tol: float) -> Optional[np.ndarray]:
    """Eigenvectors of a nondegenerate `a` tested one by one against `b`."""
    for vec in np.linalg.eigh(a)[1].T:
        lam = np.real(vec.conj() @ b @ vec)
        if np.linalg.norm(b @ vec - lam * vec) < tol:
            return vec
    return None


def _residual(m: np.ndarray, psi: PureState) -> float:
    lam = np.real(psi.expectation(m))
    return float(np.linalg.norm(m @ psi.amplitudes - lam * psi.amplitudes))


def suite_povm_luders(opts: SuiteOptions) -> list:
    """Lueders-instrument relations between disturbance and uncertainty, plus the qutrit pair sharing |phi_1>."""
    rng = np.random.default_rng(opts.seed)
    records = []

    started = time.perf_counter()
    excess = []
    for _ in range(opts.samples):
        d = int(rng.choice([2, 3]))
        povm = random_povm(rng, d, int(rng.integers(2, 5)))
        psi = random_pure_state(rng, d)
        excess.append(disturbance(DistanceKind.FIDELITY, luders_instrument(povm), psi)
                      - entropy_of(T2, outcome_probabilities(povm, psi)))
    records.append(_record("luders-fidelity-below-t2",
                           "Lueders disturbance below Tsallis-2 uncertainty: D_F(Lueders) - T_2 <= 0",
                           "upper",
                           max(excess), 0.0, STRICT_TOL, started))

    started = time.perf_counter()
    residuals = []
    for i in range(min(opts.samples, 200)):
        u, v = _sharing_first_vector(rng, 2 + i % 3)
        povms = [projective_povm(u), projective_povm(v)]
        psi = uncertainty_zero_state(povms)
        residuals.append(1.0 if psi is None else
                         max(zero_disturbance_residual(luders_instrument(p), psi) for p in povms))
    records.append(_record("luders-certain-outcome-undisturbed",
                           "certain outcomes imply no Lueders disturbance: sum T_2 = 0 => sum D = 0",
                           "upper",
                           max(residuals), 0.0, STRICT_TOL, started))

    started = time.perf_counter()
    disagreements = 0
    for i in range(min(opts.samples, 200)):
        a, b = _hermitian_pair(rng, 2 + (i // 3) % 3, i % 3)
        found = common_eigenvector([a, b], COMMON_EIGEN_TOL)
        searched = _joint_eigenvector_by_search(a, b, COMMON_EIGEN_TOL)
        if (found is None) != (searched is None):
            disagreements += 1
        elif found is not None and max(_residual(a, found), _residual(b, found)) >= COMMON_EIGEN_TOL:
            disagreements += 1
    records.append(_record("common-eigenvector-agreement",
                           "zero disturbance iff common eigenvector: common_eigenvector agrees with eigenvector search",
                           "upper", disagreements, 0, 0.0, started))

    started = time.perf_counter()
    minima = []
    # commuting pairs and pairs sharing a single eigenvector, d = 2..4
    for i in range(6):
        a, b = _hermitian_pair(rng, 2 + i % 3, (i // 3) % 2)
        instruments = [projective_instrument(spectral_decompose(m)) for m in (a, b)]
        minima.append(minimize_average_disturbance(DistanceKind.FIDELITY, instruments, opts.optimizer).value)
    records.append(_record("shared-eigenvector-optimizer",
                           "common eigenvector gives zero tradeoff: min_psi (1/N) sum D_F = 0",
                           "upper",
                           max(minima), 0.0, opts.tol_equality, started))

    povms = appendix_c_pair()
    phi1 = PureState.basis(3, 0)
    started = time.perf_counter()
    worst = max(disturbance(kind, luders_instrument(p), phi1) for kind in DistanceKind for p in povms)
    records.append(_record("appendix-c-luders-undisturbed",
                           "qutrit POVM pair, zero disturbance: D(Lueders; phi_1) = 0",
                           "upper",
                           worst, 0.0, VANISHING_TOL, started))

    started = time.perf_counter()
    estimate = minimize_average_entropy(T2, povms, opts.optimizer)
    records.append(_record("appendix-c-uncertainty-positive",
                           "qutrit POVM pair, positive uncertainty: min_psi (1/2) sum T_2 > 0",
                           "lower",
                           estimate.value, APPENDIX_C_ENTROPY_FLOOR, 0.0, started))
    return records


def suite_ordering(opts: SuiteOptions) -> list:
    """D_F = T_2 for projective measurements, ordering of the measures and vanishing cases."""
    rng = np.random.default_rng(opts.seed)
    cases = []
    for _ in range(opts.samples):
        d = int(rng.choice([2, 3, 4]))
        cases.append((random_observable(rng, d), random_pure_state(rng, d)))
    records = []

    started = time.perf_counter()
    fidelity = [projective_disturbance(DistanceKind.FIDELITY, obs, psi) for obs, psi in cases]
    deviation = [abs(f - t2_of_measurement(obs, psi)) for f, (obs, psi) in zip(fidelity, cases)]
    records.append(_record("fidelity-equals-t2",
                           "fidelity disturbance equals Tsallis-2 entropy: |D_F - T_2| = 0",
                           "upper",
                           max(deviation), 0.0, STRICT_TOL, started))

    started = time.perf_counter()
    trace = [projective_disturbance(DistanceKind.TRACE, obs, psi) for obs, psi in cases]
    records.append(_record("trace-above-fidelity",
                           "trace distance dominates fidelity disturbance: D_1 - D_F >= 0",
                           "lower",
                           min(t - f for t, f in zip(trace, fidelity)), 0.0, opts.tol_inequality, started))

    started = time.perf_counter()
    opnorm = [projective_disturbance(DistanceKind.OPNORM, obs, psi) for obs, psi in cases]
    records.append(_record("opnorm-below-trace",
                           "operator norm below trace distance: D_inf - D_1 <= 0",
                           "upper",
                           max(o - t for o, t in zip(opnorm, trace)), 0.0, opts.tol_inequality, started))

    started = time.perf_counter()
    worst = 0.0
    for obs, _ in cases:
        eigvec = PureState.from_vector(np.linalg.eigh(obs.projectors[0])[1][:, -1])
        worst = max(worst, *(projective_disturbance(kind, obs, eigvec) for kind in DistanceKind))
    records.append(_record("eigenstate-undisturbed",
                           "eigenstates are undisturbed: D(A; eigenvector of A) = 0",
                           "upper",
                           worst, 0.0, STRICT_TOL, started))

    started = time.perf_counter()
    worst = 0.0
    for obs, _ in cases:
        rho = DensityOperator.maximally_mixed(obs.dim)
        instrument = projective_instrument(obs)
        worst = max(worst, *(state_disturbance(kind, instrument, rho) for kind in DistanceKind))
    records.append(_record("maximally-mixed-undisturbed",
                           "maximally mixed state is undisturbed: D(A; I/d) = 0",
                           "upper",
                           worst, 0.0, STRICT_TOL, started))
    return records


SUITES = {
    "pauli": suite_pauli,
    "mub": suite_mub,
    "anticommute": suite_anticommute,
    "qubit": suite_qubit,
    "povm-luders": suite_povm_luders,
    "ordering": suite_ordering,
}


def run_suite(name: str, opts: SuiteOptions) -> list:
    """Runs a named suite and returns its VerificationRecords."""
    try:
        suite: Callable[[SuiteOptions], list] = SUITES[name]
    except KeyError:
        raise ValidationError(f"Unknown suite '{name}'. Expected one of {', '.join(SUITES)}")
    return suite(opts)


def records_frame(records: list) -> pd.DataFrame:
    """Tabulates records for the terminal summary."""
    columns = ["name", "check", "achieved", "bound", "tolerance", "status", "runtime_ms"]
    return pd.DataFrame([{c: getattr(r, c) for c in columns} for r in records], columns=columns)


def verification_report(suite: str, opts: SuiteOptions, records: list, timings: bool = False) -> dict:
    return {
        "suite": suite,
        "seed": opts.seed,
        "samples": opts.samples,
        "passed": all(r.passed for r in records),
        "records": [r.to_dict(timings) for r in records],
    }


def dumps(report: dict) -> str:
    """Deterministic JSON: sorted keys, repr-exact floats."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def sweep_qubit_theta(steps: int, grid: tuple = (181, 361), cfg: Optional[OptimizerConfig] = None) -> pd.DataFrame:
    """
    Analytic bound (1 - c^2)/2 against the numeric minimum for sigma_Z and
    cos(theta) sigma_Z + sin(theta) sigma_X, theta in [0, pi].

    Args:
        steps (int): Number of evenly spaced angles, at least 2.
        grid (tuple, optional): Bloch grid resolution before polishing.
        cfg (OptimizerConfig, optional): Budget for the polishing search.

    Returns:
        pd.DataFrame: Columns theta, c, bound, grid_min, abs_err.

    Raises:
        ValidationError: If `steps` < 2.
    """
    if steps < 2:
        raise ValidationError(f"sweep needs at least 2 steps, got {steps}")
    rows = []
    for theta in np.linspace(0.0, np.pi, steps):
        a, b = qubit_pair(theta)
        c = qubit_geometry(a, b).c
        bound = 0.5 * (1 - c ** 2)
        objective = disturbance_objective(
            DistanceKind.FIDELITY, [projective_instrument(qubit_observable(x)) for x in (a, b)])
        estimate = refine(objective, bloch_scan(objective, grid), cfg)
        rows.append({"theta": float(theta), "c": c, "bound": bound,
                     "grid_min": estimate.value, "abs_err": abs(estimate.value - bound)})
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_sweep(frame: pd.DataFrame, out=None) -> Optional[str]:
    """CSV with '.' decimals and 17 significant digits; returns the text when `out` is None."""
    return frame.to_csv(out, index=False, float_format="%.17g")


def plot_sweep(frame: pd.DataFrame) -> str:
    """Terminal plot of the analytic bound and the numeric minimum against theta."""
    fig = plotille.Figure()
    fig.width = 60
    fig.height = 15
    fig.x_label = "theta"
    fig.y_label = "avg D_F"
    fig.set_x_limits(min_=0, max_=float(np.pi))
    fig.set_y_limits(min_=0, max_=0.3)
    fig.plot(frame["theta"], frame["bound"], label="(1 - c^2)/2", interp="linear")
    fig.scatter(frame["theta"], frame["grid_min"], label=f"numeric (max err {frame['abs_err'].max():.2e})")
    return fig.show(legend=True)


def _disturbance_triple(instrument, psi: PureState) -> dict:
    return {f"D_{kind.value}": disturbance(kind, instrument, psi) for kind in DistanceKind}


def demo_appendix_c(opts: SuiteOptions) -> dict:
    """Two qutrit POVMs whose Lueders instruments leave |phi_1> alone while no state has certain outcomes."""
    povms = appendix_c_pair()
    phi1 = PureState.basis(3, 0)
    instruments = [luders_instrument(p) for p in povms]
    disturbances = {f"D_{kind.value}": [disturbance(kind, inst, phi1) for inst in instruments]
                    for kind in DistanceKind}
    estimate = minimize_average_entropy(T2, povms, opts.optimizer)
    shared = common_eigenvector([e for p in povms for e in p.effects])
    certain = uncertainty_zero_state(povms)
    separated = max(max(v) for v in disturbances.values()) < VANISHING_TOL and estimate.value > APPENDIX_C_ENTROPY_FLOOR
    return {
        "demo": "appendix-c",
        "state": state_to_json(phi1),
        "distribution": outcome_probabilities(povms[0], phi1).tolist(),
        "luders_disturbances": disturbances,
        "common_eigenvector": None if shared is None else state_to_json(shared),
        "certain_outcome_state": None if certain is None else state_to_json(certain),
        "entropy": T2.label(),
        "entropy_minimum": estimate.to_dict(),
        "conclusion": "d=0, c_S>0" if separated else "separation not observed",
    }


def demo_general_instrument(opts: SuiteOptions) -> dict:
    """Measure-and-prepare instruments: certain outcome on |0>, yet the state is disturbed."""
    z = projective_povm(np.eye(2, dtype=complex))
    psi = PureState.basis(2, 0)
    swapped = measure_and_prepare_instrument(z, (PureState.basis(2, 1), PureState.basis(2, 0)))
    rotated = measure_and_prepare_instrument(z, (PureState.from_vector([1, 1]), PureState.from_vector([1, -1])))
    probs = outcome_probabilities(z, psi)
    entropies = {kind.label(): entropy_of(kind, probs) for kind in (EntropyKind.shannon(), T2)}
    disturbances = {"swapped": _disturbance_triple(swapped, psi), "rotated": _disturbance_triple(rotated, psi)}
    certain = max(entropies.values()) < STRICT_TOL
    disturbed = all(v > STRICT_TOL for triple in disturbances.values() for v in triple.values())
    return {
        "demo": "general-instrument",
        "state": state_to_json(psi),
        "distribution": probs.tolist(),
        "entropy": entropies,
        "disturbances": disturbances,
        "conclusion": "c_S=0, d>0" if certain and disturbed else "separation not observed",
    }


def demo_mixed_state(opts: SuiteOptions) -> dict:
    """The maximally mixed state is left unchanged by any projective measurement."""
    d = opts.d or 3
    rng = np.random.default_rng(opts.seed)
    obs = random_observable(rng, d)
    psi = random_pure_state(rng, d)
    instrument = projective_instrument(obs)
    rho = DensityOperator.maximally_mixed(d)
    mixed = {f"D_{kind.value}": state_disturbance(kind, instrument, rho) for kind in DistanceKind}
    return {
        "demo": "mixed-state",
        "d": d,
        "seed": opts.seed,
        "maximally_mixed": mixed,
        "random_pure_state": _disturbance_triple(instrument, psi),
        "conclusion": "I/d undisturbed" if max(mixed.values()) < STRICT_TOL else "I/d disturbed",
    }


DEMOS = {
    "appendix-c": demo_appendix_c,
    "general-instrument": demo_general_instrument,
    "mixed-state": demo_mixed_state,
}


def run_demo(name: str, opts: SuiteOptions) -> dict:
    try:
        demo = DEMOS[name]
    except KeyError:
        raise ValidationError(f"Unknown demo '{name}'. Expected one of {', '.join(DEMOS)}")
    return demo(opts)
