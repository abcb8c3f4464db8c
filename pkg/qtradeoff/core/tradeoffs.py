from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigh, svd

from .constructions import AnticommutingSet, BlochObservable, MubFamily, qubit_observable
from .formats import state_to_json
from .measures import DistanceKind, EntropyKind, disturbance, entropy_of
from .qcore import (
    Instrument,
    Povm,
    PureState,
    ValidationError,
    as_matrix,
    check_dim,
    ensure_same_dim,
    is_hermitian,
    outcome_probabilities,
    projective_instrument,
)

EIGEN_TOL = 1e-8
INHERITED_NOTE = "inherited from D_F"


@dataclass(frozen=True, eq=False)
class TradeoffReport:
    """
    Achieved average disturbance (or entropy) next to its analytic lower bound.

    `gap = achieved - bound` is never below -1e-8 when `bound` is a proven bound.
    """

    kind: Union[DistanceKind, EntropyKind]
    achieved: float
    bound: float
    argmin: Optional[PureState] = None
    note: str = ""

    @property
    def gap(self) -> float:
        return self.achieved - self.bound

    def kind_label(self) -> str:
        if isinstance(self.kind, DistanceKind):
            return f"D_{self.kind.value}"
        return self.kind.label()

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind_label(),
            "achieved": self.achieved,
            "bound": self.bound,
            "gap": self.gap,
            "argmin": state_to_json(self.argmin) if self.argmin is not None else None,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class QubitPairGeometry:
    theta: float
    c: float
    r_plus: np.ndarray = field(repr=False)
    r_minus: np.ndarray = field(repr=False)

    @property
    def minimizer(self) -> np.ndarray:
        """r_+ for theta <= pi/2, else r_-; at pi/2 both are optimal."""
        return self.r_plus if self.theta <= np.pi / 2 else self.r_minus


def average_disturbance(kind: DistanceKind, instruments: Sequence[Instrument], psi: PureState) -> float:
    """
    Mean disturbance (1/N) sum_i D_kind(instrument_i; psi).

    Raises:
        ValidationError: If `instruments` is empty.
        DimensionMismatchError: If the instruments or the state disagree on dimension.
    """
    d = ensure_same_dim(list(instruments), "instruments")
    check_dim(d, psi.dim, "average disturbance")
    return float(np.mean([disturbance(kind, inst, psi) for inst in instruments]))


def average_entropy(kind: EntropyKind, povms: Sequence[Povm], psi: PureState) -> float:
    """Mean outcome entropy of `povms` on `psi`; the objective behind c_S."""
    d = ensure_same_dim(list(povms), "povms")
    check_dim(d, psi.dim, "average entropy")
    return float(np.mean([entropy_of(kind, outcome_probabilities(p, psi)) for p in povms]))


def disturbance_report(kind: DistanceKind, instruments: Sequence[Instrument], psi: PureState,
                       bound: float) -> TradeoffReport:
    note = INHERITED_NOTE if kind is DistanceKind.TRACE else ""
    return TradeoffReport(kind, average_disturbance(kind, instruments, psi), bound, psi, note)


def mub_probability_sum(family: MubFamily, psi: PureState) -> float:
    """sum_m sum_i p_m(i)^2, at most 1 + (N-1)/d and equal to it for a complete set."""
    check_dim(family.d, psi.dim, "MUB probability sum")
    return float(sum(psi.overlap(v) ** 2 for basis in family.bases for v in basis))


def mub_bound(n: int, d: int) -> float:
    """(1 - 1/N)(1 - 1/d): lower bound on the average D_F over N MUBs in dimension d."""
    return (1 - 1 / n) * (1 - 1 / d)


def metaur_sum(aset: AnticommutingSet, psi: PureState) -> float:
    """sum_i <psi|A_i|psi>^2, at most 1 for pairwise anticommuting observables."""
    check_dim(aset.dim, psi.dim, "anticommuting expectation sum")
    return float(sum(np.real(psi.expectation(a)) ** 2 for a in aset.observables))


def anticommuting_bound(n: int) -> float:
    """(1/2)(1 - 1/N), from p(+/-) = (1 +/- <A_i>)/2 and the expectation-sum bound."""
    return 0.5 * (1 - 1 / n)


def _max_overlap(a: BlochObservable, b: BlochObservable) -> float:
    va = eigh(a.sigma())[1]
    vb = eigh(b.sigma())[1]
    return float(np.max(np.abs(va.conj().T @ vb)))


def _bisector(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm > 1e-12:
        return v / norm
    # a and b (anti)parallel: any direction perpendicular to them
    axis = np.eye(3)[int(np.argmin(np.abs(fallback)))]
    w = np.cross(fallback, axis)
    return w / np.linalg.norm(w)


def qubit_geometry(a: BlochObservable, b: BlochObservable) -> QubitPairGeometry:
    """
    Angle between the Bloch vectors, maximal eigenvector overlap c and the two
    extremal Bloch vectors of the average D_F.

    r_+ = (a + b)/|a + b| bisects the interior angle and r_- = (b - a)/|b - a| the
    exterior one, so r_+ . r_- = 0 and a . r_- = cos(theta/2 + pi/2). The minimizer is
    r_+ for theta <= pi/2 and r_- otherwise.
    """
    va, vb = a.vector, b.vector
    theta = float(np.arccos(np.clip(va @ vb, -1.0, 1.0)))
    c = _max_overlap(a, b)
    return QubitPairGeometry(theta, c, _bisector(va + vb, va), _bisector(vb - va, va))


def qubit_bound(a: BlochObservable, b: BlochObservable,
                kind: DistanceKind = DistanceKind.FIDELITY) -> TradeoffReport:
    """
    Optimal bound (1 - c^2)/2 on the average disturbance of two qubit observables.

    The report's `achieved` value is the average disturbance at the minimizing state,
    which equals the bound for FIDELITY (the bound is tight).
    """
    geometry = qubit_geometry(a, b)
    argmin = PureState.from_bloch(geometry.minimizer)
    instruments = [projective_instrument(qubit_observable(x)) for x in (a, b)]
    return disturbance_report(kind, instruments, argmin, 0.5 * (1 - geometry.c ** 2))


def qubit_objective(theta: float, alpha: float) -> float:
    """F_theta(alpha) = 1 - (cos^2 alpha + cos^2(theta - alpha))/2."""
    return 1 - (np.cos(alpha) ** 2 + np.cos(theta - alpha) ** 2) / 2


def qubit_objective_minimum(theta: float) -> float:
    """min over alpha of F_theta, attained at alpha = theta/2 + k pi/2; equals 1 - c^2."""
    return float(min(qubit_objective(theta, theta / 2), qubit_objective(theta, theta / 2 + np.pi / 2)))


def qubit_pair(theta: float) -> tuple:
    """Observables sigma_Z and cos(theta) sigma_Z + sin(theta) sigma_X."""
    return (BlochObservable((0.0, 0.0, 1.0)),
            BlochObservable.along((np.sin(theta), 0.0, np.cos(theta))))


def _null_directions(m: np.ndarray, basis: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal columns spanning {basis @ x : ||m @ basis @ x|| < tol}."""
    if basis.shape[1] == 0:
        return basis
    _, s, vh = svd(m @ basis)
    s = np.concatenate([s, np.zeros(basis.shape[1] - s.size)])
    keep = vh[s < tol].conj().T
    return basis @ keep


def _eigenspaces(m: np.ndarray, basis: np.ndarray, tol: float) -> list:
    """Joint refinement: parts of span(basis) on which `m` acts as a scalar."""
    compressed = basis.conj().T @ m @ basis
    w, u = eigh((compressed + compressed.conj().T) / 2)
    spaces, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[start] > tol:
            lam = np.mean(w[start:i])
            candidate = basis @ u[:, start:i]
            shift = m - lam * np.eye(m.shape[0])
            sub = _null_directions(shift, candidate, tol)
            if sub.shape[1]:
                spaces.append(sub)
            start = i
    return spaces


def _validated_hermitian(ops: Sequence) -> list:
    mats = []
    for i, op in enumerate(ops):
        m = as_matrix(op, f"ops[{i}]")
        if not is_hermitian(m):
            raise ValidationError(f"ops[{i}] is not Hermitian")
        mats.append((m + m.conj().T) / 2)
    if not mats:
        raise ValidationError("common_eigenvector needs at least one operator")
    for i, m in enumerate(mats):
        check_dim(mats[0].shape[0], m.shape[0], f"ops[{i}]")
    return mats


def common_eigenvector(ops: Sequence, tol: float = EIGEN_TOL) -> Optional[PureState]:
    """
    A unit vector that is an eigenvector of every operator in `ops`, or None.

    Diagonalizes the first operator, then splits each surviving eigenspace by the
    eigenspaces of the next operator compressed onto it, keeping only directions that
    pass the residual test ||M psi - lambda psi|| < tol.

    Raises:
        ValidationError: If an operator is not Hermitian.
    """
    mats = _validated_hermitian(ops)
    spaces = [np.eye(mats[0].shape[0], dtype=complex)]
    for m in mats:
        spaces = [sub for space in spaces for sub in _eigenspaces(m, space, tol)]
        if not spaces:
            return None
    for space in spaces:
        for column in space.T:
            psi = PureState.from_vector(column)
            if all(_eigen_residual(m, psi) < tol for m in mats):
                return psi
    return None


def _eigen_residual(m: np.ndarray, psi: PureState) -> float:
    lam = np.real(psi.expectation(m))
    return float(np.linalg.norm(m @ psi.amplitudes - lam * psi.amplitudes))


def _unit_eigenspace(effect: np.ndarray, tol: float) -> np.ndarray:
    w, v = eigh(effect)
    return v[:, w > 1 - tol]


def uncertainty_zero_state(povms: Sequence[Povm], tol: float = EIGEN_TOL) -> Optional[PureState]:
    """
    A state on which every POVM has a certain outcome, or None.

    Searches each choice of one effect per POVM for a shared +1 eigenvector. When
    None is returned, c_S > 0 for every entropy that vanishes only on point masses.
    """
    povms = list(povms)
    d = ensure_same_dim(povms, "povms")
    eye = np.eye(d)
    candidates = [[_unit_eigenspace(e, tol) for e in p.effects] for p in povms]
    for choice in product(*candidates):
        space = np.eye(d, dtype=complex)
        for unit in choice:
            if unit.shape[1] == 0:
                space = unit
                break
            space = _null_directions(eye - unit @ unit.conj().T, space, tol)
            if space.shape[1] == 0:
                break
        if space.shape[1]:
            return PureState.from_vector(space[:, 0])
    return None
