from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigh

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12
PSD_TOL = 1e-10
STATE_EIG_TOL = 1e-10
CLUSTER_TOL = 1e-8

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ValidationError(ValueError):
    """Raised when an operator, state or measurement violates its invariants."""


class DimensionMismatchError(ValidationError):
    """Raised when two objects live on Hilbert spaces of different dimension."""


def pauli(name: str) -> np.ndarray:
    """Returns a fresh copy of the Pauli matrix `name` (one of I, X, Y, Z)."""
    try:
        return PAULI[name.upper()].copy()
    except KeyError:
        raise ValidationError(f"Unknown Pauli matrix '{name}'. Expected one of I, X, Y, Z")


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """
    Converts `m` to a square, finite complex128 array.

    Args:
        m (array-like): Candidate operator.
        name (str, optional): Label used in error messages. Defaults to "matrix".

    Returns:
        np.ndarray: A d x d complex array.

    Raises:
        ValidationError: If `m` is not square or holds non-finite entries.
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def _require_hermitian(m: np.ndarray, name: str, tol: float = HERMITIAN_TOL) -> np.ndarray:
    if not is_hermitian(m, tol):
        raise ValidationError(f"{name} is not Hermitian within {tol:g}")
    # symmetrize away the sub-tolerance drift so eigh sees an exact Hermitian matrix
    return (m + m.conj().T) / 2


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def check_dim(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise DimensionMismatchError(f"{what}: expected dimension {expected}, got {got}")


def canonical_phase(vec: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    """Rotates the global phase so the first nonzero amplitude is real and nonnegative."""
    nonzero = np.flatnonzero(np.abs(vec) > tol)
    if nonzero.size == 0:
        return vec
    lead = vec[nonzero[0]]
    return vec * (np.conj(lead) / abs(lead))


@dataclass(frozen=True, eq=False)
class PureState:
    """
    Unit vector in C^d, stored with a canonical global phase.

    Use `PureState.from_vector` to normalize arbitrary input; the constructor
    itself only accepts vectors that are already normalized.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.amplitudes, dtype=complex)
        if vec.ndim != 1 or vec.size == 0:
            raise ValidationError(f"state amplitudes must be a non-empty vector, got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise ValidationError("state amplitudes have non-finite entries")
        norm_sq = float(np.sum(np.abs(vec) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized: sum |c|^2 = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", _frozen(canonical_phase(vec)))

    @classmethod
    def from_vector(cls, vec) -> "PureState":
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if not np.isfinite(norm) or norm == 0:
            raise ValidationError("cannot normalize a zero or non-finite vector")
        return cls(vec / norm)

    @classmethod
    def basis(cls, d: int, k: int) -> "PureState":
        vec = np.zeros(d, dtype=complex)
        vec[k] = 1.0
        return cls(vec)

    @classmethod
    def from_bloch(cls, r) -> "PureState":
        """Qubit state whose Bloch vector is the unit vector `r`."""
        r = np.asarray(r, dtype=float)
        norm = np.linalg.norm(r)
        if r.shape != (3,) or norm == 0:
            raise ValidationError(f"Bloch vector must be a nonzero 3-vector, got {r}")
        x, y, z = r / norm
        theta = np.arccos(np.clip(z, -1.0, 1.0))
        phi = np.arctan2(y, x)
        return cls.from_vector([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityOperator":
        return DensityOperator(self.projector())

    def bloch_vector(self) -> np.ndarray:
        if self.dim != 2:
            raise DimensionMismatchError(f"Bloch vector needs a qubit state, got dimension {self.dim}")
        rho = self.projector()
        return np.array([np.real(np.trace(rho @ PAULI[k])) for k in "XYZ"])

    def expectation(self, m: np.ndarray) -> complex:
        check_dim(self.dim, m.shape[0], "expectation value")
        return complex(self.amplitudes.conj() @ m @ self.amplitudes)

    def overlap(self, other: "PureState") -> float:
        """|<self|other>|^2."""
        check_dim(self.dim, other.dim, "state overlap")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = _require_hermitian(as_matrix(self.matrix, "density operator"), "density operator", NORM_TOL)
        trace = np.real(np.trace(m))
        if abs(trace - 1.0) > NORM_TOL:
            raise ValidationError(f"density operator has trace {trace!r}, expected 1")
        lowest = eigh(m, eigvals_only=True)[0]
        if lowest < -STATE_EIG_TOL:
            raise ValidationError(f"density operator has negative eigenvalue {lowest!r}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def from_state(cls, psi: PureState) -> "DensityOperator":
        return psi.density()

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityOperator":
        return cls(np.eye(d, dtype=complex) / d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ProjectiveObservable:
    """
    Observable A = sum_i a_i P_i given by its spectral resolution.

    Args:
        eigenvalues: Distinct real eigenvalues a_i.
        projectors: Orthogonal projectors P_i, summing to the identity.
    """

    eigenvalues: tuple
    projectors: tuple

    def __post_init__(self):
        eigenvalues = tuple(float(a) for a in self.eigenvalues)
        projectors = tuple(_frozen(as_matrix(p, f"projectors[{i}]")) for i, p in enumerate(self.projectors))
        if len(eigenvalues) != len(projectors) or not projectors:
            raise ValidationError("observable needs one projector per eigenvalue")
        if len(set(eigenvalues)) != len(eigenvalues):
            raise ValidationError(f"eigenvalues must be distinct, got {eigenvalues}")
        d = projectors[0].shape[0]
        for i, p in enumerate(projectors):
            check_dim(d, p.shape[0], f"projectors[{i}]")
            if not is_hermitian(p):
                raise ValidationError(f"projectors[{i}] is not Hermitian")
            if np.max(np.abs(p @ p - p)) > HERMITIAN_TOL:
                raise ValidationError(f"projectors[{i}] is not idempotent")
            for j in range(i):
                if np.max(np.abs(p @ projectors[j])) > HERMITIAN_TOL:
                    raise ValidationError(f"projectors[{j}] and projectors[{i}] are not orthogonal")
        if np.max(np.abs(sum(projectors) - np.eye(d))) > HERMITIAN_TOL:
            raise ValidationError("projectors do not sum to the identity")
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "projectors", projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def matrix(self) -> np.ndarray:
        return sum(a * p for a, p in zip(self.eigenvalues, self.projectors))

    def as_povm(self) -> "Povm":
        return Povm(self.projectors)


@dataclass(frozen=True, eq=False)
class Povm:
    effects: tuple

    def __post_init__(self):
        effects = tuple(_frozen(as_matrix(e, f"effects[{i}]")) for i, e in enumerate(self.effects))
        if not effects:
            raise ValidationError("POVM needs at least one effect")
        d = effects[0].shape[0]
        for i, e in enumerate(effects):
            check_dim(d, e.shape[0], f"effects[{i}]")
            if not is_hermitian(e):
                raise ValidationError(f"effects[{i}] is not Hermitian")
            w = eigh(e, eigvals_only=True)
            if w[0] < -PSD_TOL or w[-1] > 1 + PSD_TOL:
                raise ValidationError(f"effects[{i}] has eigenvalues outside [0, 1]: {w[0]!r}..{w[-1]!r}")
        if np.max(np.abs(sum(effects) - np.eye(d))) > HERMITIAN_TOL:
            raise ValidationError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)


@dataclass(frozen=True, eq=False)
class Instrument:
    """
    CP instrument in Kraus form: outcome i is implemented by the operators kraus[i].
    """

    kraus: tuple

    def __post_init__(self):
        kraus = []
        for i, ops in enumerate(self.kraus):
            ops = tuple(_frozen(as_matrix(k, f"kraus[{i}][{j}]")) for j, k in enumerate(ops))
            if not ops:
                raise ValidationError(f"outcome {i} has no Kraus operators")
            kraus.append(ops)
        if not kraus:
            raise ValidationError("instrument needs at least one outcome")
        d = kraus[0][0].shape[0]
        for i, ops in enumerate(kraus):
            for j, k in enumerate(ops):
                check_dim(d, k.shape[0], f"kraus[{i}][{j}]")
        total = sum(k.conj().T @ k for ops in kraus for k in ops)
        if np.max(np.abs(total - np.eye(d))) > HERMITIAN_TOL:
            raise ValidationError("Kraus operators violate completeness: sum K^dag K != I")
        object.__setattr__(self, "kraus", tuple(kraus))

    @property
    def dim(self) -> int:
        return self.kraus[0][0].shape[0]

    def effects(self) -> list:
        """Induced effects A_i = sum_k K_ik^dag K_ik."""
        return [sum(k.conj().T @ k for k in ops) for ops in self.kraus]

    def povm(self) -> Povm:
        return Povm(self.effects())

    def stacked(self) -> np.ndarray:
        """All Kraus operators as one (n, d, d) array, outcome order preserved."""
        return np.array([k for ops in self.kraus for k in ops])


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("distribution must be a non-empty vector")
        if np.any(p < -NORM_TOL) or np.any(p > 1 + NORM_TOL):
            raise ValidationError(f"probabilities outside [0, 1]: {p}")
        if abs(p.sum() - 1.0) > HERMITIAN_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, expected 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size


def _clusters(values: np.ndarray, tol: float) -> list:
    """Groups sorted eigenvalue indices whose consecutive gaps are within `tol`."""
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectral_decompose(h, cluster_tol: float = CLUSTER_TOL) -> ProjectiveObservable:
    """
    Spectral resolution of a Hermitian matrix, merging near-degenerate eigenvalues.

    Args:
        h (array-like): Hermitian matrix.
        cluster_tol (float, optional): Eigenvalues closer than this share one projector.
            Defaults to 1e-8.

    Returns:
        ProjectiveObservable: Eigenvalues (cluster means) with their eigenprojectors.

    Raises:
        ValidationError: If `h` is not Hermitian within 1e-10.
    """
    m = _require_hermitian(as_matrix(h), "observable")
    w, v = eigh(m)
    eigenvalues, projectors = [], []
    for group in _clusters(w, cluster_tol):
        vecs = v[:, group]
        eigenvalues.append(float(np.mean(w[group])))
        projectors.append(vecs @ vecs.conj().T)
    return ProjectiveObservable(tuple(eigenvalues), tuple(projectors))


def matrix_sqrt(m) -> np.ndarray:
    """
    Principal square root of a PSD matrix.

    Eigenvalues in [-1e-10, 0) are treated as numerical drift and clamped to zero.

    Raises:
        ValidationError: If `m` is not Hermitian or has an eigenvalue below -1e-10.
    """
    m = _require_hermitian(as_matrix(m), "matrix")
    w, v = eigh(m)
    if w[0] < -PSD_TOL:
        raise ValidationError(f"matrix is not positive semidefinite: eigenvalue {w[0]!r}")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return (root + root.conj().T) / 2


def projective_instrument(obs: ProjectiveObservable) -> Instrument:
    """von Neumann-Lueders instrument of an observable: one projector per outcome."""
    return Instrument(tuple((p,) for p in obs.projectors))


def projective_channel(obs: ProjectiveObservable, rho: DensityOperator) -> DensityOperator:
    """Phi^A(rho) = sum_i P_i rho P_i."""
    check_dim(obs.dim, rho.dim, "projective channel")
    out = sum(p @ rho.matrix @ p for p in obs.projectors)
    return _channel_output(out)


def luders_instrument(povm: Povm) -> Instrument:
    """
    Lueders instrument of a POVM, with Kraus operators K_i = A_i^(1/2).

    Args:
        povm (Povm): The POVM to implement.

    Returns:
        Instrument: One Kraus operator per outcome.

    Raises:
        ValidationError: If an effect has an eigenvalue below -1e-10.
    """
    return Instrument(tuple((matrix_sqrt(e),) for e in povm.effects))


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _channel_output(m: np.ndarray) -> DensityOperator:
    # completeness only holds to 1e-10, so rescale the trace drift back to 1
    m = _hermitian_part(m)
    trace = np.real(np.trace(m))
    if abs(trace - 1.0) > HERMITIAN_TOL:
        raise ValidationError(f"channel output has trace {trace!r}")
    return DensityOperator(m / trace)


def apply_channel(instrument: Instrument, rho: DensityOperator) -> DensityOperator:
    """Measurement channel Phi(rho) = sum_{i,k} K_ik rho K_ik^dag."""
    check_dim(instrument.dim, rho.dim, "measurement channel")
    kraus = instrument.stacked()
    out = np.einsum("nij,jk,nlk->il", kraus, rho.matrix, kraus.conj())
    return _channel_output(out)


def outcome_distribution(povm: Povm, rho: DensityOperator) -> Distribution:
    """Born-rule probabilities tr[rho A_i]."""
    check_dim(povm.dim, rho.dim, "outcome distribution")
    probs = np.array([np.real(np.trace(rho.matrix @ e)) for e in povm.effects])
    return Distribution(np.clip(probs, 0.0, 1.0))


def outcome_probabilities(povm: Povm, psi: PureState) -> np.ndarray:
    """<psi|A_i|psi> for each effect, without building a density operator."""
    check_dim(povm.dim, psi.dim, "outcome distribution")
    return np.array([np.real(psi.expectation(e)) for e in povm.effects])


def ensure_same_dim(items: Sequence, what: str) -> int:
    """Returns the common dimension of `items` or raises DimensionMismatchError."""
    if not items:
        raise ValidationError(f"{what}: empty list")
    d = items[0].dim
    for i, item in enumerate(items):
        check_dim(d, item.dim, f"{what}[{i}]")
    return d
