from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh, inv

from .qcore import (
    PAULI,
    Instrument,
    Povm,
    ProjectiveObservable,
    PureState,
    ValidationError,
    is_hermitian,
    matrix_sqrt,
    spectral_decompose,
)

ORTHO_TOL = 1e-10
UNBIASED_TOL = 1e-9
BLOCH_NORM_TOL = 1e-12
# effects below this eigenvalue contribute no Kraus operator
KRAUS_CUTOFF = 1e-14


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n ** 0.5) + 1))


def _check_orthonormal(vectors: Sequence[PureState], what: str) -> np.ndarray:
    mat = np.column_stack([v.amplitudes for v in vectors])
    if mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{what} needs {mat.shape[0]} vectors, got {mat.shape[1]}")
    if np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[1]))) > ORTHO_TOL:
        raise ValidationError(f"{what} is not orthonormal")
    return mat


@dataclass(frozen=True, eq=False)
class MubFamily:
    """
    N mutually unbiased orthonormal bases of C^d.

    Args:
        d: Dimension (prime for families built by `mub_set`).
        bases: N bases, each a tuple of d PureStates.
    """

    d: int
    bases: tuple

    def __post_init__(self):
        bases = tuple(tuple(b) for b in self.bases)
        mats = [_check_orthonormal(b, f"basis {m}") for m, b in enumerate(bases)]
        for m, b in enumerate(mats):
            if b.shape[0] != self.d:
                raise ValidationError(f"basis {m} has dimension {b.shape[0]}, expected {self.d}")
            for n in range(m):
                overlaps = np.abs(mats[n].conj().T @ b) ** 2
                if np.max(np.abs(overlaps - 1.0 / self.d)) > UNBIASED_TOL:
                    raise ValidationError(f"bases {n} and {m} are not mutually unbiased")
        object.__setattr__(self, "bases", bases)

    @property
    def n(self) -> int:
        return len(self.bases)

    @property
    def dim(self) -> int:
        return self.d

    def observables(self) -> list:
        """One nondegenerate observable per basis, eigenvalue j on the j-th basis vector."""
        return [ProjectiveObservable(tuple(range(self.d)), tuple(v.projector() for v in basis))
                for basis in self.bases]

    def povms(self) -> list:
        return [Povm(tuple(v.projector() for v in basis)) for basis in self.bases]


def mub_set(d: int, n: int) -> MubFamily:
    """
    First `n` of the d+1 generalized-Pauli eigenbases in prime dimension `d`.

    The computational basis comes first; basis k (k = 0..d-1) has vectors
    omega^(k m^2 + j m) / sqrt(d), with omega = exp(2 pi i / d). For d = 2 the
    quadratic phase is replaced by i^(k m), giving the sigma_X and sigma_Y bases.

    Args:
        d (int): Prime dimension.
        n (int): Number of bases, 2 <= n <= d + 1.

    Returns:
        MubFamily: The bases; `n = d + 1` is a complete set.

    Raises:
        ValidationError: If `d` is not prime or `n` is out of range.
    """
    if not is_prime(d):
        raise ValidationError(f"MUB construction needs a prime dimension, got d={d}")
    if not 2 <= n <= d + 1:
        raise ValidationError(f"number of bases must be in [2, {d + 1}], got {n}")
    m = np.arange(d)
    bases = [tuple(PureState.basis(d, j) for j in range(d))]
    for k in range(n - 1):
        if d == 2:
            phase = (1j ** (k * m)) * np.exp(1j * np.pi * np.outer(np.arange(d), m))
        else:
            omega = np.exp(2j * np.pi / d)
            phase = omega ** (((k * m ** 2)[None, :] + np.outer(np.arange(d), m)) % d)
        bases.append(tuple(PureState.from_vector(row / np.sqrt(d)) for row in phase))
    return MubFamily(d, tuple(bases))


@dataclass(frozen=True, eq=False)
class AnticommutingSet:
    n: int
    dim: int
    observables: tuple

    def __post_init__(self):
        if len(self.observables) != self.n:
            raise ValidationError(f"expected {self.n} observables, got {len(self.observables)}")
        eye = np.eye(self.dim)
        for i, a in enumerate(self.observables):
            if a.shape != (self.dim, self.dim) or not is_hermitian(a):
                raise ValidationError(f"observable {i} is not a Hermitian {self.dim}x{self.dim} matrix")
            if np.max(np.abs(a @ a - eye)) > ORTHO_TOL:
                raise ValidationError(f"observable {i} does not square to the identity")
            for j in range(i):
                b = self.observables[j]
                if np.max(np.abs(a @ b + b @ a)) > ORTHO_TOL:
                    raise ValidationError(f"observables {j} and {i} do not anticommute")

    def projective(self) -> list:
        return [spectral_decompose(a) for a in self.observables]


def anticommuting_set(n: int) -> AnticommutingSet:
    """
    N pairwise anticommuting, +/-1-valued observables on floor(N/2) qubits.

    Uses the Jordan-Wigner generators X_0, Y_0, X_1, Y_1, ... (X_k and Y_k carry a
    string of Z on the sites before k): the first N-1 of them, followed by Z on every site.

    Raises:
        ValidationError: If `n` < 2.
    """
    if n < 2:
        raise ValidationError(f"anticommuting set needs at least 2 observables, got {n}")
    sites = n // 2
    x, y, z, eye = PAULI["X"], PAULI["Y"], PAULI["Z"], PAULI["I"]

    def on_site(k, op):
        return reduce(np.kron, [z] * k + [op] + [eye] * (sites - k - 1))

    generators = [on_site(k, op) for k in range(sites) for op in (x, y)]
    observables = generators[: n - 1] + [reduce(np.kron, [z] * sites)]
    return AnticommutingSet(n, 2 ** sites, tuple(observables))


@dataclass(frozen=True)
class BlochObservable:
    """Qubit observable alpha1 * I + alpha2 * (a . sigma) with unit Bloch vector a."""

    a: tuple
    alpha1: float = 0.0
    alpha2: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3,) or not np.all(np.isfinite(a)):
            raise ValidationError(f"Bloch vector must be a finite 3-vector, got {self.a}")
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ValidationError("Bloch vector is zero")
        if abs(norm - 1.0) > BLOCH_NORM_TOL:
            raise ValidationError(f"Bloch vector must have unit length, got {norm!r}")
        if self.alpha2 == 0:
            raise ValidationError("alpha2 = 0 gives a multiple of the identity")
        object.__setattr__(self, "a", tuple(float(v) for v in a))

    @classmethod
    def along(cls, vec, alpha1: float = 0.0, alpha2: float = 1.0) -> "BlochObservable":
        """Normalizes `vec` before building the observable."""
        vec = np.asarray(vec, dtype=float)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValidationError("Bloch vector is zero")
        return cls(tuple(vec / norm), alpha1, alpha2)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.a)

    def sigma(self) -> np.ndarray:
        """a . sigma"""
        return sum(c * PAULI[k] for c, k in zip(self.a, "XYZ"))

    def matrix(self) -> np.ndarray:
        return self.alpha1 * PAULI["I"] + self.alpha2 * self.sigma()


def qubit_observable(b: BlochObservable) -> ProjectiveObservable:
    """Spectral resolution: eigenvalues alpha1 +/- alpha2 with projectors (I +/- a.sigma)/2."""
    s = b.sigma()
    return ProjectiveObservable(
        (b.alpha1 + b.alpha2, b.alpha1 - b.alpha2),
        ((PAULI["I"] + s) / 2, (PAULI["I"] - s) / 2),
    )


def givens_basis(angle: float = np.pi / 4) -> tuple:
    """Computational basis of C^3 with the span{|1>, |2>} block rotated by `angle`."""
    c, s = np.cos(angle), np.sin(angle)
    return (
        PureState.basis(3, 0),
        PureState.from_vector([0, c, s]),
        PureState.from_vector([0, -s, c]),
    )


def _appendix_c_effects(phi1: np.ndarray, complement: np.ndarray) -> tuple:
    return (
        phi1 / 6 + complement / 2,
        2 * phi1 / 3 + complement / 2,
        phi1 / 6,
    )


def appendix_c_pair(basis2: Optional[Sequence[PureState]] = None,
                    basis: Optional[Sequence[PureState]] = None) -> tuple:
    """
    Two qutrit POVMs with a common eigenvector |phi_1> but no effect with eigenvalue 1.

    Both POVMs weight |phi_1><phi_1| by (1/6, 2/3, 1/6) and put 1/2 on the complement
    in the first two effects; the second POVM builds the complement from `basis2`.

    Args:
        basis2 (sequence of PureState, optional): Orthonormal basis {phi_1, phi'_2, phi'_3}.
            Defaults to `basis` with its last two vectors Givens-rotated by pi/4.
        basis (sequence of PureState, optional): Orthonormal basis {phi_1, phi_2, phi_3}.
            Defaults to the computational basis.

    Returns:
        tuple: (Povm A, Povm B).

    Raises:
        ValidationError: If a basis is not orthonormal or `basis2` does not start with phi_1.
    """
    basis = tuple(basis) if basis is not None else tuple(PureState.basis(3, k) for k in range(3))
    first = _check_orthonormal(basis, "basis")
    if basis2 is None:
        rotated = first @ np.column_stack([v.amplitudes for v in givens_basis()])
        basis2 = tuple(PureState.from_vector(col) for col in rotated.T)
    basis2 = tuple(basis2)
    _check_orthonormal(basis2, "basis2")
    if abs(basis[0].overlap(basis2[0]) - 1.0) > ORTHO_TOL:
        raise ValidationError("basis2 must share its first vector |phi_1> with basis")
    phi1 = basis[0].projector()
    rest_a = basis[1].projector() + basis[2].projector()
    rest_b = basis2[1].projector() + basis2[2].projector()
    return (Povm(_appendix_c_effects(phi1, rest_a)), Povm(_appendix_c_effects(phi1, rest_b)))


def measure_and_prepare_instrument(povm: Povm, prep: Sequence[PureState]) -> Instrument:
    """
    Instrument that measures `povm` and re-prepares |xi_i> on outcome i.

    Kraus operators are K_ik = |xi_i><v_ik| where A_i = sum_k |v_ik><v_ik| is the
    eigendecomposition of the effect, so the channel is rho -> sum_i tr[rho A_i] |xi_i><xi_i|.

    Raises:
        ValidationError: If the preparation list does not match the effects, or an
            effect is not positive semidefinite.
    """
    prep = tuple(prep)
    if len(prep) != len(povm.effects):
        raise ValidationError(f"need one preparation state per effect: {len(povm.effects)} effects, {len(prep)} states")
    kraus = []
    for i, (effect, xi) in enumerate(zip(povm.effects, prep)):
        if xi.dim != povm.dim:
            raise ValidationError(f"preparation state {i} has dimension {xi.dim}, expected {povm.dim}")
        w, v = eigh((effect + effect.conj().T) / 2)
        if w[0] < -1e-10:
            raise ValidationError(f"effect {i} is not positive semidefinite")
        ops = tuple(np.outer(xi.amplitudes, np.sqrt(wk) * v[:, k].conj())
                    for k, wk in enumerate(w) if wk > KRAUS_CUTOFF)
        kraus.append(ops or (np.zeros((povm.dim, povm.dim), dtype=complex),))
    return Instrument(tuple(kraus))


def _ginibre(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    q, r = np.linalg.qr(_ginibre(rng, d))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def projective_povm(basis: np.ndarray) -> Povm:
    """Rank-one projective POVM onto the columns of a unitary matrix."""
    return Povm(tuple(np.outer(col, col.conj()) for col in basis.T))


def random_observable(rng: np.random.Generator, d: int) -> ProjectiveObservable:
    """Spectral resolution of a GUE-like random Hermitian matrix (nondegenerate almost surely)."""
    g = _ginibre(rng, d)
    return spectral_decompose((g + g.conj().T) / 2)


def random_povm(rng: np.random.Generator, d: int, n_effects: int) -> Povm:
    """Random POVM A_i = S^(-1/2) G_i S^(-1/2) with G_i = M_i M_i^dag and S = sum_i G_i."""
    if n_effects < 1:
        raise ValidationError("a POVM needs at least one effect")
    grams = []
    for _ in range(n_effects):
        m = _ginibre(rng, d)
        grams.append(m @ m.conj().T)
    root_inv = inv(matrix_sqrt(sum(grams)))
    effects = []
    for g in grams:
        e = root_inv @ g @ root_inv
        effects.append((e + e.conj().T) / 2)
    return Povm(tuple(effects))


def random_bloch_observable(rng: np.random.Generator) -> BlochObservable:
    alpha2 = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    return BlochObservable.along(rng.normal(size=3), float(rng.normal()), float(alpha2))
