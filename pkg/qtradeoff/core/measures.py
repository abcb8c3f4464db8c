"""Distances between states, measurement disturbance and entropies of outcome distributions."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import eigvalsh

from .qcore import (
    DensityOperator,
    Distribution,
    Instrument,
    ProjectiveObservable,
    PureState,
    ValidationError,
    apply_channel,
    check_dim,
    matrix_sqrt,
    outcome_probabilities,
    projective_instrument,
)

SAME_STATE_TOL = 1e-9


class DistanceKind(Enum):
    """Which distance turns a channel output into a disturbance value."""

    TRACE = "1"
    FIDELITY = "F"
    OPNORM = "inf"

    @classmethod
    def parse(cls, text: str) -> "DistanceKind":
        aliases = {"1": cls.TRACE, "trace": cls.TRACE,
                   "f": cls.FIDELITY, "fidelity": cls.FIDELITY,
                   "inf": cls.OPNORM, "opnorm": cls.OPNORM}
        try:
            return aliases[str(text).strip().lower()]
        except KeyError:
            raise ValidationError(f"Unknown distance measure '{text}'. Expected one of 1, F, inf")


@dataclass(frozen=True)
class EntropyKind:
    """
    Shannon entropy (natural log) or Tsallis entropy T_beta.

    Build with `EntropyKind.shannon()`, `EntropyKind.tsallis(beta)` or
    `EntropyKind.parse("tsallis:2")`.
    """

    name: str
    beta: Optional[float] = None

    def __post_init__(self):
        if self.name == "shannon":
            if self.beta is not None:
                raise ValidationError("Shannon entropy takes no beta")
        elif self.name == "tsallis":
            beta = self.beta
            if beta is None or not np.isfinite(beta) or beta <= 0 or beta == 1:
                raise ValidationError(f"Tsallis beta must be finite, positive and != 1, got {beta}")
            object.__setattr__(self, "beta", float(beta))
        else:
            raise ValidationError(f"Unknown entropy '{self.name}'")

    @classmethod
    def shannon(cls) -> "EntropyKind":
        return cls("shannon")

    @classmethod
    def tsallis(cls, beta: float) -> "EntropyKind":
        return cls("tsallis", beta)

    @classmethod
    def parse(cls, text: str) -> "EntropyKind":
        text = str(text).strip().lower()
        if text == "shannon":
            return cls.shannon()
        name, _, beta = text.partition(":")
        if name != "tsallis" or not beta:
            raise ValidationError(f"Unknown entropy '{text}'. Expected shannon or tsallis:<beta>")
        try:
            return cls.tsallis(float(beta))
        except ValueError:
            raise ValidationError(f"Tsallis beta '{beta}' is not a number")

    def label(self) -> str:
        return "shannon" if self.name == "shannon" else f"tsallis:{self.beta:g}"

    def max_value(self, d: int) -> float:
        """Entropy of the uniform distribution on d outcomes."""
        if self.name == "shannon":
            return float(np.log(d))
        return (d ** (1 - self.beta) - 1) / (1 - self.beta)


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """(1/2) tr|rho - sigma|."""
    check_dim(rho.dim, sigma.dim, "trace distance")
    w = eigvalsh(rho.matrix - sigma.matrix)
    return float(np.clip(0.5 * np.sum(np.abs(w)), 0.0, 1.0))


def opnorm_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Largest singular value of rho - sigma."""
    check_dim(rho.dim, sigma.dim, "operator-norm distance")
    w = eigvalsh(rho.matrix - sigma.matrix)
    return float(np.clip(np.max(np.abs(w)), 0.0, 1.0))


def fidelity_sq(rho: DensityOperator, psi: PureState) -> float:
    """F^2(rho, |psi><psi|) = <psi|rho|psi>."""
    check_dim(rho.dim, psi.dim, "fidelity")
    return float(np.clip(np.real(psi.expectation(rho.matrix)), 0.0, 1.0))


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """
    Uhlmann fidelity F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho)) of two mixed states.

    The disturbance path never calls this for pure inputs; it uses `fidelity_sq`.
    """
    check_dim(rho.dim, sigma.dim, "fidelity")
    root = matrix_sqrt(rho.matrix)
    inner = root @ sigma.matrix @ root
    return float(np.clip(np.real(np.trace(matrix_sqrt((inner + inner.conj().T) / 2))), 0.0, 1.0))


def same_state(rho: DensityOperator, sigma: DensityOperator, tol: float = SAME_STATE_TOL) -> bool:
    return trace_distance(rho, sigma) < tol


def _distance(kind: DistanceKind, out: DensityOperator, rho: DensityOperator) -> float:
    if kind is DistanceKind.TRACE:
        return trace_distance(out, rho)
    if kind is DistanceKind.OPNORM:
        return opnorm_distance(out, rho)
    return float(np.clip(1.0 - fidelity(out, rho) ** 2, 0.0, 1.0))


def disturbance(kind: DistanceKind, instrument: Instrument, psi: PureState) -> float:
    """
    Disturbance D_kind(Phi(|psi><psi|), |psi><psi|) caused by measuring with `instrument`.

    Args:
        kind (DistanceKind): TRACE, FIDELITY or OPNORM.
        instrument (Instrument): CP instrument implementing the measurement.
        psi (PureState): Input state.

    Returns:
        float: Value in [0, 1]; zero exactly when the channel leaves |psi> unchanged.

    Raises:
        DimensionMismatchError: If the instrument and state dimensions differ.
    """
    check_dim(instrument.dim, psi.dim, "disturbance")
    rho = psi.density()
    out = apply_channel(instrument, rho)
    if kind is DistanceKind.FIDELITY:
        return float(np.clip(1.0 - fidelity_sq(out, psi), 0.0, 1.0))
    return _distance(kind, out, rho)


def state_disturbance(kind: DistanceKind, instrument: Instrument, rho: DensityOperator) -> float:
    """Disturbance of a (possibly mixed) state; FIDELITY uses the general Uhlmann fidelity."""
    check_dim(instrument.dim, rho.dim, "disturbance")
    return _distance(kind, apply_channel(instrument, rho), rho)


def zero_disturbance_residual(instrument: Instrument, psi: PureState) -> float:
    """1 - sum_{i,k} |<psi|K_ik|psi>|^2; zero iff every disturbance measure vanishes at psi."""
    check_dim(instrument.dim, psi.dim, "zero-disturbance residual")
    amps = np.array([psi.expectation(k) for k in instrument.stacked()])
    return float(np.clip(1.0 - np.sum(np.abs(amps) ** 2), 0.0, 1.0))


def entropy_of(kind: EntropyKind, probs: np.ndarray) -> float:
    """Entropy of a raw probability vector; 0 log 0 and 0^beta are taken as 0."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p[p > 0]
    if kind.name == "shannon":
        return float(max(0.0, -np.sum(p * np.log(p))))
    return float(max(0.0, (np.sum(p ** kind.beta) - 1.0) / (1.0 - kind.beta)))


def entropy(kind: EntropyKind, p: Distribution) -> float:
    """
    Shannon (natural log) or Tsallis T_beta = (sum p^beta - 1) / (1 - beta) entropy.

    Raises:
        ValidationError: If `p` is not a Distribution.
    """
    if not isinstance(p, Distribution):
        p = Distribution(p)
    return entropy_of(kind, p.probs)


def t2_of_measurement(obs: ProjectiveObservable, psi: PureState) -> float:
    """T_2 entropy of the outcome distribution of `obs` measured on `psi`."""
    probs = outcome_probabilities(obs.as_povm(), psi)
    return float(np.clip(1.0 - np.sum(probs ** 2), 0.0, 1.0))


def projective_disturbance(kind: DistanceKind, obs: ProjectiveObservable, psi: PureState) -> float:
    return disturbance(kind, projective_instrument(obs), psi)
