"""
Numerical infima of average disturbance and average entropy over pure states.

Every search is multi-start Nelder-Mead. For d > 2 it runs over the 2d real
coordinates of an unnormalized amplitude vector (normalized before each evaluation);
qubits use the Bloch angles (theta, phi) instead. Qubit problems additionally get an
exhaustive Bloch-sphere grid whose best point is polished by one more local search.
Restart i draws its start from its own RNG stream seeded with (seed, i), so serial
and threaded runs return the same Estimate.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .formats import state_to_json
from .measures import DistanceKind, EntropyKind
from .qcore import Instrument, Povm, PureState, ValidationError, ensure_same_dim

GRID_CHUNK = 1 << 16
XATOL = 1e-10
# simplex restarts after the first converged run
MAX_REPOLISH = 3

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Search budget for the pure-state minimizers.

    Args:
        restarts: Haar-random starts for qubits, and the floor for larger d.
        max_iters: Nelder-Mead iteration cap per local search.
        tol: Objective stall tolerance.
        seed: Root seed; restart i uses the stream (seed, i).
        bloch_grid: (theta, phi) resolution of the qubit grid scan.
        restarts_per_dim: For d > 2 the restart count is max(restarts, restarts_per_dim * d).
        workers: Threads used to run restarts; 1 runs them serially.
    """

    restarts: int = 64
    max_iters: int = 2000
    tol: float = 1e-9
    seed: int = 42
    bloch_grid: tuple = (721, 1441)
    restarts_per_dim: int = 32
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")
        grid = tuple(int(n) for n in self.bloch_grid)
        if len(grid) != 2 or min(grid) < 2:
            raise ValidationError(f"bloch_grid must be two resolutions >= 2, got {self.bloch_grid}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        object.__setattr__(self, "bloch_grid", grid)

    def restarts_for(self, d: int) -> int:
        return self.restarts if d <= 2 else max(self.restarts, self.restarts_per_dim * d)


@dataclass(frozen=True, eq=False)
class Estimate:
    value: float
    state: PureState
    certified_gap: Optional[float] = None
    probes: int = 0
    seed: Optional[int] = None
    grid_error: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "state": state_to_json(self.state),
            "certified_gap": self.certified_gap,
            "probes": self.probes,
            "seed": self.seed,
        }
        if self.grid_error is not None:
            out["grid_error"] = self.grid_error
        return out


def random_pure_state(rng, d: int) -> PureState:
    """
    Haar-random pure state: a normalized standard complex Gaussian vector.

    Args:
        rng (np.random.Generator or int): RNG stream, or a seed for a fresh one.
        d (int): Dimension, at least 2.
    """
    if d < 2:
        raise ValidationError(f"dimension must be >= 2, got {d}")
    rng = np.random.default_rng(rng)
    return PureState.from_vector(rng.normal(size=d) + 1j * rng.normal(size=d))


def _restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _tagged(objective: Objective, d: int) -> Objective:
    objective.dim = d
    return objective


def disturbance_objective(kind: DistanceKind, instruments: Sequence[Instrument]) -> Objective:
    """
    Batched average disturbance: maps normalized states of shape (m, d) to m values.

    Raises:
        ValidationError: If `instruments` is empty or the dimensions disagree.
    """
    instruments = list(instruments)
    d = ensure_same_dim(instruments, "instruments")
    stacks = [inst.stacked() for inst in instruments]

    def objective(states: np.ndarray) -> np.ndarray:
        total = np.zeros(states.shape[0])
        for kraus in stacks:
            if kind is DistanceKind.FIDELITY:
                amps = np.einsum("mi,nij,mj->mn", states.conj(), kraus, states)
                value = 1.0 - np.sum(np.abs(amps) ** 2, axis=1)
            else:
                images = np.einsum("nij,mj->mni", kraus, states)
                out = np.einsum("mni,mnj->mij", images, images.conj())
                diff = out - np.einsum("mi,mj->mij", states, states.conj())
                w = np.abs(np.linalg.eigvalsh(diff))
                value = 0.5 * w.sum(axis=1) if kind is DistanceKind.TRACE else w.max(axis=1)
            total += np.clip(value, 0.0, 1.0)
        return total / len(stacks)

    return _tagged(objective, d)


def entropy_objective(kind: EntropyKind, povms: Sequence[Povm]) -> Objective:
    """Batched average outcome entropy of `povms`."""
    povms = list(povms)
    d = ensure_same_dim(povms, "povms")
    stacks = [np.array(p.effects) for p in povms]

    def objective(states: np.ndarray) -> np.ndarray:
        total = np.zeros(states.shape[0])
        for effects in stacks:
            p = np.clip(np.real(np.einsum("mi,nij,mj->mn", states.conj(), effects, states)), 0.0, None)
            positive = p > 0
            if kind.name == "shannon":
                terms = np.where(positive, p * np.log(np.where(positive, p, 1.0)), 0.0)
                value = -terms.sum(axis=1)
            else:
                terms = np.where(positive, np.where(positive, p, 1.0) ** kind.beta, 0.0)
                value = (terms.sum(axis=1) - 1.0) / (1.0 - kind.beta)
            total += np.clip(value, 0.0, None)
        return total / len(stacks)

    return _tagged(objective, d)


def _to_state(x: np.ndarray) -> Optional[np.ndarray]:
    d = x.size // 2
    vec = x[:d] + 1j * x[d:]
    norm = np.linalg.norm(vec)
    if not np.isfinite(norm) or norm < 1e-150:
        return None
    return vec / norm


def _to_coords(psi: np.ndarray) -> np.ndarray:
    return np.concatenate([psi.real, psi.imag])


def _from_angles(x: np.ndarray) -> Optional[np.ndarray]:
    if not np.all(np.isfinite(x)):
        return None
    theta, phi = x
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _to_angles(psi: np.ndarray) -> np.ndarray:
    theta = 2 * np.arctan2(np.abs(psi[1]), np.abs(psi[0]))
    return np.array([theta, np.angle(psi[1]) - np.angle(psi[0])])


def _chart(d: int) -> tuple:
    """(coords -> state, state -> coords). Qubits use Bloch angles, which have no flat directions."""
    return (_from_angles, _to_angles) if d == 2 else (_to_state, _to_coords)


def _local_search(objective: Objective, start: np.ndarray, cfg: OptimizerConfig) -> tuple:
    """
    Nelder-Mead from the state `start`, re-seeding the simplex while it keeps improving.

    Returns (value, normalized state vector, objective evaluations).
    """
    to_state, to_coords = _chart(start.size)
    probes = 0

    def f(x):
        nonlocal probes
        probes += 1
        vec = to_state(x)
        return 2.0 if vec is None else float(objective(vec[None, :])[0])

    best_x = to_coords(start)
    best_f = f(best_x)
    for _ in range(MAX_REPOLISH):
        res = minimize(f, best_x, method="Nelder-Mead",
                       options=dict(maxiter=cfg.max_iters, xatol=XATOL, fatol=cfg.tol, adaptive=True))
        improved = best_f - res.fun
        if res.fun < best_f:
            vec = to_state(res.x)
            if vec is not None:
                best_x, best_f = to_coords(vec), float(res.fun)
        if improved <= cfg.tol:
            break
    return best_f, to_state(best_x), probes


def _bloch_states(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    return np.stack([np.cos(tt / 2), np.exp(1j * pp) * np.sin(tt / 2)], axis=-1).reshape(-1, 2)


def bloch_scan(objective: Objective, resolution: tuple = (721, 1441)) -> Estimate:
    """
    Exhaustive minimum of a qubit objective over a (theta, phi) grid on the Bloch sphere.

    Args:
        objective (callable): Batched objective on states of shape (m, 2).
        resolution (tuple, optional): Number of theta and phi grid points.
            Defaults to (721, 1441), a quarter-degree grid.

    Returns:
        Estimate: Grid minimum, its state and `grid_error`, the largest change of the
            objective between neighbouring grid points (Lipschitz constant times spacing).

    Raises:
        ValidationError: If the objective is not defined on qubit states.
    """
    if getattr(objective, "dim", 2) != 2:
        raise ValidationError(f"Bloch scan needs a qubit objective, got dimension {objective.dim}")
    n_theta, n_phi = (int(n) for n in resolution)
    states = _bloch_states(np.linspace(0, np.pi, n_theta), np.linspace(0, 2 * np.pi, n_phi))
    values = np.concatenate([objective(states[i:i + GRID_CHUNK]) for i in range(0, len(states), GRID_CHUNK)])
    best = int(np.argmin(values))
    grid = values.reshape(n_theta, n_phi)
    grid_error = float(max(np.max(np.abs(np.diff(grid, axis=0))), np.max(np.abs(np.diff(grid, axis=1)))))
    return Estimate(float(values[best]), PureState.from_vector(states[best]), probes=len(values),
                    grid_error=grid_error)


def refine(objective: Objective, estimate: Estimate, cfg: Optional[OptimizerConfig] = None) -> Estimate:
    """Polishes an estimate (typically a grid point) with one local search."""
    cfg = cfg or OptimizerConfig()
    value, vec, probes = _local_search(objective, estimate.state.amplitudes, cfg)
    if value > estimate.value:
        return estimate
    state = PureState.from_vector(vec)
    return Estimate(float(objective(state.amplitudes[None, :])[0]), state, estimate.certified_gap,
                    estimate.probes + probes, estimate.seed, estimate.grid_error)


def minimize_state(objective: Objective, d: int, cfg: Optional[OptimizerConfig] = None,
                   bound: Optional[float] = None) -> Estimate:
    """
    Best value of a batched objective over pure states of dimension `d`.

    Runs cfg.restarts_for(d) local searches from Haar-random starts and, for qubits,
    the Bloch grid followed by a polishing search. Ties go to the lowest restart index;
    the grid candidate ranks after every restart.
    """
    cfg = cfg or OptimizerConfig()

    def run(index: int) -> tuple:
        start = random_pure_state(_restart_rng(cfg.seed, index), d)
        return _local_search(objective, start.amplitudes, cfg)

    indices = range(cfg.restarts_for(d))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(i) for i in indices]
    probes = sum(r[2] for r in results)
    candidates = [(value, i, vec) for i, (value, vec, _) in enumerate(results)]

    grid_error = None
    if d == 2:
        scan = bloch_scan(objective, cfg.bloch_grid)
        value, vec, polish_probes = _local_search(objective, scan.state.amplitudes, cfg)
        probes += scan.probes + polish_probes
        grid_error = scan.grid_error
        # the polish starts at the grid point, so value <= scan.value
        candidates.append((value, len(results), vec))

    _, _, vec = min(candidates, key=lambda c: (c[0], c[1]))
    state = PureState.from_vector(vec)
    value = float(objective(state.amplitudes[None, :])[0])
    gap = None if bound is None else value - bound
    return Estimate(value, state, gap, probes, cfg.seed, grid_error)


def minimize_average_disturbance(kind: DistanceKind, instruments: Sequence[Instrument],
                                 cfg: Optional[OptimizerConfig] = None,
                                 bound: Optional[float] = None) -> Estimate:
    """
    Numerical d_kind: the minimum over pure states of the average disturbance.

    Args:
        kind (DistanceKind): Disturbance measure.
        instruments (sequence of Instrument): Measurements, all of the same dimension.
        cfg (OptimizerConfig, optional): Search budget. Defaults to OptimizerConfig().
        bound (float, optional): Analytic lower bound; sets `certified_gap`.

    Returns:
        Estimate: Best value found, the state achieving it and the search bookkeeping.

    Raises:
        ValidationError: If `instruments` is empty or dimensions disagree.
    """
    objective = disturbance_objective(kind, instruments)
    return minimize_state(objective, objective.dim, cfg, bound)


def minimize_average_entropy(kind: EntropyKind, povms: Sequence[Povm],
                             cfg: Optional[OptimizerConfig] = None,
                             bound: Optional[float] = None) -> Estimate:
    """Numerical c_S: the minimum over pure states of the average outcome entropy."""
    objective = entropy_objective(kind, povms)
    return minimize_state(objective, objective.dim, cfg, bound)
