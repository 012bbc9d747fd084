"""Time-ordered evolution by piecewise-constant exponentials on a symmetric grid.

The evolution operator over (-T, T) is the ordered product of one exponential
per step, evaluated at the step midpoints ``t_j = j T / n`` for half-integer
``j`` from ``-n + 1/2`` to ``n - 1/2``.  The grid midpoints are negatives of
each other by construction, which is what makes the time-reversal identity
``theta U theta^-1 = U^dagger`` hold at the discrete level: scattering zeros
protected by that identity are exact up to rounding at any step count.

Each step exponential is computed through a Hermitian eigendecomposition, so
every factor is unitary to rounding; products are accumulated pairwise
(log-depth), which keeps the unitarity defect of long products near machine
precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hamiltonian import HamiltonianLike, as_evaluator
from .spin_algebra import TimeReversalOp, conjugate_by_theta

__all__ = [
    "TimeGrid",
    "Propagation",
    "PropagationError",
    "ScatteringReport",
    "propagate",
    "evolve_interval",
    "theta_conjugation_identity",
    "scattering_matrix",
    "default_steps",
    "converge_steps",
    "converge_horizon",
    "ConvergenceResult",
]

_BLOCK = 16384  # steps handled per batched eigendecomposition


@dataclass(frozen=True)
class TimeGrid:
    """Symmetric grid over (-T, T) with n steps per half-interval.

    Midpoints are built by negating the positive half, so ``t_{-j} == -t_j``
    exactly in floating point.
    """

    T: float
    n: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def steps(self) -> int:
        return 2 * self.n

    @property
    def midpoints(self) -> np.ndarray:
        positive = (np.arange(self.n) + 0.5) * self.dt
        return np.concatenate([-positive[::-1], positive])

    @property
    def boundaries(self) -> np.ndarray:
        """Step boundary times -T, -T + dt, ..., T (2n + 1 values)."""
        k = np.arange(2 * self.n + 1)
        return -self.T + k * self.dt


class PropagationError(RuntimeError):
    """Numerical abort: Hermiticity or unitarity breach during propagation."""

    def __init__(self, message: str, time: float | None = None, defect: float | None = None):
        super().__init__(message)
        self.time = time
        self.defect = defect


@dataclass
class Propagation:
    """Result of propagating over a grid.

    ``checkpoint_unitaries[k]`` is the partial product U(checkpoint_times[k], -T);
    checkpoints are full matrices so one propagation serves every initial state.
    """

    grid: TimeGrid
    u_final: np.ndarray
    checkpoint_times: np.ndarray | None = None
    checkpoint_unitaries: np.ndarray | None = None
    unitarity_defect: float = 0.0
    hermiticity_defect: float = 0.0

    @property
    def dim(self) -> int:
        return self.u_final.shape[0]


def _step_unitaries(h_stack: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices, via eigendecomposition."""
    w, v = np.linalg.eigh(h_stack)
    phases = np.exp(-1j * dt * w)
    return (v * phases[:, None, :]) @ v.conj().swapaxes(-1, -2)

def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """Product of a stack of matrices, earliest first: U[m-1] @ ... @ U[0].

    Reduced pairwise so rounding error grows with the log of the length.
    """
    while len(stack) > 1:
        m = len(stack)
        paired = np.matmul(stack[1 : m - m % 2 : 2], stack[0 : m - m % 2 : 2])
        stack = np.concatenate([paired, stack[m - 1 :]]) if m % 2 else paired
    return stack[0]


def _hermiticity_scan(h_stack: np.ndarray, times: np.ndarray, tol: float) -> float:
    defects = np.max(np.abs(h_stack - h_stack.conj().swapaxes(-1, -2)), axis=(-1, -2))
    worst = int(np.argmax(defects))
    if defects[worst] > tol:
        raise PropagationError(
            f"H(t) is not Hermitian at t={times[worst]:.6g} "
            f"(defect {defects[worst]:.3e} > {tol:.1e})",
            time=float(times[worst]),
            defect=float(defects[worst]),
        )
    return float(defects[worst])


def _product_over(evaluator, midpoints: np.ndarray, dt: float, hermitian_tol: float):
    """Ordered product of step exponentials over the given midpoints.

    Returns (U, worst hermiticity defect).  Work proceeds in blocks to bound
    memory; each block is reduced pairwise and folded into the running
    product.
    """
    u = None
    worst = 0.0
    for start in range(0, len(midpoints), _BLOCK):
        chunk = midpoints[start : start + _BLOCK]
        h_stack = evaluator.evaluate_many(chunk)
        worst = max(worst, _hermiticity_scan(h_stack, chunk, hermitian_tol))
        block_u = _ordered_product(_step_unitaries(h_stack, dt))
        u = block_u if u is None else block_u @ u
    return u, worst


def propagate(
    h: HamiltonianLike,
    grid: TimeGrid,
    checkpoint_stride: int | None = None,
    hermitian_tol: float = 1e-10,
) -> Propagation:
    """Compute U(T, -T) for a time-dependent Hamiltonian.

    Parameters
    ----------
    h:
        Hamiltonian, linear-sweep evaluator, or callable ``t -> matrix``.
    grid:
        Symmetric time grid; the earliest factor is applied first.
    checkpoint_stride:
        When given, record the partial product every this many steps
        (plus the endpoints).
    hermitian_tol:
        Abort threshold for non-Hermitian H(t) at any midpoint.
    """
    evaluator = as_evaluator(h)
    mids = grid.midpoints
    dt = grid.dt
    total = grid.steps

    if checkpoint_stride is None:
        u, herm = _product_over(evaluator, mids, dt, hermitian_tol)
        times = unitaries = None
    else:
        if checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be a positive integer")
        boundaries = grid.boundaries
        edges = list(range(0, total, checkpoint_stride)) + [total]
        dim = evaluator.evaluate_many(mids[:1]).shape[-1]
        u = np.eye(dim, dtype=complex)
        herm = 0.0
        times = [boundaries[0]]
        unitaries = [u]
        for lo, hi in zip(edges[:-1], edges[1:]):
            segment, seg_herm = _product_over(evaluator, mids[lo:hi], dt, hermitian_tol)
            herm = max(herm, seg_herm)
            u = segment @ u
            times.append(boundaries[hi])
            unitaries.append(u)
        times = np.asarray(times)
        unitaries = np.stack(unitaries)

    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    return Propagation(
        grid=grid,
        u_final=u,
        checkpoint_times=times,
        checkpoint_unitaries=unitaries,
        unitarity_defect=defect,
        hermiticity_defect=herm,
    )


def evolve_interval(
    h: HamiltonianLike,
    t_start: float,
    t_stop: float,
    steps: int,
    hermitian_tol: float = 1e-10,
) -> np.ndarray:
    """Evolution operator over an arbitrary interval with midpoint steps.

    Useful for composing evolutions; ``evolve_interval(h, -T, 0, n)`` followed
    by ``evolve_interval(h, 0, T, n)`` multiplies to the symmetric-grid result.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if not t_stop > t_start:
        raise ValueError("t_stop must exceed t_start")
    dt = (t_stop - t_start) / steps
    mids = t_start + (np.arange(steps) + 0.5) * dt
    u, _ = _product_over(as_evaluator(h), mids, dt, hermitian_tol)
    return u


def theta_conjugation_identity(propagation: Propagation | np.ndarray, theta: TimeReversalOp) -> float:
    """Max-entry deviation of ``theta U theta^-1`` from ``U^dagger``.

    Small (rounding-level) for symmetric grids on dynamically symmetric
    Hamiltonians; order one when the symmetry is broken.
    """
    u = propagation.u_final if isinstance(propagation, Propagation) else np.asarray(propagation)
    return float(np.max(np.abs(conjugate_by_theta(theta, u) - u.conj().T)))


@dataclass
class ScatteringReport:
    """Scattering amplitudes and probabilities between labeled diabatic states.

    ``amplitudes[m, n]`` is the amplitude to end in state m having started in
    state n; ``probabilities`` is its elementwise squared modulus.  The
    Kramers pairing and no-scattering verdicts are attached by the analysis
    layer when requested.
    """

    labels: tuple[str, ...]
    amplitudes: np.ndarray
    probabilities: np.ndarray
    unitarity_defect: float
    grid: TimeGrid
    kramers_pairs: tuple | None = None
    theorem: object | None = None

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def probability(self, start: int, end: int) -> float:
        """Transition probability from basis index ``start`` to ``end``."""
        return float(self.probabilities[end, start])


_STOCHASTIC_TOL = 1e-8


def scattering_matrix(propagation: Propagation, labels: Sequence[str] | None = None) -> ScatteringReport:
    """Read the scattering matrix off a finished propagation.

    Raises PropagationError when unitarity has degraded far enough that the
    probability matrix is no longer doubly stochastic to 1e-8.
    """
    u = propagation.u_final
    dim = u.shape[0]
    if labels is None:
        labels = tuple(str(i + 1) for i in range(dim))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != dim:
            raise ValueError(f"{len(labels)} labels for dimension {dim}")
        if len(set(labels)) != dim:
            raise ValueError("diabatic labels must be distinct")
    p = np.abs(u) ** 2
    sums = np.concatenate([p.sum(axis=0), p.sum(axis=1)])
    if np.max(np.abs(sums - 1.0)) > _STOCHASTIC_TOL:
        raise PropagationError(
            f"unitarity breach: probability sums deviate by {np.max(np.abs(sums - 1.0)):.3e}",
            defect=propagation.unitarity_defect,
        )
    return ScatteringReport(
        labels=labels,
        amplitudes=u.copy(),
        probabilities=p,
        unitarity_defect=propagation.unitarity_defect,
        grid=propagation.grid,
    )


def default_steps(h: HamiltonianLike, T: float, target: float = 0.05, samples: int = 33) -> int:
    """Step count per half-interval so that dt * max ||H|| stays below target.

    The norm is the spectral norm sampled over the interval.  Conservative
    for linear sweeps (the large-norm edges are adiabatic); override freely.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    evaluator = as_evaluator(h)
    ts = np.linspace(-T, T, samples)
    stack = evaluator.evaluate_many(ts)
    norm = float(np.max(np.abs(np.linalg.eigvalsh(stack))))
    if norm == 0.0:
        return 1
    return max(1, int(np.ceil(T * norm / target)))


@dataclass
class ConvergenceResult:
    """Outcome of a step- or horizon-doubling convergence run."""

    propagation: Propagation
    converged: bool
    delta: float
    history: list = field(default_factory=list)

    @property
    def grid(self) -> TimeGrid:
        return self.propagation.grid


def converge_steps(
    h: HamiltonianLike,
    T: float,
    n0: int,
    tol: float = 1e-4,
    max_doublings: int = 3,
    hermitian_tol: float = 1e-10,
) -> ConvergenceResult:
    """Double the step count until every transition probability is stable.

    ``delta`` is the max change of any probability over the last doubling;
    ``history`` records (n, delta, delta/dt) triples, the last column being
    the monitored convergence coefficient.
    """
    prop = propagate(h, TimeGrid(T=T, n=n0), hermitian_tol=hermitian_tol)
    probs = np.abs(prop.u_final) ** 2
    history: list[tuple[int, float, float]] = []
    n = n0
    for _ in range(max_doublings):
        n *= 2
        nxt = propagate(h, TimeGrid(T=T, n=n), hermitian_tol=hermitian_tol)
        nxt_probs = np.abs(nxt.u_final) ** 2
        delta = float(np.max(np.abs(nxt_probs - probs)))
        history.append((n, delta, delta / (T / n)))
        prop, probs = nxt, nxt_probs
        if delta < tol:
            return ConvergenceResult(propagation=prop, converged=True, delta=delta, history=history)
    delta = history[-1][1] if history else 0.0
    return ConvergenceResult(propagation=prop, converged=not history or delta < tol, delta=delta, history=history)


def converge_horizon(
    h: HamiltonianLike,
    T0: float,
    n0: int,
    tol: float = 1e-4,
    max_doublings: int = 4,
    hermitian_tol: float = 1e-10,
) -> ConvergenceResult:
    """Double the half-interval (keeping dt fixed) until probabilities settle.

    Mimics taking the evolution window to infinity for linear-sweep models
    whose transitions saturate at large |t|.
    """
    prop = propagate(h, TimeGrid(T=T0, n=n0), hermitian_tol=hermitian_tol)
    probs = np.abs(prop.u_final) ** 2
    history: list[tuple[float, float]] = []
    T, n = T0, n0
    for _ in range(max_doublings):
        T, n = 2 * T, 2 * n
        nxt = propagate(h, TimeGrid(T=T, n=n), hermitian_tol=hermitian_tol)
        nxt_probs = np.abs(nxt.u_final) ** 2
        delta = float(np.max(np.abs(nxt_probs - probs)))
        history.append((T, delta))
        prop, probs = nxt, nxt_probs
        if delta < tol:
            return ConvergenceResult(propagation=prop, converged=True, delta=delta, history=history)
    delta = history[-1][1] if history else 0.0
    return ConvergenceResult(propagation=prop, converged=not history or delta < tol, delta=delta, history=history)
