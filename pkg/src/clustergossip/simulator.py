"""Monte-Carlo simulation of randomized clustered averaging.

Each time slot one candidate cluster is drawn from the activation
distribution, its members' states collapse to their mean, and the
cluster's total transmit energy is charged. Trials track the relative
error ``|y(t) - mean(y(0))*1|^2 / |y(0)|^2`` and stop once it falls below
a threshold; a centralized observer is assumed for the stopping rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .candidates import ClusterCandidate
from .errors import ConfigurationError

__all__ = [
    "NetworkState",
    "SimulationTrace",
    "SimulationScenario",
    "AveragedTrace",
    "draw_initial_state",
    "sample_cluster",
    "consensus_step",
    "relative_error",
    "run_trial",
    "monte_carlo",
    "mse_bound_check",
]


@dataclass(frozen=True)
class NetworkState:
    """Sensor readings at one time slot."""

    y: np.ndarray
    t: int = 0


@dataclass(frozen=True)
class SimulationTrace:
    """One trial's history.

    errors[t] and energies[t] are the relative error and cumulative energy
    after slot t (index 0 is the initial state, zero energy);
    activations[t-1] is the candidate index drawn in slot t. terminated_at
    is the first slot index with error below threshold, or None if the
    iteration cap was hit first.
    """

    errors: np.ndarray
    energies: np.ndarray
    activations: np.ndarray
    terminated_at: int | None


@dataclass(frozen=True)
class SimulationScenario:
    """Everything a trial needs besides its random stream."""

    candidates: tuple[ClusterCandidate, ...]
    costs_l1: np.ndarray
    p: np.ndarray
    n: int
    init_low: float
    init_high: float
    threshold: float
    max_iters: int


@dataclass(frozen=True)
class AveragedTrace:
    """Pointwise means across trials.

    Trials that stopped early are extended as constants to the longest
    recorded length: a terminated network neither moves nor spends energy.
    mean_iterations_to_threshold counts a never-terminating run at the
    iteration cap; terminated_runs says how many actually crossed.
    """

    mean_errors: np.ndarray
    mean_energies: np.ndarray
    runs: int
    terminated_runs: int
    mean_iterations_to_threshold: float
    mean_energy_at_threshold: float


def draw_initial_state(
    n: int, low: float, high: float, rng: np.random.Generator
) -> NetworkState:
    """I.i.d. uniform readings on [low, high]."""
    if low > high:
        raise ConfigurationError(f"init range is empty: low={low} > high={high}")
    return NetworkState(y=rng.uniform(low, high, size=n), t=0)


def sample_cluster(p: np.ndarray, rng: np.random.Generator) -> int:
    """Draw a candidate index from the categorical distribution p."""
    p = np.asarray(p, dtype=float)
    cumulative = np.cumsum(p)
    if abs(cumulative[-1] - 1.0) > 1e-6:
        raise ValueError(f"p must sum to 1, got {cumulative[-1]}")
    idx = int(np.searchsorted(cumulative, rng.random(), side="right"))
    return min(idx, p.size - 1)


def consensus_step(state: NetworkState, candidate: ClusterCandidate) -> NetworkState:
    """Replace the members' readings with their in-cluster mean."""
    y = state.y.copy()
    idx = np.fromiter(candidate.members, dtype=int)
    y[idx] = y[idx].mean()
    return NetworkState(y=y, t=state.t + 1)


def relative_error(state: NetworkState, initial_state: NetworkState) -> float:
    """Squared distance to the initial mean, relative to the initial norm."""
    y0 = initial_state.y
    denom = float(y0 @ y0)
    if denom == 0.0:
        raise ValueError("relative error is undefined for an all-zero initial state")
    eps = state.y - y0.mean()
    return float(eps @ eps) / denom


def run_trial(
    initial: NetworkState,
    p: np.ndarray,
    candidates: Sequence[ClusterCandidate],
    costs: Sequence[float],
    threshold: float,
    max_iters: int,
    rng: np.random.Generator,
) -> SimulationTrace:
    """Run one trial until the error threshold or the iteration cap.

    Slot energy is the activated candidate's total two-phase cost, taken
    from ``costs`` (aligned with ``candidates``).
    """
    if threshold <= 0:
        raise ConfigurationError(f"threshold must be positive, got {threshold}")
    if max_iters < 1:
        raise ConfigurationError(f"max_iters must be >= 1, got {max_iters}")
    costs_arr = np.asarray(costs, dtype=float)

    state = initial
    errors = [relative_error(state, initial)]
    energies = [0.0]
    activations: list[int] = []
    terminated_at: int | None = None

    if errors[0] < threshold:
        terminated_at = 0
    else:
        for t in range(1, max_iters + 1):
            idx = sample_cluster(p, rng)
            state = consensus_step(state, candidates[idx])
            activations.append(idx)
            errors.append(relative_error(state, initial))
            energies.append(energies[-1] + costs_arr[idx])
            if errors[-1] < threshold:
                terminated_at = t
                break

    return SimulationTrace(
        errors=np.array(errors),
        energies=np.array(energies),
        activations=np.array(activations, dtype=int),
        terminated_at=terminated_at,
    )


def monte_carlo(
    scenario: SimulationScenario, runs: int, base_seed: int
) -> AveragedTrace:
    """Average independent trials, run r seeded with base_seed + r.

    Each run draws its own initial state from its stream, then simulates.
    Shorter traces are right-extended as constants before the pointwise
    mean, so every recorded slot averages over all runs.
    """
    if runs < 1:
        raise ConfigurationError(f"runs must be >= 1, got {runs}")

    traces: list[SimulationTrace] = []
    for r in range(runs):
        rng = np.random.default_rng(base_seed + r)
        initial = draw_initial_state(
            scenario.n, scenario.init_low, scenario.init_high, rng
        )
        traces.append(
            run_trial(
                initial,
                scenario.p,
                scenario.candidates,
                scenario.costs_l1,
                scenario.threshold,
                scenario.max_iters,
                rng,
            )
        )

    length = max(trace.errors.size for trace in traces)
    error_sum = np.zeros(length)
    energy_sum = np.zeros(length)
    for trace in traces:
        k = trace.errors.size
        error_sum[:k] += trace.errors
        error_sum[k:] += trace.errors[-1]
        energy_sum[:k] += trace.energies
        energy_sum[k:] += trace.energies[-1]

    iterations = [
        trace.terminated_at if trace.terminated_at is not None else scenario.max_iters
        for trace in traces
    ]
    finals = [trace.energies[-1] for trace in traces]
    return AveragedTrace(
        mean_errors=error_sum / runs,
        mean_energies=energy_sum / runs,
        runs=runs,
        terminated_runs=sum(t.terminated_at is not None for t in traces),
        mean_iterations_to_threshold=float(np.mean(iterations)),
        mean_energy_at_threshold=float(np.mean(finals)),
    )


def mse_bound_check(
    averaged_trace: AveragedTrace,
    xi_value: float,
    initial_error: float,
    slack: float = 0.10,
) -> bool:
    """Check the geometric error bound against an averaged trace.

    True iff the mean error at every recorded slot t stays below
    ``xi_value**t * initial_error * (1 + slack)``. initial_error must be in
    the same units as the trace (relative error).
    """
    if not 0.0 <= xi_value < 1.0:
        raise ValueError(f"xi_value must lie in [0, 1), got {xi_value}")
    bounds = initial_error * (1.0 + slack) * xi_value ** np.arange(
        averaged_trace.mean_errors.size
    )
    return bool(np.all(averaged_trace.mean_errors <= bounds))
