"""Activation-probability optimization over the candidate simplex.

The objective is ``xi(p) + alpha * |c(p)|_1`` where xi(p) is the
second-largest eigenvalue of the mixture matrix W(p) and c(p) the expected
per-node energy. xi is evaluated by deflation: with J = (1/n) * ones, the
top eigenpair of W(p) is (1, 1/sqrt(n)) for every simplex p, so
``lambda_max(W(p) - J)`` equals the second-largest eigenvalue of W(p) and
its top eigenvector yields a subgradient coordinate ``v' W_i v`` per
candidate. The objective is convex in p (pointwise max of linear functions
plus a linear term), so a projected subgradient scheme with diminishing
steps converges; runs are fully deterministic (uniform start, no
randomness).

Solver layout: an even split of the iteration budget over a few phases
with geometrically shrinking step scale. The first phase locates the
active region; later phases shrink the oscillation band around the optimum
so the best iterate is accurate to ~1e-4 in objective on small instances,
which a single 1/sqrt(t) schedule does not reliably reach within the same
budget. Every single-candidate vertex is also evaluated outright, so the
result is never worse than any vertex that satisfies the connectivity
margin; in particular a perfect-mixing candidate (all nodes in one
cluster) is found exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .candidates import ClusterCandidate, build_weight_matrix
from .errors import NumericalError

__all__ = [
    "OptimizerOptions",
    "ActivationDistribution",
    "mixing_matrix",
    "xi",
    "symmetric_top_eigenpair",
    "objective_subgradient",
    "project_simplex",
    "optimize",
]

_ASYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class OptimizerOptions:
    """Solver knobs.

    Attributes:
        alpha: weight of the energy regularizer, >= 0.
        epsilon: connectivity margin; the result is feasible when
            xi <= 1 - epsilon.
        max_iters: total projected-subgradient iteration budget.
        step_scale: base step size; iteration t of a phase uses
            ``step_scale * phase_mult / sqrt(t)``.
        tol: stall tolerance on the best objective.
        stall_window: iterations without tol-improvement before the current
            phase is abandoned.
        step_phases: per-phase multipliers on step_scale; the iteration
            budget is split evenly across phases.
        support_floor: probabilities below this are zeroed in the returned
            vector, which is then renormalized.
    """

    alpha: float = 0.0
    epsilon: float = 1e-2
    max_iters: int = 5000
    step_scale: float = 1.0
    tol: float = 1e-6
    stall_window: int = 500
    step_phases: tuple[float, ...] = (1.0, 0.1, 0.01)
    support_floor: float = 1e-6

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.step_scale <= 0:
            raise ValueError(f"step_scale must be positive, got {self.step_scale}")
        if not self.step_phases:
            raise ValueError("step_phases must be nonempty")


@dataclass(frozen=True)
class ActivationDistribution:
    """Optimization outcome.

    When feasible is False the fields describe the iterate with the
    smallest xi found, which documents how far from connectivity the
    candidate set is.
    """

    p: np.ndarray
    xi: float
    expected_cost_l1: float
    objective: float
    feasible: bool


def _weight_stack(candidates: Sequence[ClusterCandidate], n: int) -> np.ndarray:
    """Stack of per-candidate averaging matrices, shape (C, n, n)."""
    stack = np.empty((len(candidates), n, n))
    for i, cand in enumerate(candidates):
        stack[i] = build_weight_matrix(cand, n)
    return stack


def mixing_matrix(
    p: np.ndarray, candidates: Sequence[ClusterCandidate], n: int
) -> np.ndarray:
    """Expected averaging matrix W(p): the p-weighted candidate mixture."""
    p = np.asarray(p, dtype=float)
    if p.shape != (len(candidates),):
        raise ValueError(f"p has shape {p.shape}, expected ({len(candidates)},)")
    return np.tensordot(p, _weight_stack(candidates, n), axes=1)


def symmetric_top_eigenpair(
    matrix: np.ndarray, tol: float = 1e-9
) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector of a symmetric matrix.

    Full dense decomposition; fine for the matrix sizes in play. Raises
    ValueError when the input is asymmetric beyond 1e-9.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if np.abs(a - a.T).max() > _ASYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(a)
    top = float(eigenvalues[-1])
    vec = eigenvectors[:, -1]
    residual = float(np.linalg.norm(a @ vec - top * vec))
    if residual > max(tol, 1e-12 * max(1.0, abs(top))):
        raise NumericalError(f"eigenpair residual {residual} exceeds tolerance {tol}")
    return top, vec


def xi(p: np.ndarray, candidates: Sequence[ClusterCandidate], n: int) -> float:
    """Second-largest eigenvalue of W(p), clipped to [0, 1].

    Computed as the largest eigenvalue of W(p) - J, which deflates the
    always-present top eigenpair of W(p).
    """
    w = mixing_matrix(p, candidates, n)
    top, _ = symmetric_top_eigenpair(w - np.full((n, n), 1.0 / n))
    return min(max(top, 0.0), 1.0)


def objective_subgradient(
    p: np.ndarray,
    candidates: Sequence[ClusterCandidate],
    costs: Sequence[float],
    alpha: float,
    n: int,
) -> np.ndarray:
    """Subgradient of the objective at p.

    Coordinate i is ``v' W_i v + alpha * cost_i`` with v the unit top
    eigenvector of W(p) - J. At a simple top eigenvalue this is the exact
    gradient; under multiplicity any top eigenvector still gives a valid
    subgradient.
    """
    stack = _weight_stack(candidates, n)
    w = np.tensordot(np.asarray(p, dtype=float), stack, axes=1)
    _, v = symmetric_top_eigenpair(w - np.full((n, n), 1.0 / n))
    return (stack @ v) @ v + alpha * np.asarray(costs, dtype=float)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-based thresholding: find the largest k for which shifting the top
    k entries by a common offset lands on the simplex, then clip.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a vector with non-finite entries")
    u = np.sort(v)[::-1]
    shifted = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - shifted / ks > 0)[0][-1]
    tau = shifted[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _clean_support(p: np.ndarray, floor: float) -> np.ndarray:
    """Zero probabilities below floor and renormalize."""
    q = p.copy()
    q[q < floor] = 0.0
    total = q.sum()
    if total <= 0.0:
        q[:] = 0.0
        q[int(np.argmax(p))] = 1.0
        return q
    return q / total


def optimize(
    candidates: Sequence[ClusterCandidate],
    costs: Sequence[float],
    n: int,
    options: OptimizerOptions,
) -> ActivationDistribution:
    """Minimize ``xi(p) + alpha * |c(p)|_1`` over the candidate simplex.

    Only distributions that keep the whole network mixing count as
    solutions: the returned iterate must satisfy ``xi <= 1 - epsilon``.
    Large ``alpha`` would otherwise drive the mixture onto a single cheap
    cluster whose xi is 1 (the rest of the network never moves), so the
    search alternates in the classic switching-subgradient fashion: at an
    iterate violating the margin it steps along the spectral subgradient
    alone (restoring connectivity), otherwise along the full objective
    subgradient. The best margin-satisfying iterate seen anywhere --
    including all single-candidate vertices, which are evaluated exactly
    -- is kept, cleaned of sub-floor probabilities, renormalized and
    re-evaluated; all reported figures refer to that final vector.

    Deterministic: uniform start, fixed phase schedule.

    When no iterate meets the margin the result carries ``feasible=False``
    and describes the smallest-xi iterate instead.
    """
    if len(candidates) == 0:
        raise ValueError("candidate list is empty")
    costs_arr = np.asarray(costs, dtype=float)
    if costs_arr.shape != (len(candidates),):
        raise ValueError(
            f"costs have shape {costs_arr.shape}, expected ({len(candidates)},)"
        )
    if not np.all(np.isfinite(costs_arr)) or np.any(costs_arr < 0):
        raise ValueError("costs must be finite and nonnegative")

    c_count = len(candidates)
    stack = _weight_stack(candidates, n)
    flat = stack.reshape(c_count, n * n)
    j_flat = np.full(n * n, 1.0 / n)
    alpha = options.alpha

    def evaluate(p: np.ndarray) -> tuple[float, float, float, np.ndarray]:
        a = (flat.T @ p - j_flat).reshape(n, n)
        eigenvalues, eigenvectors = np.linalg.eigh(a)
        xi_val = min(max(float(eigenvalues[-1]), 0.0), 1.0)
        cost_val = float(costs_arr @ p)
        obj = xi_val + alpha * cost_val
        if not np.isfinite(obj):
            raise NumericalError(f"objective became non-finite: {obj}")
        return obj, xi_val, cost_val, eigenvectors[:, -1]

    margin = 1.0 - options.epsilon
    p = np.full(c_count, 1.0 / c_count)
    obj, xi_val, _, v = evaluate(p)
    best_feas_obj, best_feas_p = np.inf, None
    best_xi, best_xi_p = xi_val, p.copy()

    def note(obj: float, xi_val: float, p: np.ndarray) -> None:
        nonlocal best_feas_obj, best_feas_p, best_xi, best_xi_p
        if xi_val <= margin and obj < best_feas_obj:
            best_feas_obj, best_feas_p = obj, p.copy()
        if xi_val < best_xi:
            best_xi, best_xi_p = xi_val, p.copy()

    note(obj, xi_val, p)

    # Vertex sweep: cheap, exact at the corners of the simplex.
    for i in range(c_count):
        vertex_xi = min(max(float(np.linalg.eigvalsh(stack[i] - j_flat.reshape(n, n))[-1]), 0.0), 1.0)
        vertex_obj = vertex_xi + alpha * costs_arr[i]
        e = np.zeros(c_count)
        e[i] = 1.0
        note(vertex_obj, vertex_xi, e)

    def progress() -> float:
        # Comparable scalar that improves monotonically: once some iterate
        # meets the margin we chase its objective, before that we chase xi.
        return best_feas_obj if best_feas_p is not None else 1.0 + best_xi

    per_phase = max(1, options.max_iters // len(options.step_phases))
    for mult in options.step_phases:
        scale = options.step_scale * mult
        anchor = progress()
        since_anchor = 0
        for t in range(1, per_phase + 1):
            spectral = (stack @ v) @ v
            if xi_val > margin:
                g = spectral
            else:
                g = spectral + alpha * costs_arr
            p = project_simplex(p - (scale / np.sqrt(t)) * g)
            obj, xi_val, _, v = evaluate(p)
            note(obj, xi_val, p)
            since_anchor += 1
            if since_anchor >= options.stall_window:
                if anchor - progress() < options.tol:
                    break
                anchor = progress()
                since_anchor = 0
        # Next phase restarts its step schedule from the best point so far.
        p = (best_feas_p if best_feas_p is not None else best_xi_p).copy()
        obj, xi_val, _, v = evaluate(p)

    if best_feas_p is not None:
        final_p = _clean_support(best_feas_p, options.support_floor)
        obj, xi_val, cost_val, _ = evaluate(final_p)
        return ActivationDistribution(
            p=final_p,
            xi=xi_val,
            expected_cost_l1=cost_val,
            objective=obj,
            feasible=xi_val <= margin,
        )

    fallback = _clean_support(best_xi_p, options.support_floor)
    obj, xi_val, cost_val, _ = evaluate(fallback)
    return ActivationDistribution(
        p=fallback,
        xi=xi_val,
        expected_cost_l1=cost_val,
        objective=obj,
        feasible=xi_val <= margin,
    )
