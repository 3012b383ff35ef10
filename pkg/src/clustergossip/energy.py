"""Transmit-energy cost model for cluster activations.

One activation has two phases: members transmit simultaneously to the head
(cost per member grows with squared distance to the head), then the head
broadcasts the result back, which must reach the farthest member. With the
default parameters the energy of a single transmission is numerically the
squared distance, so all energies are in abstract units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .candidates import ClusterCandidate
from .topology import Topology

__all__ = [
    "EnergyParams",
    "transmission_energy",
    "cost_fc",
    "cost_bc",
    "candidate_cost_l1",
    "expected_cost",
]


@dataclass(frozen=True)
class EnergyParams:
    """Radio energy parameters.

    Attributes:
        eps_amp: amplifier energy per bit per squared length unit.
        e_elec: circuitry energy per bit, spent on both transmit and
            receive ends. Defaults to 0, which drops the steady term and
            leaves only amplifier energy.
        k_bits: message length in bits.
    """

    eps_amp: float = 1.0
    e_elec: float = 0.0
    k_bits: float = 1.0

    def __post_init__(self) -> None:
        for name in ("eps_amp", "e_elec", "k_bits"):
            value = getattr(self, name)
            if not (value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value}")


def transmission_energy(params: EnergyParams, d_sq_scalar: float) -> float:
    """Energy of one point-to-point transmission over squared distance d_sq.

    Sum of transmit circuitry, amplifier, and receive circuitry terms:
    ``k*e_elec + eps_amp*k*d_sq + k*e_elec``. With default params this is
    just ``d_sq``.
    """
    if not (d_sq_scalar >= 0):
        raise ValueError(f"squared distance must be >= 0, got {d_sq_scalar}")
    k = params.k_bits
    return k * params.e_elec + params.eps_amp * k * d_sq_scalar + k * params.e_elec


def cost_fc(
    candidate: ClusterCandidate, topology: Topology, params: EnergyParams
) -> np.ndarray:
    """Per-node cost of the members-to-head phase.

    Each non-head member pays one transmission over its squared distance to
    the head; the head receives and pays nothing here; non-members are zero.
    """
    c = np.zeros(topology.n)
    for m in candidate.members:
        if m != candidate.head:
            c[m] = transmission_energy(params, topology.d_sq[candidate.head, m])
    return c


def cost_bc(
    candidate: ClusterCandidate, topology: Topology, params: EnergyParams
) -> np.ndarray:
    """Per-node cost of the head's broadcast phase.

    A single nonzero entry at the head, sized by the maximum squared
    distance from the head to any member.
    """
    c = np.zeros(topology.n)
    idx = np.fromiter(candidate.members, dtype=int)
    d_max = float(topology.d_sq[candidate.head, idx].max())
    c[candidate.head] = transmission_energy(params, d_max)
    return c


def candidate_cost_l1(
    candidate: ClusterCandidate, topology: Topology, params: EnergyParams
) -> float:
    """Total energy of one activation: both phases summed over all nodes."""
    return float((cost_fc(candidate, topology, params) + cost_bc(candidate, topology, params)).sum())


def expected_cost(
    p: np.ndarray,
    candidates: Sequence[ClusterCandidate],
    topology: Topology,
    params: EnergyParams,
) -> np.ndarray:
    """Expected per-node cost vector under activation probabilities p.

    Linear in p: the p-weighted sum of each candidate's two-phase cost
    vector.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (len(candidates),):
        raise ValueError(
            f"p has shape {p.shape}, expected ({len(candidates)},)"
        )
    total = np.zeros(topology.n)
    for weight, cand in zip(p, candidates):
        if weight != 0.0:
            total += weight * (cost_fc(cand, topology, params) + cost_bc(cand, topology, params))
    return total
