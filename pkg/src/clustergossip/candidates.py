"""Cluster candidate enumeration, averaging matrices, and dominance pruning.

A candidate is a head node plus the cluster it would run: the head and its
nearest neighbors by squared distance. Activating a candidate replaces the
members' states by their in-cluster mean, which as a matrix is a symmetric
averaging projector. Candidates with identical member sets produce the
identical projector, so only the cheapest head per member set needs to
survive pruning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .topology import Topology

__all__ = [
    "ClusterCandidate",
    "enumerate_candidates",
    "build_weight_matrix",
    "prune_dominated",
]


@dataclass(frozen=True)
class ClusterCandidate:
    """One candidate cluster: designated head plus its member set.

    Attributes:
        head: node index of the cluster head.
        members: sorted tuple of distinct node indices, head included.
    """

    head: int
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError(f"cluster needs at least 2 members, got {self.members}")
        if tuple(sorted(set(self.members))) != self.members:
            raise ValueError(f"members must be sorted and distinct: {self.members}")
        if self.head not in self.members:
            raise ValueError(f"head {self.head} is not a member of {self.members}")

    @property
    def size(self) -> int:
        return len(self.members)


def enumerate_candidates(
    topology: Topology, size_min: int, size_max: int
) -> list[ClusterCandidate]:
    """Emit one candidate per (head, size) pair over the given size range.

    For head h and size s the members are h plus its s-1 nearest neighbors
    by squared distance, ties broken toward the lower node index. With the
    full size range {2, ..., n} this yields n*(n-1) candidates.

    Args:
        topology: node layout.
        size_min: smallest cluster size, >= 2.
        size_max: largest cluster size, <= n.

    Returns:
        Candidates ordered by (head, size). Identical member sets reached
        from different heads are all kept; prune_dominated resolves them.
    """
    n = topology.n
    if size_min < 2:
        raise ConfigurationError(f"cluster_size_min must be >= 2, got {size_min}")
    if size_max > n:
        raise ConfigurationError(
            f"cluster_size_max must be <= number of nodes ({n}), got {size_max}"
        )
    if size_min > size_max:
        raise ConfigurationError(
            f"cluster_size_min {size_min} exceeds cluster_size_max {size_max}"
        )

    out: list[ClusterCandidate] = []
    seen: set[tuple[int, tuple[int, ...]]] = set()
    for head in range(n):
        # Stable neighbor order: by squared distance, then node index.
        order = [j for j in sorted(range(n), key=lambda j: (topology.d_sq[head, j], j)) if j != head]
        for size in range(size_min, size_max + 1):
            members = tuple(sorted([head] + order[: size - 1]))
            key = (head, members)
            if key in seen:
                continue
            seen.add(key)
            out.append(ClusterCandidate(head=head, members=members))
    return out


def build_weight_matrix(candidate: ClusterCandidate, n: int) -> np.ndarray:
    """Averaging matrix of one candidate: members mix to their mean, others hold.

    Entry (j, k) is 1/size for j, k both members, 1 on the diagonal for
    non-members, and 0 otherwise. The result is symmetric, doubly
    stochastic, and idempotent.
    """
    if candidate.members[-1] >= n:
        raise ValueError(
            f"candidate members {candidate.members} out of range for n={n}"
        )
    w = np.eye(n)
    idx = np.fromiter(candidate.members, dtype=int)
    w[np.ix_(idx, idx)] = 1.0 / candidate.size
    return w


def prune_dominated(
    candidates: Sequence[ClusterCandidate], costs: Sequence[float]
) -> list[ClusterCandidate]:
    """Keep one cheapest head per member set; drop the costlier twins.

    Candidates sharing a member set have the same averaging matrix, so the
    one with minimal total cost (ties toward the lower head index) makes
    every other redundant.

    Args:
        candidates: enumerated candidates.
        costs: per-candidate total energy cost, aligned with candidates.

    Returns:
        The kept subset, in the original enumeration order.
    """
    if len(candidates) != len(costs):
        raise ValueError(
            f"got {len(candidates)} candidates but {len(costs)} costs"
        )
    best_by_members: dict[tuple[int, ...], int] = {}
    for i, cand in enumerate(candidates):
        cur = best_by_members.get(cand.members)
        if cur is None:
            best_by_members[cand.members] = i
            continue
        if (costs[i], cand.head) < (costs[cur], candidates[cur].head):
            best_by_members[cand.members] = i
    kept = sorted(best_by_members.values())
    return [candidates[i] for i in kept]
