"""Deterministic policies and the classical (local-polytope) optimum.

The 16 deterministic policies are the vertices of the local polytope,
the set of strategies implementable with shared randomness.  Expected
cost is linear in the occupation measure, so the classical optimum is
the minimum over these vertices; mixed strategies never need to be
materialised.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import OccupationMeasure, SymPrior, TeamInstance, ValidationError, cost_weights


@dataclass(frozen=True, order=True)
class DeterministicPolicy:
    """Policy bits (alpha, gamma, beta, delta).

    Agent A plays index alpha*xi_A xor beta, agent B plays index
    gamma*xi_B xor delta.  Ordering of instances is lexicographic in
    (alpha, gamma, beta, delta), which is the tie-break order used by
    classical_optimum.
    """

    alpha: int
    gamma: int
    beta: int
    delta: int

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "beta", "delta"):
            if getattr(self, name) not in (0, 1):
                raise ValidationError("bad_policy_bit", f"{name} must be 0 or 1")

    @property
    def bits(self) -> tuple[int, int, int, int]:
        return (self.alpha, self.gamma, self.beta, self.delta)

    def actions(self, xi_a: int, xi_b: int) -> tuple[int, int]:
        """Action indices played at the given observation pair."""
        return ((self.alpha & xi_a) ^ self.beta, (self.gamma & xi_b) ^ self.delta)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


ALL_DETERMINISTIC_POLICIES: tuple[DeterministicPolicy, ...] = tuple(
    DeterministicPolicy(*bits) for bits in product((0, 1), repeat=4))


def deterministic_occupation(policy: DeterministicPolicy) -> OccupationMeasure:
    """Point-mass occupation measure of a deterministic policy."""
    q = np.zeros((2, 2, 2, 2))
    for xi_a in (0, 1):
        for xi_b in (0, 1):
            i, j = policy.actions(xi_a, xi_b)
            q[i, j, xi_a, xi_b] = 1.0
    return OccupationMeasure(q)


_DETERMINISTIC_TABLES = np.stack(
    [deterministic_occupation(p).table for p in ALL_DETERMINISTIC_POLICIES])


def deterministic_costs(instance: TeamInstance) -> np.ndarray:
    """Costs of all 16 deterministic policies, in lexicographic bit order."""
    W = cost_weights(instance)
    return np.tensordot(_DETERMINISTIC_TABLES, W, axes=4)


def classical_optimum(instance: TeamInstance) -> tuple[DeterministicPolicy, float]:
    """Argmin over the 16 deterministic policies and its cost.

    Ties go to the lexicographically smallest (alpha, gamma, beta, delta).
    """
    costs = deterministic_costs(instance)
    idx = int(np.argmin(costs))  # first occurrence == lexicographic tie-break
    return ALL_DETERMINISTIC_POLICIES[idx], float(costs[idx])


def sym_classical_optimum(prior: SymPrior, chi: float) -> float:
    """Closed-form classical optimum for a symmetric-prior cac instance.

    Three branches with breakpoints (k+t)/(s+t) and (s+t)/(k+t):
    constant matched actions below, one agent mirroring its observation
    in the middle, constant mismatched actions above.  Adjacent branches
    agree at the breakpoints.
    """
    if not chi > 0:
        raise ValidationError("chi_nonpositive", f"chi={chi!r} must be > 0")
    s, k, t = prior.s, prior.k, prior.t
    low = (k + t) / (s + t)
    high = (s + t) / (k + t)
    if chi >= high:
        return -chi * (s + k + 2 * t)
    if chi > low:
        return -(1.0 + chi) * (s + t)
    return -(s + k + 2 * t)
