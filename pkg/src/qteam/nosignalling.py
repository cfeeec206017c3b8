"""No-signalling polytope: vertices, optimum, chi-bounds, orbit transforms.

The no-signalling polytope shares the 16 deterministic vertices with the
local polytope and adds 8 non-local vertices (PR-box type correlations).
Because the cost is linear, the no-signalling optimum is the minimum
over all 24 vertices.

For the "cac" and "half-cac" cost families there are closed-form bounds
(chi_lo, chi_hi): outside that interval the no-signalling optimum equals
the classical optimum, so no non-local (hence no entanglement-based)
improvement is possible there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Any

import numpy as np

from .core import (
    DegeneratePriorError,
    OccupationMeasure,
    TeamInstance,
    ValidationError,
    as_prior_table,
    cost_weights,
)
from .classical import deterministic_costs

NS_ATOL = 1e-12


@dataclass(frozen=True, order=True)
class NSVertex:
    """Non-local vertex bits (alpha, beta, delta).

    The vertex puts mass 1/2 on the action pairs (i, j) satisfying
    i xor j = xi_A xi_B xor alpha xi_A xor beta xi_B xor delta.
    """

    alpha: int
    beta: int
    delta: int

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "delta"):
            if getattr(self, name) not in (0, 1):
                raise ValidationError("bad_vertex_bit", f"{name} must be 0 or 1")

    @property
    def bits(self) -> tuple[int, int, int]:
        return (self.alpha, self.beta, self.delta)

    def parity(self, xi_a: int, xi_b: int) -> int:
        """Required i xor j at the given observation pair."""
        return (xi_a & xi_b) ^ (self.alpha & xi_a) ^ (self.beta & xi_b) ^ self.delta

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


ALL_NS_VERTICES: tuple[NSVertex, ...] = tuple(
    NSVertex(*bits) for bits in product((0, 1), repeat=3))


def ns_vertex_occupation(vertex: NSVertex) -> OccupationMeasure:
    """Occupation measure of a non-local vertex."""
    q = np.zeros((2, 2, 2, 2))
    for xi_a in (0, 1):
        for xi_b in (0, 1):
            target = vertex.parity(xi_a, xi_b)
            for i in (0, 1):
                q[i, i ^ target, xi_a, xi_b] = 0.5
    return OccupationMeasure(q)


_NS_TABLES = np.stack([ns_vertex_occupation(v).table for v in ALL_NS_VERTICES])


def ns_vertex_cost(instance: TeamInstance, vertex: NSVertex) -> float:
    """Expected cost of the instance under a non-local vertex."""
    return float(np.sum(cost_weights(instance)
                        * ns_vertex_occupation(vertex).table))


def ns_vertex_costs(instance: TeamInstance) -> np.ndarray:
    """Costs of the 8 non-local vertices, in lexicographic bit order."""
    return np.tensordot(_NS_TABLES, cost_weights(instance), axes=4)


def ns_optimum(instance: TeamInstance) -> float:
    """Minimum cost over all 24 no-signalling vertices."""
    return float(min(deterministic_costs(instance).min(),
                     ns_vertex_costs(instance).min()))


def ns_optimum_detail(instance: TeamInstance) -> tuple[str, float]:
    """Like ns_optimum but also names the winning vertex."""
    det = deterministic_costs(instance)
    nl = ns_vertex_costs(instance)
    di, ni = int(np.argmin(det)), int(np.argmin(nl))
    if det[di] <= nl[ni]:
        from .classical import ALL_DETERMINISTIC_POLICIES
        return f"deterministic {ALL_DETERMINISTIC_POLICIES[di]}", float(det[di])
    return f"non-local {ALL_NS_VERTICES[ni]}", float(nl[ni])


def no_signalling_residual(q: OccupationMeasure) -> float:
    """Largest violation of the no-signalling marginal equalities.

    Agent A's action marginal may not depend on xi_B and vice versa;
    returns the max absolute difference across the two equality families.
    """
    t = q.table
    marg_a = t.sum(axis=1)  # [u_A, xi_A, xi_B]
    marg_b = t.sum(axis=0)  # [u_B, xi_A, xi_B]
    res_a = np.max(np.abs(marg_a[:, :, 0] - marg_a[:, :, 1]))
    res_b = np.max(np.abs(marg_b[:, 0, :] - marg_b[:, 1, :]))
    return float(max(res_a, res_b))


@dataclass(frozen=True)
class ChiInterval:
    """Open chi-interval outside which no non-local advantage exists.

    For the cac family lo <= hi always holds.  For the half-cac family
    the two exclusion bounds come from different ratio families and can
    cross; lo >= hi then means the exclusion regions cover every chi and
    the advantage window is empty.
    """

    lo: float
    hi: float
    family: str  # "cac" | "half-cac" | "e-orbit-reciprocal"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError("bad_interval", "bounds must be finite")
        if not (0 < self.lo and 0 < self.hi):
            raise ValidationError("bad_interval",
                                  f"requires positive bounds, got "
                                  f"({self.lo!r}, {self.hi!r})")

    @property
    def is_empty(self) -> bool:
        return self.lo >= self.hi

    def excludes(self, chi: float) -> bool:
        """True when no non-local advantage is possible at this chi."""
        return chi <= self.lo or chi >= self.hi


def _parity_table(alpha: int, beta: int, delta: int) -> np.ndarray:
    f = np.empty((2, 2))
    for xi_a in (0, 1):
        for xi_b in (0, 1):
            f[xi_a, xi_b] = (xi_a & xi_b) ^ (alpha & xi_a) ^ (beta & xi_b) ^ delta
    return f


def _ratio_bounds(prior: np.ndarray, numer_fn, denom_fn) -> list[float]:
    p0 = prior[:, :, 0]
    p1 = prior[:, :, 1]
    ratios = []
    for bits in product((0, 1), repeat=3):
        f = _parity_table(*bits)
        denom = denom_fn(p1, f)
        if denom <= 0.0:
            continue  # this vertex imposes no finite chi constraint
        ratios.append(numer_fn(p0, f) / denom)
    return ratios


def ns_bounds_cac(prior: Any) -> ChiInterval:
    """Bounds (chi_lo, chi_hi) for the cac family.

    chi_lo minimises and chi_hi maximises, over the 8 non-local
    vertices, the ratio of xi_W=0 prior mass to xi_W=1 prior mass on the
    vertex's mismatch (respectively match) support.  Vertices with zero
    denominator are skipped; if all 8 are degenerate the prior is
    rejected.
    """
    p = as_prior_table(prior)
    los = _ratio_bounds(p, lambda p0, f: float((p0 * f).sum()),
                        lambda p1, f: float((p1 * f).sum()))
    his = _ratio_bounds(p, lambda p0, f: float((p0 * (1 - f)).sum()),
                        lambda p1, f: float((p1 * (1 - f)).sum()))
    if not los or not his:
        raise DegeneratePriorError("all chi-bound ratios are degenerate")
    return ChiInterval(lo=min(los), hi=max(his), family="cac")


def ns_bounds_half_cac(prior: Any) -> ChiInterval:
    """Bounds for the half-cac family: chi_hi is half the cac bound and
    chi_lo uses the (1 + mismatch-support) numerator."""
    p = as_prior_table(prior)
    los = _ratio_bounds(p, lambda p0, f: float((p0 * (1 + f)).sum()),
                        lambda p1, f: 2.0 * float((p1 * f).sum()))
    cac = ns_bounds_cac(p)
    if not los:
        raise DegeneratePriorError("all chi-bound ratios are degenerate")
    return ChiInterval(lo=min(los), hi=cac.hi / 2.0, family="half-cac")


def reciprocal_interval(interval: ChiInterval) -> ChiInterval:
    """Interval for the (M, N)-swapped orbit members: chi -> 1/chi."""
    return ChiInterval(lo=1.0 / interval.hi, hi=1.0 / interval.lo,
                       family="e-orbit-reciprocal")


def ns_bounds_for_instance(instance: TeamInstance) -> ChiInterval | None:
    """Dispatch the closed-form bounds by the instance's classification.

    Members of the half-cac orbit reachable only through the (M, N)
    swap get the reciprocal interval of the swapped-prior bounds.
    Returns None for general instances.
    """
    cls = instance.classification
    if cls in ("cac", "cac-orbit"):
        return ns_bounds_cac(instance.prior)
    if cls in ("half-cac", "half-cac-orbit"):
        return ns_bounds_half_cac(instance.prior)
    if cls == "half-cac-e-orbit":
        swapped = instance.prior[:, :, ::-1]
        return reciprocal_interval(ns_bounds_half_cac(swapped))
    return None


_ORBIT_OPS = ("R_left", "R_right", "E")


def orbit_transform(instance: TeamInstance, op: str) -> TeamInstance:
    """Apply one generator of the cost-family orbit.

    R_left / R_right swap the rows / columns of both M and N and flip
    the recorded action ordering of the affected agent.  E swaps
    (M, N) -> (N, M), exchanges the xi_W = 0 and xi_W = 1 prior slices,
    and maps chi -> 1/chi; under E every occupation measure's cost
    scales by exactly 1/chi.
    """
    if op not in _ORBIT_OPS:
        raise ValidationError("bad_orbit_op", f"op must be one of {_ORBIT_OPS}")
    R = np.array([[0, 1], [1, 0]], dtype=int)
    if op == "R_left":
        return TeamInstance(M=R @ instance.M, N=R @ instance.N,
                            prior=instance.prior, chi=instance.chi,
                            action_order_a=instance.action_order_a[::-1],
                            action_order_b=instance.action_order_b)
    if op == "R_right":
        return TeamInstance(M=instance.M @ R, N=instance.N @ R,
                            prior=instance.prior, chi=instance.chi,
                            action_order_a=instance.action_order_a,
                            action_order_b=instance.action_order_b[::-1])
    return TeamInstance(M=instance.N, N=instance.M,
                        prior=instance.prior[:, :, ::-1], chi=1.0 / instance.chi,
                        action_order_a=instance.action_order_a,
                        action_order_b=instance.action_order_b)
