"""Problem instances, priors, occupation measures, and expected cost.

The decision problem: two agents A and B each observe one private bit
(xi_A, xi_B) and pick one of two actions, with no communication.  Nature
draws (xi_A, xi_B, xi_W) from a prior over {0,1}^3.  The team pays

    loss(u_A, u_B, xi_W=0) = -M[i][j]          (matched-pattern reward)
    loss(u_A, u_B, xi_W=1) = -chi * N[i][j]    (scaled by chi > 0)

where i, j are the action indices and M, N are 0/1 indicator matrices.
A (possibly correlated) strategy is summarised by its occupation measure,
the conditional table Q(u_A, u_B | xi_A, xi_B); the expected cost is
linear in that table, so optima over any strategy class sit at the
class's extreme points.

Cost-matrix families
--------------------
"cac"       M = I, N = antidiag: reward matching action indices when
            xi_W = 0 and mismatching them when xi_W = 1.
"half-cac"  as above but only the (0, 0) action profile is rewarded at
            xi_W = 0.
Row/column swaps (with the action relabeling recorded in the instance)
and the swap (M, N) -> (N, M) with prior slices and chi -> 1/chi
exchanged generate the orbits of these two families; everything else is
"general".

The symmetric prior family (SymPrior) puts mass s on (xi, xi, xi),
k on (xi, xi, ~xi) and t on each of (xi, ~xi, xi), (~xi, xi, xi), so
both agents' observations are equally informative about xi_W.

All types are immutable after validation and all operations are pure
functions, so everything here is safe to call concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

PROB_ATOL = 1e-12


class Error(Exception):
    """Base error for this package."""


class ValidationError(Error, ValueError):
    """Input violates a documented contract.  Carries a short code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class UnsupportedClassError(Error):
    """Operation is undefined for this instance's cost-matrix class."""


class DegeneratePriorError(Error):
    """Prior makes every chi-bound ratio degenerate (zero denominator)."""


class AmbiguousSignError(Error):
    """A closed-form sign condition sits exactly at zero."""


# Cost-matrix constants for the two surviving families.
CAC_M = np.array([[1, 0], [0, 1]], dtype=int)
CAC_N = np.array([[0, 1], [1, 0]], dtype=int)
HALF_CAC_M = np.array([[1, 0], [0, 0]], dtype=int)
HALF_CAC_N = CAC_N.copy()


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymPrior:
    """Symmetric prior (s, k, t) with 2s + 2k + 4t = 1 and s > k.

    s is the mass on each fully-agreeing state (xi, xi, xi), k on each
    state where both observations miss (xi, xi, ~xi), and t on each of
    the four states where exactly one observation misses.
    """

    s: float
    k: float
    t: float

    def __post_init__(self) -> None:
        for name, v in (("s", self.s), ("k", self.k), ("t", self.t)):
            if not math.isfinite(v) or v < 0:
                raise ValidationError("negative_prior_entry",
                                      f"{name}={v!r} must be finite and >= 0")
        total = 2 * self.s + 2 * self.k + 4 * self.t
        if abs(total - 1.0) > PROB_ATOL:
            raise ValidationError("prior_not_normalized",
                                  f"2s+2k+4t = {total!r}, expected 1")
        if not self.s > self.k:
            raise ValidationError("sym_prior_not_ordered",
                                  f"requires s > k, got s={self.s!r}, k={self.k!r}")

    @classmethod
    def from_lambda(cls, lam: float) -> "SymPrior":
        """Prior of two conditionally i.i.d. observations with accuracy lam.

        Each agent independently sees xi_W correctly with probability
        lam in (1/2, 1); xi_W itself is uniform.  Gives
        s = lam^2 / 2, k = (1-lam)^2 / 2, t = lam (1-lam) / 2.
        """
        if not (0.5 < lam < 1.0):
            raise ValidationError("lambda_out_of_range",
                                  f"lambda={lam!r} must lie in (1/2, 1)")
        return cls(s=lam * lam / 2.0, k=(1.0 - lam) ** 2 / 2.0,
                   t=lam * (1.0 - lam) / 2.0)

    def table(self) -> np.ndarray:
        """Expand to the 8-entry prior table indexed [xi_A, xi_B, xi_W]."""
        p = np.empty((2, 2, 2))
        for xi in (0, 1):
            p[xi, xi, xi] = self.s
            p[xi, xi, 1 - xi] = self.k
            p[xi, 1 - xi, xi] = self.t
            p[1 - xi, xi, xi] = self.t
        return p


def as_prior_table(prior: Any) -> np.ndarray:
    """Coerce a SymPrior, an (2,2,2) array, or a flat 8-vector to a table."""
    if isinstance(prior, SymPrior):
        return prior.table()
    arr = np.asarray(prior, dtype=float)
    if arr.shape == (8,):
        arr = arr.reshape(2, 2, 2)
    if arr.shape != (2, 2, 2):
        raise ValidationError("bad_prior_shape",
                              f"prior must have 8 entries, got shape {arr.shape}")
    return arr


def _validate_prior_table(p: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(p)):
        raise ValidationError("negative_prior_entry", "prior entries must be finite")
    if np.any(p < -PROB_ATOL):
        raise ValidationError("negative_prior_entry",
                              f"prior has a negative entry, min={p.min()!r}")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_ATOL:
        raise ValidationError("prior_not_normalized",
                              f"prior sums to {total!r}, expected 1")
    return p


def detect_sym_prior(prior: Any) -> SymPrior | None:
    """Return the (s, k, t) parameters if the table has the symmetric shape.

    Matching is exact up to PROB_ATOL; returns None when the table is not
    symmetric or when it violates s > k.
    """
    p = as_prior_table(prior)
    s = 0.5 * (p[0, 0, 0] + p[1, 1, 1])
    k = 0.5 * (p[0, 0, 1] + p[1, 1, 0])
    t_cells = np.array([p[0, 1, 0], p[0, 1, 1], p[1, 0, 0], p[1, 0, 1]])
    t = float(t_cells.mean())
    model = SymPrior.__new__(SymPrior)  # bypass validation for the probe
    object.__setattr__(model, "s", s)
    object.__setattr__(model, "k", k)
    object.__setattr__(model, "t", t)
    if np.max(np.abs(model.table() - p)) > PROB_ATOL:
        return None
    try:
        return SymPrior(s=s, k=k, t=t)
    except ValidationError:
        return None


@dataclass(frozen=True, eq=False)
class OccupationMeasure:
    """Conditional table q[u_A][u_B][xi_A][xi_B], one 4x4 stochastic block.

    For each observation pair the 4 action-pair weights are nonnegative
    and sum to one (both within PROB_ATOL).
    """

    table: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.table, dtype=float)
        if q.shape != (2, 2, 2, 2):
            raise ValidationError("bad_occupation_shape",
                                  f"expected shape (2,2,2,2), got {q.shape}")
        if np.any(q < -PROB_ATOL) or np.any(q > 1.0 + PROB_ATOL):
            raise ValidationError("occupation_out_of_range",
                                  "entries must lie in [0, 1]")
        sums = q.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1.0)) > PROB_ATOL:
            raise ValidationError("occupation_not_stochastic",
                                  f"per-observation sums {sums.ravel()!r} != 1")
        object.__setattr__(self, "table", _freeze(q))

    def equal_action_probabilities(self) -> np.ndarray:
        """Q(u_A = u_B | xi_A, xi_B) as a (2, 2) array."""
        q = self.table
        return q[0, 0] + q[1, 1]

    def __getitem__(self, idx) -> float:
        return self.table[idx]


def classify_matrices(M: np.ndarray, N: np.ndarray) -> str:
    """Match (M, N) against the known families and their orbits.

    Returns one of "cac", "cac-orbit", "half-cac", "half-cac-orbit",
    "half-cac-e-orbit", "general".  The e-orbit label marks the four
    half-cac orbit members reachable only through the (M, N) -> (N, M)
    swap; their chi-bounds are the reciprocal interval.
    """
    R = np.array([[0, 1], [1, 0]], dtype=int)
    pair = (M.tolist(), N.tolist())
    if pair == (CAC_M.tolist(), CAC_N.tolist()):
        return "cac"
    if pair == ((R @ CAC_M).tolist(), (R @ CAC_N).tolist()):
        return "cac-orbit"
    half = (HALF_CAC_M, HALF_CAC_N)
    r_members = [(R @ half[0], R @ half[1]),
                 (half[0] @ R, half[1] @ R),
                 (R @ half[0] @ R, R @ half[1] @ R)]
    e = (HALF_CAC_N, HALF_CAC_M)
    e_members = [e,
                 (R @ e[0], R @ e[1]),
                 (e[0] @ R, e[1] @ R),
                 (R @ e[0] @ R, R @ e[1] @ R)]
    if pair == (half[0].tolist(), half[1].tolist()):
        return "half-cac"
    for m, n in r_members:
        if pair == (m.tolist(), n.tolist()):
            return "half-cac-orbit"
    for m, n in e_members:
        if pair == (m.tolist(), n.tolist()):
            return "half-cac-e-orbit"
    return "general"


@dataclass(frozen=True, eq=False)
class TeamInstance:
    """A fully-specified problem: (M, N, prior, chi) plus action orderings.

    action_order_a / action_order_b record which physical action label
    each matrix row/column index refers to; orbit transforms that swap
    rows or columns flip the corresponding ordering.
    """

    M: np.ndarray
    N: np.ndarray
    prior: np.ndarray
    chi: float
    action_order_a: tuple[int, int] = (0, 1)
    action_order_b: tuple[int, int] = (0, 1)
    classification: str = field(init=False)

    def __post_init__(self) -> None:
        M = np.asarray(self.M)
        N = np.asarray(self.N)
        for name, mat in (("M", M), ("N", N)):
            if mat.shape != (2, 2) or not np.all(np.isin(mat, (0, 1))):
                raise ValidationError(
                    "matrix_entry_out_of_range",
                    f"{name} must be a 2x2 matrix with entries in {{0, 1}}")
        prior = _validate_prior_table(as_prior_table(self.prior))
        if not (math.isfinite(self.chi) and self.chi > 0):
            raise ValidationError("chi_nonpositive",
                                  f"chi={self.chi!r} must be > 0")
        for name, order in (("action_order_a", self.action_order_a),
                            ("action_order_b", self.action_order_b)):
            if tuple(sorted(order)) != (0, 1):
                raise ValidationError("bad_action_order",
                                      f"{name} must be a permutation of (0, 1)")
        M = np.array(M, dtype=int)
        N = np.array(N, dtype=int)
        M.setflags(write=False)
        N.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "prior", _freeze(prior))
        object.__setattr__(self, "classification", classify_matrices(self.M, self.N))

    def prob_xw(self, w: int) -> float:
        """Marginal probability of the cost-relevant state xi_W = w."""
        return float(self.prior[:, :, w].sum())


def cac_instance(prior: Any, chi: float) -> TeamInstance:
    """Instance with the coordinate/anti-coordinate cost matrices."""
    return TeamInstance(M=CAC_M, N=CAC_N, prior=as_prior_table(prior), chi=chi)


def half_cac_instance(prior: Any, chi: float) -> TeamInstance:
    """Instance rewarding coordination only on the (0, 0) profile."""
    return TeamInstance(M=HALF_CAC_M, N=HALF_CAC_N, prior=as_prior_table(prior),
                        chi=chi)


_CLASS_LABELS = {"cac": ("cac", "cac-orbit"),
                 "half-cac": ("half-cac", "half-cac-orbit", "half-cac-e-orbit"),
                 "general": None}


def parse_instance(doc: Mapping[str, Any]) -> TeamInstance:
    """Build a validated TeamInstance from a parsed JSON document.

    Schema: {"class": "cac"|"half-cac"|"general", "M": [[..]], "N": [[..]],
    "prior": {"type": "table", "values": [8 reals]} |
             {"type": "sym", "s": .., "k": .., "t": ..} |
             {"type": "iid-lambda", "lambda": ..},
    "chi": positive real}.
    The prior table values are ordered lexicographically in
    (xi_A, xi_B, xi_W).  A declared class must match the matrices.
    """
    if not isinstance(doc, Mapping):
        raise ValidationError("bad_document", "instance document must be an object")
    declared = doc.get("class")
    if declared not in _CLASS_LABELS:
        raise ValidationError("invalid_class",
                              f"class={declared!r} not one of cac, half-cac, general")
    for key in ("M", "N", "prior", "chi"):
        if key not in doc:
            raise ValidationError("missing_field", f"instance lacks field {key!r}")
    prior_doc = doc["prior"]
    if not isinstance(prior_doc, Mapping) or "type" not in prior_doc:
        raise ValidationError("bad_prior", "prior must be an object with a type")
    ptype = prior_doc["type"]
    if ptype == "table":
        values = prior_doc.get("values")
        if not isinstance(values, (list, tuple)) or len(values) != 8:
            raise ValidationError("bad_prior", "table prior needs 8 values")
        prior = np.asarray(values, dtype=float).reshape(2, 2, 2)
    elif ptype == "sym":
        try:
            prior = SymPrior(s=float(prior_doc["s"]), k=float(prior_doc["k"]),
                             t=float(prior_doc["t"])).table()
        except KeyError as exc:
            raise ValidationError("bad_prior", f"sym prior lacks {exc}") from None
    elif ptype == "iid-lambda":
        if "lambda" not in prior_doc:
            raise ValidationError("bad_prior", "iid-lambda prior lacks lambda")
        prior = SymPrior.from_lambda(float(prior_doc["lambda"])).table()
    else:
        raise ValidationError("bad_prior", f"unknown prior type {ptype!r}")
    instance = TeamInstance(M=np.asarray(doc["M"]), N=np.asarray(doc["N"]),
                            prior=prior, chi=float(doc["chi"]))
    allowed = _CLASS_LABELS[declared]
    if allowed is not None and instance.classification not in allowed:
        raise ValidationError(
            "class_mismatch",
            f"declared class {declared!r} but matrices classify as "
            f"{instance.classification!r}")
    return instance


def validate_instance(raw: TeamInstance | Mapping[str, Any]) -> TeamInstance:
    """Validate and classify an instance given as a TeamInstance or a dict."""
    if isinstance(raw, TeamInstance):
        return raw  # already validated on construction
    return parse_instance(raw)


def load_instance(path: str | Path) -> TeamInstance:
    """Read and validate an instance JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_instance(doc)


def kappa(instance: TeamInstance, xi_a: int, xi_b: int) -> float:
    """Cell weight chi * P(xi_a, xi_b, 1) - P(xi_a, xi_b, 0).

    This is the coefficient multiplying Q(u_A = u_B | xi_a, xi_b) in the
    reduced cost of a coordination-pattern ("cac") instance.
    """
    if instance.classification != "cac":
        raise UnsupportedClassError(
            f"kappa applies to cac-form instances, got {instance.classification!r}")
    p = instance.prior
    return float(instance.chi * p[xi_a, xi_b, 1] - p[xi_a, xi_b, 0])


def cost_weights(instance: TeamInstance) -> np.ndarray:
    """Per-cell cost tensor W[i, j, xi_A, xi_B] so that J = sum(W * q)."""
    p = instance.prior
    M = instance.M.astype(float)
    N = instance.N.astype(float)
    # loss(i, j, 0) = -M[i, j], loss(i, j, 1) = -chi N[i, j]
    return (-np.einsum("ij,ab->ijab", M, p[:, :, 0])
            - instance.chi * np.einsum("ij,ab->ijab", N, p[:, :, 1]))


def expected_cost(instance: TeamInstance, q: OccupationMeasure) -> float:
    """Expected cost by direct summation over all states and action pairs."""
    return float(np.sum(cost_weights(instance) * q.table))


def expected_cost_coordination_form(instance: TeamInstance,
                                    q: OccupationMeasure) -> float:
    """Reduced cost -chi P(xi_W=1) + sum kappa * Q(u_A = u_B | .).

    Valid for cac-form instances only; agrees with expected_cost within
    PROB_ATOL there and serves as its cross-check.
    """
    if instance.classification != "cac":
        raise UnsupportedClassError(
            "coordination-form cost applies to cac-form instances, got "
            f"{instance.classification!r}")
    p = instance.prior
    kap = instance.chi * p[:, :, 1] - p[:, :, 0]
    return float(-instance.chi * instance.prob_xw(1)
                 + np.sum(kap * q.equal_action_probabilities()))
