"""Quantum-optimal costs, advantage thresholds, and structure checks.

Two independent routes to the quantum optimum:

* sym_quantum_optimum: the restricted path for symmetric-prior cac
  instances.  The maximally entangled state (alpha = pi/2) with a fixed
  theta sign pattern is optimal there, which reduces the search to three
  phi angles on [0, pi]^3.  The reduction fixes phi_a(0) = 0 (the shared
  reference axis can be aligned with agent A's first measurement).
* full_quantum_optimum: brute force over all 256 action assignments with
  multi-start continuous optimisation over (alpha, theta, phi).  It
  makes no use of the restricted path's structure, so the two routes are
  mutual oracles.

Both optimisers use cyclic coordinate minimisation.  Along any single
angle the cost is exactly A cos(x) + B sin(x) + C, so each coordinate
is minimised in closed form from three probe evaluations; no gradients
or step sizes are involved and every run is deterministic.

For the symmetric family the advantage region in chi is the open
interval between the two reciprocal roots of

    f(chi) = 2 (chi k - s)(chi s - k) + (chi - 1)^2 (k + s) t,

excluding chi = 1; the roots are A -+ sqrt(A^2 - 1) with
A = (s^2 + k^2 + (k+s) t) / (2 k s + (k+s) t).

Grid cells, multi-starts, and assignment iterations are independent
pure evaluations; they are computed in vectorised batches and merged by
a deterministic first-minimum reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .core import (
    AmbiguousSignError,
    DegeneratePriorError,
    SymPrior,
    TeamInstance,
    ValidationError,
    cost_weights,
)
from .classical import sym_classical_optimum
from .quantum import ActionAssignment, QubitStrategy, all_assignments

_MULTISTART_SEED = 7411  # base seed for reproducible multi-start draws

PI = math.pi


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the numeric optimisers; defaults match the test suite."""

    grid_points_per_angle: int = 16
    multistart_count: int = 16
    refine_tolerance: float = 1e-9
    max_refine_iterations: int = 120

    def __post_init__(self) -> None:
        if self.grid_points_per_angle < 8:
            raise ValidationError("bad_config", "grid_points_per_angle must be >= 8")
        if self.multistart_count < 16:
            raise ValidationError("bad_config", "multistart_count must be >= 16")
        if not self.refine_tolerance > 0:
            raise ValidationError("bad_config", "refine_tolerance must be positive")
        if self.max_refine_iterations < 1:
            raise ValidationError("bad_config", "max_refine_iterations must be >= 1")


DEFAULT_CONFIG = OptimizerConfig()


def optimal_assignment() -> ActionAssignment:
    """The outcome-to-action map that is optimal for the cac family."""
    return ActionAssignment.canonical()


def sym_optimal_angles(prior: SymPrior, chi: float
                       ) -> tuple[float, tuple[float, float, float, float]]:
    """Closed-form optimal alpha and theta for a symmetric-prior instance.

    alpha = pi/2 and theta = (0, pi, theta_b0, theta_b1) where theta_b0
    flips with the sign of chi - 1 and theta_b1 with the sign of
    s chi - k.  Raises when either sign condition sits exactly at zero;
    callers then fall back to the numeric pattern search.
    """
    if not chi > 0:
        raise ValidationError("chi_nonpositive", f"chi={chi!r} must be > 0")
    d_chi = chi - 1.0
    d_sk = prior.s * chi - prior.k
    if d_chi == 0.0 or d_sk == 0.0:
        raise AmbiguousSignError(
            f"sign conditions undefined at chi={chi!r} (chi-1={d_chi!r}, "
            f"s*chi-k={d_sk!r})")
    theta_b0 = 0.0 if d_chi > 0 else PI
    theta_b1 = 0.0 if d_sk > 0 else PI
    return PI / 2.0, (0.0, PI, theta_b0, theta_b1)


def _pattern_cost(prior: SymPrior, chi: float, phi_a1, phi_b0, phi_b1,
                  sign_b0: int, sign_b1: int):
    """Restricted-path cost for one theta sign pattern (vectorised).

    sign_b0 = +1 corresponds to theta_b0 = 0 (the phi_b0 phase adds),
    sign_b0 = -1 to theta_b0 = pi (it subtracts); likewise sign_b1 for
    theta_b1 against phi_b1.
    """
    s, k, t = prior.s, prior.k, prior.t
    return (-chi * (s + k + 2 * t)
            + 0.5 * (chi * k - s) * (1.0 + np.cos(phi_b0))
            + 0.5 * t * (chi - 1.0) * (2.0 + np.cos(phi_b1)
                                       + np.cos(phi_a1 + sign_b0 * phi_b0))
            + 0.5 * (chi * s - k) * (1.0 + np.cos(phi_a1 + sign_b1 * phi_b1)))


def j_bar(prior: SymPrior, chi: float, phi_a1: float, phi_b0: float,
          phi_b1: float) -> float:
    """Restricted cost with both phase terms adding (theta_b = (0, 0))."""
    return float(_pattern_cost(prior, chi, phi_a1, phi_b0, phi_b1, +1, +1))


def j_underbar(prior: SymPrior, chi: float, phi_a1: float, phi_b0: float,
               phi_b1: float) -> float:
    """Restricted cost with the phi_b0 phase subtracting (theta_b0 = pi)."""
    return float(_pattern_cost(prior, chi, phi_a1, phi_b0, phi_b1, -1, +1))


# Column kinds for the coordinate minimiser.
_BOX = 0      # interval [0, pi]
_CIRCLE = 1   # periodic, wrapped into [0, 2 pi)


def _coordinate_descent(cost_fn: Callable[[np.ndarray], np.ndarray],
                        params: np.ndarray, kinds: Sequence[int],
                        tol: float, max_passes: int
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic exact coordinate minimisation for per-angle sinusoidal costs.

    Each column's conditional cost is A cos x + B sin x + C; A, B, C are
    recovered from probes at x = 0, pi/2, pi and the column is set to
    the exact constrained minimiser.  Descent is monotone; stops when a
    full pass improves no row by more than tol.
    """
    params = np.array(params, dtype=float)
    costs = np.asarray(cost_fn(params), dtype=float)
    for _ in range(max_passes):
        prev = costs
        for col, kind in enumerate(kinds):
            params[:, col] = 0.0
            f0 = np.asarray(cost_fn(params), dtype=float)
            params[:, col] = PI
            f2 = np.asarray(cost_fn(params), dtype=float)
            params[:, col] = 0.5 * PI
            f1 = np.asarray(cost_fn(params), dtype=float)
            a = 0.5 * (f0 - f2)
            c = 0.5 * (f0 + f2)
            b = f1 - c
            x_star = np.arctan2(-b, -a) % (2.0 * PI)
            if kind == _CIRCLE:
                params[:, col] = x_star
                costs = c - np.hypot(a, b)
            else:
                j_star = np.where(x_star <= PI,
                                  a * np.cos(x_star) + b * np.sin(x_star) + c,
                                  np.inf)
                table = np.stack([f0, f2, j_star])
                pick = np.argmin(table, axis=0)
                x_new = np.choose(pick, [np.zeros_like(x_star),
                                         np.full_like(x_star, PI), x_star])
                params[:, col] = x_new
                costs = np.take_along_axis(table, pick[None, :], axis=0)[0]
        if np.max(prev - costs) < tol:
            break
    return params, costs


_THETA_PATTERNS = ((+1, +1), (-1, +1), (+1, -1), (-1, -1))


def sym_quantum_optimum(prior: SymPrior, chi: float,
                        cfg: OptimizerConfig | None = None
                        ) -> tuple[QubitStrategy, float]:
    """Restricted-path quantum optimum for a symmetric-prior cac instance.

    Minimises every theta sign pattern's phi objective over [0, pi]^3 by
    dense grid seeding plus exact coordinate descent and keeps the best.
    The first two patterns are the two named objectives (j_bar and
    j_underbar); the remaining two only matter outside the interval
    where those branches are the proven minimisers, and keep the search
    exact for every chi > 0.
    """
    if not chi > 0:
        raise ValidationError("chi_nonpositive", f"chi={chi!r} must be > 0")
    cfg = cfg or DEFAULT_CONFIG
    n = cfg.grid_points_per_angle
    axis = np.linspace(0.0, PI, n)
    mesh = np.stack([g.ravel() for g in np.meshgrid(axis, axis, axis,
                                                    indexing="ij")], axis=1)
    best_cost = math.inf
    best_phis = (0.0, 0.0, 0.0)
    best_pattern = _THETA_PATTERNS[0]
    n_seeds = 8
    for pattern in _THETA_PATTERNS:
        def cost_fn(p: np.ndarray, _pat=pattern) -> np.ndarray:
            return _pattern_cost(prior, chi, p[:, 0], p[:, 1], p[:, 2], *_pat)

        grid_costs = cost_fn(mesh)
        seed_idx = np.argpartition(grid_costs, n_seeds - 1)[:n_seeds]
        seed_idx = seed_idx[np.argsort(grid_costs[seed_idx], kind="stable")]
        seeds = mesh[seed_idx]
        refined, costs = _coordinate_descent(cost_fn, seeds, (_BOX, _BOX, _BOX),
                                             cfg.refine_tolerance,
                                             cfg.max_refine_iterations)
        row = int(np.argmin(costs))
        if costs[row] < best_cost:
            best_cost = float(costs[row])
            best_phis = tuple(float(v) for v in refined[row])
            best_pattern = pattern
    theta_b0 = 0.0 if best_pattern[0] > 0 else PI
    theta_b1 = 0.0 if best_pattern[1] > 0 else PI
    strategy = QubitStrategy(alpha=PI / 2.0,
                             theta=(0.0, PI, theta_b0, theta_b1),
                             phi=(0.0, *best_phis),
                             assignment=optimal_assignment())
    return strategy, best_cost


def _assignment_weights(weights: np.ndarray, assignment: ActionAssignment
                        ) -> np.ndarray:
    """Reindex the cost tensor by outcomes: wp[xa, xb, oA, oB].

    Mapping outcomes through the assignment before weighting is
    equivalent to pushing the outcome distribution forward onto actions;
    for degenerate pairs it reproduces the trivial-measurement rule
    because the outcome marginal of the other agent is unchanged.
    """
    wp = np.empty((2, 2, 2, 2))
    acts_a = (assignment.a_plus, assignment.a_minus)
    acts_b = (assignment.b_plus, assignment.b_minus)
    for xa in (0, 1):
        for xb in (0, 1):
            for o_a in (0, 1):
                for o_b in (0, 1):
                    wp[xa, xb, o_a, o_b] = weights[acts_a[o_a][xa],
                                                   acts_b[o_b][xb], xa, xb]
    return wp


def _batched_costs(params: np.ndarray, wp: np.ndarray) -> np.ndarray:
    """Cost of each parameter row against its own outcome-weight tensor.

    params columns: alpha, theta_a0, theta_a1, theta_b0, theta_b1,
    phi_a0, phi_a1, phi_b0, phi_b1.  wp has shape (rows, 2, 2, 2, 2)
    indexed [row, xa, xb, oA, oB].
    """
    alpha = params[:, 0]
    ca = np.cos(0.5 * alpha) ** 2
    sa = 1.0 - ca
    sal = np.sin(alpha)
    total = np.zeros(params.shape[0])
    for xa in (0, 1):
        th_a = params[:, 1 + xa]
        ph_a = params[:, 5 + xa]
        cpa = np.cos(0.5 * ph_a) ** 2
        spa = 1.0 - cpa
        sin_a = np.sin(ph_a)
        for xb in (0, 1):
            th_b = params[:, 3 + xb]
            ph_b = params[:, 7 + xb]
            cpb = np.cos(0.5 * ph_b) ** 2
            spb = 1.0 - cpb
            beta = 0.25 * sal * np.cos(th_a + th_b) * sin_a * np.sin(ph_b)
            w = wp[:, xa, xb]
            total += (w[:, 0, 0] * (ca * cpa * cpb + sa * spa * spb + beta)
                      + w[:, 0, 1] * (ca * cpa * spb + sa * spa * cpb - beta)
                      + w[:, 1, 0] * (ca * spa * cpb + sa * cpa * spb - beta)
                      + w[:, 1, 1] * (ca * spa * spb + sa * cpa * cpb + beta))
    return total


_FULL_KINDS = (_BOX, _CIRCLE, _CIRCLE, _CIRCLE, _CIRCLE, _BOX, _BOX, _BOX, _BOX)


def full_quantum_optimum(instance: TeamInstance,
                         cfg: OptimizerConfig | None = None,
                         assignments: Sequence[ActionAssignment] | None = None
                         ) -> tuple[QubitStrategy, float]:
    """Brute-force quantum optimum over action assignments and angles.

    Every assignment gets cfg.multistart_count random starts (fixed
    seeds, one stream per assignment index) refined by exact coordinate
    descent; all starts across all assignments are optimised as one
    vectorised batch.  Works for any instance in the superstructure.
    """
    cfg = cfg or DEFAULT_CONFIG
    if assignments is None:
        assignments = all_assignments()
    weights = cost_weights(instance)
    n_starts = cfg.multistart_count
    rows = len(assignments) * n_starts
    params = np.empty((rows, 9))
    wp = np.empty((rows, 2, 2, 2, 2))
    for idx, assignment in enumerate(assignments):
        rng = np.random.default_rng([_MULTISTART_SEED, idx])
        block = slice(idx * n_starts, (idx + 1) * n_starts)
        draw = rng.random((n_starts, 9))
        draw[:, 0] *= PI                  # alpha
        draw[:, 1:5] *= 2.0 * PI          # theta
        draw[:, 5:9] *= PI                # phi
        params[block] = draw
        wp[block] = _assignment_weights(weights, assignment)

    refined, costs = _coordinate_descent(lambda p: _batched_costs(p, wp),
                                         params, _FULL_KINDS,
                                         cfg.refine_tolerance,
                                         cfg.max_refine_iterations)
    row = int(np.argmin(costs))
    best = refined[row]
    strategy = QubitStrategy(alpha=float(best[0]),
                             theta=tuple(float(v) for v in best[1:5]),
                             phi=tuple(float(v) for v in best[5:9]),
                             assignment=assignments[row // n_starts])
    return strategy, float(costs[row])


def f_bar(prior: SymPrior, chi: float) -> float:
    """Quadratic whose roots bound the symmetric-family advantage set."""
    s, k, t = prior.s, prior.k, prior.t
    return 2.0 * (chi * k - s) * (chi * s - k) + (chi - 1.0) ** 2 * (k + s) * t


@dataclass(frozen=True)
class ThresholdReport:
    """Advantage thresholds and no-signalling bounds for one prior.

    chi_th and chi_up_th are the reciprocal roots A -+ sqrt(A^2 - 1) of
    the threshold quadratic, where A is the midpoint ratio
    (s^2 + k^2 + (k+s) t) / (2 k s + (k+s) t); the advantage set is
    (chi_th, chi_up_th) minus the point chi = 1.  chi_lower_ns and
    chi_upper_ns are the wider no-signalling bounds k/s and s/k.
    """

    chi_lower_ns: float
    chi_upper_ns: float
    chi_th: float
    chi_up_th: float
    A: float


def thresholds_from_raw(s: float, k: float, t: float) -> ThresholdReport:
    """Thresholds from unnormalised (s, k, t) ratios.

    The report depends only on the ratios (A is homogeneous of degree
    zero), so callers may pass any positive scaling of a valid prior.
    """
    if not (s > k >= 0.0 and t >= 0.0 and math.isfinite(s + k + t)):
        raise ValidationError("sym_prior_not_ordered",
                              f"requires s > k >= 0 and t >= 0, got {(s, k, t)!r}")
    denom = 2.0 * k * s + (k + s) * t
    if denom == 0.0:
        raise DegeneratePriorError("k = t = 0 leaves no threshold quadratic")
    ratio = (s * s + k * k + (k + s) * t) / denom
    if ratio < 1.0:
        raise ValidationError("degenerate_threshold",
                              f"midpoint ratio {ratio!r} < 1")
    upper = ratio + math.sqrt(ratio * ratio - 1.0)
    lower = 1.0 / upper  # stable small root; the product is 1 by construction
    return ThresholdReport(chi_lower_ns=(k / s), chi_upper_ns=(s / k if k > 0
                                                               else math.inf),
                           chi_th=lower, chi_up_th=upper, A=ratio)


def thresholds(prior: SymPrior) -> ThresholdReport:
    """Advantage thresholds for a validated symmetric prior."""
    return thresholds_from_raw(prior.s, prior.k, prior.t)


def advantage_gap(prior: SymPrior, chi: float,
                  cfg: OptimizerConfig | None = None) -> float:
    """Quantum optimum minus classical optimum; nonpositive up to rounding."""
    _, quantum = sym_quantum_optimum(prior, chi, cfg)
    return quantum - sym_classical_optimum(prior, chi)


_BRANCHES = ("low", "mid", "up")


def restricted_gap(prior: SymPrior, chi: float, phi_a1, phi_b0, phi_b1,
                   branch: str | None = None):
    """Gap surface (restricted cost minus classical branch) at fixed chi.

    branch selects which classical branch is subtracted and which theta
    pattern is used: "low" pairs j_underbar with the constant-matched
    cost, "mid" pairs j_bar with the mirroring cost, "up" pairs j_bar
    with the constant-mismatched cost.  When omitted it is picked from
    chi against the classical breakpoints.  Vectorised over the phis.
    """
    s, k, t = prior.s, prior.k, prior.t
    if branch is None:
        if chi <= (k + t) / (s + t):
            branch = "low"
        elif chi < (s + t) / (k + t):
            branch = "mid"
        else:
            branch = "up"
    if branch not in _BRANCHES:
        raise ValidationError("bad_branch", f"branch must be one of {_BRANCHES}")
    if branch == "low":
        return (_pattern_cost(prior, chi, phi_a1, phi_b0, phi_b1, -1, +1)
                + (s + k + 2 * t))
    if branch == "mid":
        return (_pattern_cost(prior, chi, phi_a1, phi_b0, phi_b1, +1, +1)
                + (1.0 + chi) * (s + t))
    return (_pattern_cost(prior, chi, phi_a1, phi_b0, phi_b1, +1, +1)
            + chi * (s + k + 2 * t))


_STATIONARY_POINTS = {(PI, 0.0, 0.0): "mid",
                      (0.0, PI, PI): "up",
                      (0.0, 0.0, 0.0): "low"}


@dataclass(frozen=True)
class StationarityReport:
    """Value and central-difference gradient of the gap at one point."""

    point: tuple[float, float, float]
    branch: str
    value_abs: float
    grad_norm: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed


def stationarity_check(prior: SymPrior, chi: float,
                       point: Sequence[float],
                       step: float = 1e-5,
                       tol: float = 1e-6) -> StationarityReport:
    """Verify the gap and its gradient vanish at a known stationary point.

    The gap branch is selected by the point: each of the three
    stationary points is an identity of one branch expression for every
    chi.  The gradient is a central difference with the given step.
    """
    pt = tuple(float(v) for v in point)
    branch = None
    for ref, br in _STATIONARY_POINTS.items():
        if all(abs(a - b) <= 1e-12 for a, b in zip(pt, ref)):
            branch = br
            pt = ref
            break
    if branch is None:
        raise ValidationError(
            "bad_point",
            f"point must be one of {list(_STATIONARY_POINTS)}, got {pt!r}")
    value = abs(float(restricted_gap(prior, chi, *pt, branch=branch)))
    grads = []
    for axis in range(3):
        hi = list(pt)
        lo = list(pt)
        hi[axis] += step
        lo[axis] -= step
        grads.append((float(restricted_gap(prior, chi, *hi, branch=branch))
                      - float(restricted_gap(prior, chi, *lo, branch=branch)))
                     / (2.0 * step))
    grad_norm = float(np.linalg.norm(grads))
    return StationarityReport(point=pt, branch=branch, value_abs=value,
                              grad_norm=grad_norm,
                              passed=(value < tol and grad_norm < tol))


@dataclass(frozen=True)
class VertexMinimumReport:
    """Grid scan of the gap surface at a threshold chi."""

    which: str
    chi: float
    grid_n: int
    min_value: float
    argmin: tuple[float, float, float]
    vertex: tuple[float, float, float]
    vertex_value: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed


def vertex_minimum_check(prior: SymPrior, which: str,
                         grid_n: int = 64) -> VertexMinimumReport:
    """Check the gap's grid minimum at a threshold sits at a cube vertex.

    which is "at_chi_th" (lower threshold, low branch) or
    "at_chi_up_th" (upper threshold, up branch).  Passes when the grid
    minimum over [0, pi]^3 is within 1e-9 of the best cube vertex and
    within 1e-6 of zero.
    """
    if grid_n < 32:
        raise ValidationError("bad_config", "grid_n must be >= 32")
    report = thresholds(prior)
    if which == "at_chi_th":
        chi, branch = report.chi_th, "low"
    elif which == "at_chi_up_th":
        chi, branch = report.chi_up_th, "up"
    else:
        raise ValidationError("bad_which",
                              "which must be at_chi_th or at_chi_up_th")
    axis = np.linspace(0.0, PI, grid_n)
    g0, g1, g2 = np.meshgrid(axis, axis, axis, indexing="ij")
    values = restricted_gap(prior, chi, g0, g1, g2, branch=branch)
    flat = int(np.argmin(values))
    argmin = tuple(float(g[np.unravel_index(flat, values.shape)])
                   for g in (g0, g1, g2))
    min_value = float(values.ravel()[flat])
    best_vertex = (0.0, 0.0, 0.0)
    best_vertex_value = math.inf
    for vertex in product((0.0, PI), repeat=3):
        v = float(restricted_gap(prior, chi, *vertex, branch=branch))
        if v < best_vertex_value:
            best_vertex_value = v
            best_vertex = vertex
    passed = (min_value >= best_vertex_value - 1e-9
              and abs(min_value) < 1e-6)
    return VertexMinimumReport(which=which, chi=chi, grid_n=grid_n,
                               min_value=min_value, argmin=argmin,
                               vertex=best_vertex,
                               vertex_value=best_vertex_value, passed=passed)
