"""Cross-module verification checks behind the `verify` CLI command.

Every check pits one computation path against an independent one (or
against a proven invariant) on seeded random inputs, and reports its
worst residual.  The "fast" level keeps the whole suite well under a
minute; "full" enlarges the sample counts and grids.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import classical, nosignalling, optimizer, quantum
from .core import SymPrior, cac_instance, half_cac_instance

_SEED = 90210


def random_sym_prior(rng: np.random.Generator) -> SymPrior:
    """Strictly positive random (s, k, t) with s > k, normalised."""
    while True:
        s, k, t = rng.random(3) * 0.9 + 0.05
        if s < k:
            s, k = k, s
        if s == k:
            continue
        scale = 1.0 / (2 * s + 2 * k + 4 * t)
        return SymPrior(s=s * scale, k=k * scale, t=t * scale)


def random_prior(rng: np.random.Generator) -> np.ndarray:
    """Strictly positive random prior table over the 8 nature states."""
    p = rng.random((2, 2, 2)) + 0.05
    return p / p.sum()


def random_strategy(rng: np.random.Generator,
                    assignment: quantum.ActionAssignment | None = None
                    ) -> quantum.QubitStrategy:
    """Uniform random angles and, by default, a uniform random assignment."""
    if assignment is None:
        assignment = quantum.all_assignments()[int(rng.integers(256))]
    return quantum.QubitStrategy(
        alpha=float(rng.random() * math.pi),
        theta=tuple(rng.random(4) * 2.0 * math.pi),
        phi=tuple(rng.random(4) * math.pi),
        assignment=assignment)


def random_chi(rng: np.random.Generator, lo: float = 0.05, hi: float = 20.0) -> float:
    """Log-uniform chi draw."""
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str
    seconds: float


def _result(name: str, passed: bool, residual: float, tol: float,
            detail: str, started: float) -> CheckResult:
    return CheckResult(name=name, passed=passed, residual=residual,
                       tolerance=tol, detail=detail,
                       seconds=time.perf_counter() - started)


def check_table_trace_agreement(samples: int) -> CheckResult:
    """Closed-form probability table against the projector trace route."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 1])
    worst = 0.0
    for _ in range(samples):
        s = random_strategy(rng)
        diff = np.max(np.abs(quantum.occupation_from_table(s).table
                             - quantum.occupation_from_trace(s).table))
        worst = max(worst, float(diff))
    return _result("table_trace_agreement", worst < 1e-12, worst, 1e-12,
                   f"{samples} random strategies", started)


def check_classical_closed_form(samples: int) -> CheckResult:
    """Three-branch classical formula against 16-vertex enumeration."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 2])
    worst = 0.0
    for i in range(samples):
        prior = random_sym_prior(rng)
        if i % 3 == 0:
            chi = (prior.k + prior.t) / (prior.s + prior.t)  # breakpoint
        elif i % 3 == 1:
            chi = (prior.s + prior.t) / (prior.k + prior.t)  # breakpoint
        else:
            chi = random_chi(rng)
        closed = classical.sym_classical_optimum(prior, chi)
        _, enumerated = classical.classical_optimum(cac_instance(prior, chi))
        worst = max(worst, abs(closed - enumerated))
    return _result("classical_closed_form", worst < 1e-12, worst, 1e-12,
                   f"{samples} random (prior, chi) draws incl. breakpoints",
                   started)


def check_two_path_agreement(instances: int,
                             cfg: optimizer.OptimizerConfig | None = None
                             ) -> CheckResult:
    """Restricted symmetric-path optimum against the 256-assignment search."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 3])
    worst = 0.0
    for _ in range(instances):
        prior = random_sym_prior(rng)
        chi = random_chi(rng, 0.08, 12.0)
        _, restricted = optimizer.sym_quantum_optimum(prior, chi, cfg)
        _, full = optimizer.full_quantum_optimum(cac_instance(prior, chi), cfg)
        worst = max(worst, abs(restricted - full))
    return _result("two_path_agreement", worst < 1e-6, worst, 1e-6,
                   f"{instances} random symmetric instances, 256 assignments",
                   started)


def check_threshold_chain(samples: int) -> CheckResult:
    """Reciprocity, ordering chain, and root property of the thresholds."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 4])
    worst = 0.0
    ordered = True
    for _ in range(samples):
        p = random_sym_prior(rng)
        rep = optimizer.thresholds(p)
        worst = max(worst, abs(rep.chi_th * rep.chi_up_th - 1.0),
                    abs(optimizer.f_bar(p, rep.chi_th)),
                    abs(optimizer.f_bar(p, rep.chi_up_th)))
        low_break = (p.k + p.t) / (p.s + p.t)
        high_break = (p.s + p.t) / (p.k + p.t)
        ordered = ordered and (rep.chi_lower_ns < rep.chi_th < low_break
                               <= 1.0 <= high_break < rep.chi_up_th
                               < rep.chi_upper_ns)
    return _result("threshold_chain", worst < 1e-9 and ordered, worst, 1e-9,
                   f"{samples} random priors, ordering "
                   + ("intact" if ordered else "broken"), started)


def check_stationarity(draws_per_point: int) -> CheckResult:
    """Gap value and gradient at the three known stationary points."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 5])
    worst = 0.0
    for _ in range(draws_per_point):
        p = random_sym_prior(rng)
        low_break = (p.k + p.t) / (p.s + p.t)
        high_break = (p.s + p.t) / (p.k + p.t)
        cases = [((math.pi, 0.0, 0.0), rng.uniform(low_break, high_break)),
                 ((0.0, math.pi, math.pi), high_break * (1.0 + rng.random())),
                 ((0.0, 0.0, 0.0), low_break * rng.uniform(0.1, 1.0))]
        for point, chi in cases:
            rep = optimizer.stationarity_check(p, float(chi), point)
            worst = max(worst, rep.value_abs, rep.grad_norm)
    return _result("stationarity", worst < 1e-6, worst, 1e-6,
                   f"3 points x {draws_per_point} random (prior, chi) draws",
                   started)


def check_vertex_minimum(priors: int, grid_n: int) -> CheckResult:
    """Threshold gap surfaces take their grid minimum at the stated vertices."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 6])
    worst = 0.0
    ok = True
    expected = {"at_chi_th": (0.0, 0.0, 0.0),
                "at_chi_up_th": (0.0, math.pi, math.pi)}
    for _ in range(priors):
        p = random_sym_prior(rng)
        for which, vertex in expected.items():
            rep = optimizer.vertex_minimum_check(p, which, grid_n)
            ok = ok and rep.passed and rep.vertex == vertex
            worst = max(worst, abs(rep.min_value))
    return _result("vertex_minimum", ok, worst, 1e-6,
                   f"{priors} random priors, grid {grid_n}^3, both thresholds",
                   started)


def check_ns_exclusion(samples: int) -> CheckResult:
    """No non-local advantage just outside the closed-form chi bounds."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 7])
    worst = 0.0
    ok = True
    for _ in range(samples):
        p = random_prior(rng)
        cac_bounds = nosignalling.ns_bounds_cac(p)
        half_bounds = nosignalling.ns_bounds_half_cac(p)
        for chi in (cac_bounds.hi * 1.01, cac_bounds.lo * 0.99):
            inst = cac_instance(p, chi)
            worst = max(worst, abs(nosignalling.ns_optimum(inst)
                                   - classical.classical_optimum(inst)[1]))
        for chi in (half_bounds.hi * 1.01, half_bounds.lo * 0.99):
            inst = half_cac_instance(p, chi)
            worst = max(worst, abs(nosignalling.ns_optimum(inst)
                                   - classical.classical_optimum(inst)[1]))
        ok = ok and (half_bounds.lo >= cac_bounds.lo - 1e-15)
        ok = ok and (half_bounds.hi == cac_bounds.hi / 2.0)
    return _result("ns_exclusion", ok and worst < 1e-12, worst, 1e-12,
                   f"{samples} random priors, both families", started)


def check_quantum_ns_membership(samples: int) -> CheckResult:
    """Every qubit-strategy occupation measure obeys no-signalling."""
    started = time.perf_counter()
    rng = np.random.default_rng([_SEED, 8])
    worst = 0.0
    for _ in range(samples):
        s = random_strategy(rng)
        worst = max(worst,
                    nosignalling.no_signalling_residual(
                        quantum.occupation_from_table(s)))
    return _result("quantum_ns_membership", worst < 1e-12, worst, 1e-12,
                   f"{samples} random strategies", started)


_LEVELS = {
    "fast": dict(table_trace=200, closed_form=300, two_path=2,
                 threshold=100, stationarity=3, vertex_priors=2,
                 vertex_grid=32, exclusion=40, membership=200),
    "full": dict(table_trace=1000, closed_form=1000, two_path=10,
                 threshold=200, stationarity=20, vertex_priors=5,
                 vertex_grid=64, exclusion=100, membership=1000),
}


def run_checks(level: str = "fast") -> list[CheckResult]:
    """Run the whole suite at the given level.

    A check that raises is reported as a failure rather than aborting
    the remaining checks.
    """
    if level not in _LEVELS:
        raise ValueError(f"level must be one of {sorted(_LEVELS)}")
    n = _LEVELS[level]
    plan = [
        ("table_trace_agreement",
         lambda: check_table_trace_agreement(n["table_trace"])),
        ("classical_closed_form",
         lambda: check_classical_closed_form(n["closed_form"])),
        ("two_path_agreement",
         lambda: check_two_path_agreement(n["two_path"])),
        ("threshold_chain", lambda: check_threshold_chain(n["threshold"])),
        ("stationarity", lambda: check_stationarity(n["stationarity"])),
        ("vertex_minimum",
         lambda: check_vertex_minimum(n["vertex_priors"], n["vertex_grid"])),
        ("ns_exclusion", lambda: check_ns_exclusion(n["exclusion"])),
        ("quantum_ns_membership",
         lambda: check_quantum_ns_membership(n["membership"])),
    ]
    results = []
    for name, runner in plan:
        started = time.perf_counter()
        try:
            results.append(runner())
        except Exception as exc:  # a broken invariant may surface as a raise
            results.append(_result(name, False, math.inf, 0.0,
                                   f"raised {type(exc).__name__}: {exc}",
                                   started))
    return results
