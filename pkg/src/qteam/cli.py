"""Command-line front end.

Commands: evaluate, classical, nosignalling, quantum, thresholds,
sweep, verify.  Exit codes: 0 success, 1 verification failure,
2 parse/validation error, 3 unsupported instance class for the
command, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import verify as verify_mod
from .classical import classical_optimum
from .core import (
    DegeneratePriorError,
    SymPrior,
    TeamInstance,
    UnsupportedClassError,
    ValidationError,
    detect_sym_prior,
    expected_cost,
    load_instance,
)
from .nosignalling import no_signalling_residual, ns_bounds_for_instance, ns_optimum_detail
from .optimizer import (
    OptimizerConfig,
    full_quantum_optimum,
    sym_quantum_optimum,
    thresholds,
)
from .quantum import load_strategy, occupation_from_table

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3
EXIT_IO = 4

# A strategy improves on the classical optimum only if it beats it by
# more than this margin; optimiser noise stays orders of magnitude below.
ADVANTAGE_TOL = 1e-6

CSV_HEADER = ("chi,j_classical,j_ns,j_quantum,gap_quantum,gap_ns,"
              "quantum_advantage,ns_advantage")


def _fmt(x: float) -> str:
    """17-significant-digit decimal form, enough to round-trip a double."""
    return f"{x:.17g}"


@dataclass(frozen=True)
class SweepRow:
    """One chi grid point of a sweep."""

    chi: float
    j_classical: float
    j_ns: float
    j_quantum: float
    gap_quantum: float
    gap_ns: float
    quantum_advantage: bool
    ns_advantage: bool

    def __post_init__(self) -> None:
        if self.gap_quantum > 1e-9 or self.gap_ns > 1e-9:
            raise ValidationError(
                "sweep_row_inconsistent",
                f"gap above classical at chi={self.chi!r}: "
                f"quantum {self.gap_quantum!r}, ns {self.gap_ns!r}")

    def csv_line(self) -> str:
        return ",".join([_fmt(self.chi), _fmt(self.j_classical),
                         _fmt(self.j_ns), _fmt(self.j_quantum),
                         _fmt(self.gap_quantum), _fmt(self.gap_ns),
                         str(self.quantum_advantage).lower(),
                         str(self.ns_advantage).lower()])


def _config_from_args(args: argparse.Namespace) -> OptimizerConfig:
    return OptimizerConfig(grid_points_per_angle=args.grid_points,
                           multistart_count=args.multistarts,
                           refine_tolerance=args.refine_tol,
                           max_refine_iterations=args.max_iters)


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-points", type=int, default=16,
                        help="grid points per angle for the restricted path")
    parser.add_argument("--multistarts", type=int, default=16,
                        help="random starts per assignment for the full path")
    parser.add_argument("--refine-tol", type=float, default=1e-9,
                        help="stop refining when a pass improves less than this")
    parser.add_argument("--max-iters", type=int, default=120,
                        help="maximum refinement passes")


def _require_sym_cac(instance: TeamInstance) -> SymPrior:
    if instance.classification != "cac":
        raise UnsupportedClassError(
            f"instance class {instance.classification!r} is not the cac form; "
            "the nosignalling command reports the general chi bounds")
    sym = detect_sym_prior(instance.prior)
    if sym is None:
        raise UnsupportedClassError(
            "instance prior is not in the symmetric (s, k, t) family; "
            "the nosignalling command reports the general chi bounds")
    return sym


def _quantum_optimum_for(instance: TeamInstance, mode: str | None,
                         cfg: OptimizerConfig):
    """Pick the restricted or full path; 'auto' prefers restricted."""
    sym = (detect_sym_prior(instance.prior)
           if instance.classification == "cac" else None)
    if mode == "restricted" or (mode is None and sym is not None):
        if sym is None:
            raise UnsupportedClassError(
                "restricted mode needs a symmetric-prior cac instance; "
                "use --mode full")
        strategy, cost = sym_quantum_optimum(sym, instance.chi, cfg)
        return strategy, cost, "restricted"
    strategy, cost = full_quantum_optimum(instance, cfg)
    return strategy, cost, "full"


def _cmd_evaluate(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    strategy = load_strategy(args.strategy)
    occ = occupation_from_table(strategy)
    cost = expected_cost(instance, occ)
    residual = no_signalling_residual(occ)
    if args.json:
        print(json.dumps({"cost": cost,
                          "occupation": occ.table.tolist(),
                          "ns_residual": residual}))
        return EXIT_OK
    print(f"cost={_fmt(cost)}")
    print("occupation q(u_A,u_B | xi_A,xi_B), columns (u_A,u_B) = "
          "(0,0) (0,1) (1,0) (1,1):")
    for xa in (0, 1):
        for xb in (0, 1):
            cells = " ".join(f"{occ.table[i, j, xa, xb]:.12f}"
                             for i in (0, 1) for j in (0, 1))
            print(f"  xi=({xa},{xb}): {cells}")
    print(f"ns_residual={_fmt(residual)}")
    return EXIT_OK


def _cmd_classical(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    policy, cost = classical_optimum(instance)
    if args.json:
        print(json.dumps({"cost": cost, "policy_bits": list(policy.bits)}))
        return EXIT_OK
    print(f"classical_optimum={_fmt(cost)}")
    print(f"policy_bits={policy} (alpha,gamma,beta,delta)")
    return EXIT_OK


def _cmd_nosignalling(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    label, cost = ns_optimum_detail(instance)
    bounds = ns_bounds_for_instance(instance)
    if args.json:
        doc = {"cost": cost, "vertex": label,
               "bounds": None if bounds is None else
               {"lo": bounds.lo, "hi": bounds.hi, "family": bounds.family}}
        print(json.dumps(doc))
        return EXIT_OK
    print(f"ns_optimum={_fmt(cost)}")
    print(f"vertex={label}")
    if bounds is None:
        print("bounds=none (general instance; no closed-form chi interval)")
    else:
        print(f"bounds=({_fmt(bounds.lo)}, {_fmt(bounds.hi)}) family={bounds.family}")
    return EXIT_OK


def _cmd_quantum(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    cfg = _config_from_args(args)
    strategy, cost, mode = _quantum_optimum_for(instance, args.mode, cfg)
    _, j_classical = classical_optimum(instance)
    gap = cost - j_classical
    if args.json:
        print(json.dumps({"cost": cost, "mode": mode, "gap": gap,
                          "strategy": strategy.to_dict()}))
        return EXIT_OK
    print(f"quantum_optimum={_fmt(cost)} (mode={mode})")
    print(f"gap_vs_classical={_fmt(gap)} "
          f"advantage={str(gap < -ADVANTAGE_TOL).lower()}")
    print(f"alpha={_fmt(strategy.alpha)}")
    print("theta=" + " ".join(_fmt(v) for v in strategy.theta))
    print("phi=" + " ".join(_fmt(v) for v in strategy.phi))
    print("assignment=" + " ".join(str(v) for v in strategy.assignment.to_indices()))
    return EXIT_OK


def _cmd_thresholds(args: argparse.Namespace) -> int:
    if args.lam is not None:
        prior = SymPrior.from_lambda(args.lam)
    elif args.instance is not None:
        prior = _require_sym_cac(load_instance(args.instance))
    else:
        raise ValidationError("missing_field",
                              "provide an instance file or --lambda")
    report = thresholds(prior)
    if args.json:
        print(json.dumps({"chi_lower_ns": report.chi_lower_ns,
                          "chi_upper_ns": report.chi_upper_ns,
                          "chi_th": report.chi_th,
                          "chi_up_th": report.chi_up_th,
                          "A": report.A}))
        return EXIT_OK
    print(f"chi_lower_ns={report.chi_lower_ns:.6f}")
    print(f"chi_upper_ns={report.chi_upper_ns:.6f}")
    print(f"chi_th={report.chi_th:.6f}")
    print(f"chi_up_th={report.chi_up_th:.6f}")
    print(f"A={report.A:.6f}")
    return EXIT_OK


def sweep_rows(instance: TeamInstance, chis, mode: str | None,
               cfg: OptimizerConfig) -> list[SweepRow]:
    """Evaluate the three optima on each chi grid point, ascending."""
    rows = []
    for chi in sorted(float(c) for c in chis):
        inst = TeamInstance(M=instance.M, N=instance.N, prior=instance.prior,
                            chi=chi,
                            action_order_a=instance.action_order_a,
                            action_order_b=instance.action_order_b)
        _, j_classical = classical_optimum(inst)
        _, j_ns = ns_optimum_detail(inst)
        _, j_quantum, _ = _quantum_optimum_for(inst, mode, cfg)
        gap_q = j_quantum - j_classical
        gap_ns = j_ns - j_classical
        rows.append(SweepRow(chi=chi, j_classical=j_classical, j_ns=j_ns,
                             j_quantum=j_quantum, gap_quantum=gap_q,
                             gap_ns=gap_ns,
                             quantum_advantage=bool(gap_q < -ADVANTAGE_TOL),
                             ns_advantage=bool(gap_ns < -ADVANTAGE_TOL)))
    return rows


def _cmd_sweep(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    if not args.chi_from > 0:
        raise ValidationError("chi_nonpositive", "--chi-from must be > 0")
    if not args.chi_to > 0:
        raise ValidationError("chi_nonpositive", "--chi-to must be > 0")
    if args.steps < 2:
        raise ValidationError("bad_steps", "--steps must be >= 2")
    if args.scale == "log":
        chis = np.geomspace(args.chi_from, args.chi_to, args.steps)
    else:
        chis = np.linspace(args.chi_from, args.chi_to, args.steps)
    rows = sweep_rows(instance, chis, args.mode, _config_from_args(args))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv_line() + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    results = verify_mod.run_checks(args.level)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: residual={r.residual:.3e} "
              f"tol={r.tolerance:.0e} [{r.detail}] ({r.seconds:.2f}s)")
    if failed:
        names = ", ".join(r.name for r in failed)
        print(f"verification failed: {names}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print(f"all {len(results)} checks passed ({args.level} level)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qteam",
        description="Classical, no-signalling, and entangled-qubit optima "
                    "for binary team decision problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="cost and occupation of a strategy file")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("strategy", help="strategy JSON file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("classical", help="optimal deterministic policy")
    p.add_argument("instance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_classical)

    p = sub.add_parser("nosignalling", help="no-signalling optimum and chi bounds")
    p.add_argument("instance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_nosignalling)

    p = sub.add_parser("quantum", help="optimal entangled-qubit strategy")
    p.add_argument("instance")
    p.add_argument("--mode", choices=("restricted", "full"), default=None,
                   help="force a path; default picks restricted when valid")
    _add_optimizer_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_quantum)

    p = sub.add_parser("thresholds",
                       help="advantage thresholds of a symmetric-prior instance")
    p.add_argument("instance", nargs="?", default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="i.i.d. observation accuracy in (1/2, 1)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("sweep", help="chi sweep written as CSV plot data")
    p.add_argument("instance")
    p.add_argument("--chi-from", type=float, required=True)
    p.add_argument("--chi-to", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--scale", choices=("lin", "log"), default="log")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--mode", choices=("restricted", "full"), default=None)
    _add_optimizer_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run the cross-module check suite")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DegeneratePriorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UnsupportedClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
