"""Entangled-qubit strategies and their occupation measures.

A strategy gives each agent one qubit of the shared pure state

    |state(alpha)> = cos(alpha/2) |z+ z+> + sin(alpha/2) |z- z->

and, per observation, a projective measurement direction parametrised by
Bloch angles (theta, phi) through

    |+> = ( cos(phi/2),  e^{i theta} sin(phi/2) )
    |-> = (-sin(phi/2),  e^{i theta} cos(phi/2) )

plus an action assignment mapping measurement outcomes to action
indices.  If an assignment sends both outcomes of some agent/observation
to the same action, that measurement degenerates to the trivial pair
{identity, zero}: the agent does not disturb the state and plays a fixed
action.

Two independent evaluation routes are provided and must agree:

* occupation_from_table: closed forms for the outcome-pair
  probabilities, with the degenerate cases routed through the
  one-sided marginal expressions;
* occupation_from_trace: explicit projectors and squared amplitudes on
  the 4-dimensional composite space.

The closed-form interference term is
beta = (1/4) sin(alpha) cos(theta_a + theta_b) sin(phi_a) sin(phi_b),
bounded by 1/4 in absolute value.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .core import OccupationMeasure, ValidationError

# Scale of the interference term in the closed-form probability table.
BETA_PREFACTOR = 0.25

_ANGLE_ATOL = 1e-9
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ActionAssignment:
    """Outcome-to-action maps u^+/u^- per agent and observation.

    Each field holds the action index played on that outcome for
    observations 0 and 1.  There are 2^8 = 256 distinct assignments.
    """

    a_plus: tuple[int, int]
    a_minus: tuple[int, int]
    b_plus: tuple[int, int]
    b_minus: tuple[int, int]

    def __post_init__(self) -> None:
        for name in ("a_plus", "a_minus", "b_plus", "b_minus"):
            val = tuple(getattr(self, name))
            if len(val) != 2 or any(v not in (0, 1) for v in val):
                raise ValidationError("bad_assignment",
                                      f"{name} must be two action indices in {{0, 1}}")
            object.__setattr__(self, name, val)

    @classmethod
    def canonical(cls) -> "ActionAssignment":
        """The assignment + -> index 0, - -> index 1 everywhere."""
        return cls(a_plus=(0, 0), a_minus=(1, 1), b_plus=(0, 0), b_minus=(1, 1))

    def degenerate(self, agent: str, xi: int) -> bool:
        """True when both outcomes map to the same action."""
        plus, minus = self._pair(agent)
        return plus[xi] == minus[xi]

    def _pair(self, agent: str) -> tuple[tuple[int, int], tuple[int, int]]:
        if agent == "a":
            return self.a_plus, self.a_minus
        if agent == "b":
            return self.b_plus, self.b_minus
        raise ValidationError("bad_agent", f"agent must be 'a' or 'b', got {agent!r}")

    def to_indices(self) -> list[int]:
        """Flatten to [a+0, a-0, a+1, a-1, b+0, b-0, b+1, b-1]."""
        return [self.a_plus[0], self.a_minus[0], self.a_plus[1], self.a_minus[1],
                self.b_plus[0], self.b_minus[0], self.b_plus[1], self.b_minus[1]]

    @classmethod
    def from_indices(cls, seq: Sequence[int]) -> "ActionAssignment":
        vals = list(seq)
        if len(vals) != 8:
            raise ValidationError("bad_assignment", "assignment needs 8 action indices")
        return cls(a_plus=(vals[0], vals[2]), a_minus=(vals[1], vals[3]),
                   b_plus=(vals[4], vals[6]), b_minus=(vals[5], vals[7]))


def all_assignments() -> tuple[ActionAssignment, ...]:
    """All 256 assignments, ordered lexicographically in flattened form."""
    return tuple(ActionAssignment.from_indices(bits)
                 for bits in product((0, 1), repeat=8))


def case1_assignments() -> tuple[ActionAssignment, ...]:
    """The 16 assignments with no degenerate agent/observation pair."""
    out = []
    for a0, a1, b0, b1 in product((0, 1), repeat=4):
        out.append(ActionAssignment(a_plus=(a0, a1), a_minus=(1 - a0, 1 - a1),
                                    b_plus=(b0, b1), b_minus=(1 - b0, 1 - b1)))
    return tuple(out)


def canonicalize_angles(theta: float, phi: float) -> tuple[float, float]:
    """Wrap arbitrary real (theta, phi) into [0, 2pi) x [0, pi].

    The returned pair describes the same measurement axis, hence the
    same projector pair, as the input.
    """
    phi0 = phi % TWO_PI
    if phi0 > math.pi:
        phi0 = TWO_PI - phi0
        theta = theta + math.pi
    return theta % TWO_PI, phi0


def measurement_basis(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal measurement pair (|+>, |->) for one Bloch direction."""
    half = 0.5 * phi
    phase = cmath.exp(1j * theta)
    plus = np.array([math.cos(half), phase * math.sin(half)], dtype=complex)
    minus = np.array([-math.sin(half), phase * math.cos(half)], dtype=complex)
    return plus, minus


def shared_state(alpha: float) -> np.ndarray:
    """Amplitudes of the canonical entangled pair in the z product basis.

    Basis order: |z+ z+>, |z+ z->, |z- z+>, |z- z->.
    """
    return np.array([math.cos(0.5 * alpha), 0.0, 0.0, math.sin(0.5 * alpha)],
                    dtype=complex)


@dataclass(frozen=True, eq=False)
class PureTwoQubitState:
    """Unit vector (c1, c2, c3, c4) in the z product basis."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (4,):
            raise ValidationError("non_unit_state", "state needs 4 amplitudes")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError("non_unit_state", f"norm {norm!r} != 1")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


@dataclass(frozen=True, eq=False)
class QubitStrategy:
    """(alpha, theta angles, phi angles, assignment) of one strategy.

    theta and phi are ordered (a(0), a(1), b(0), b(1)); alpha and phi
    live in [0, pi], theta in [0, 2pi].  Angles outside those ranges can
    always be brought back by canonicalize_angles without changing the
    occupation measure.
    """

    alpha: float
    theta: tuple[float, float, float, float]
    phi: tuple[float, float, float, float]
    assignment: ActionAssignment

    def __post_init__(self) -> None:
        if not (-_ANGLE_ATOL <= self.alpha <= math.pi + _ANGLE_ATOL):
            raise ValidationError("angle_out_of_range",
                                  f"alpha={self.alpha!r} outside [0, pi]")
        theta = tuple(float(v) for v in self.theta)
        phi = tuple(float(v) for v in self.phi)
        if len(theta) != 4 or len(phi) != 4:
            raise ValidationError("angle_out_of_range",
                                  "theta and phi each need 4 entries")
        for v in theta:
            if not (-_ANGLE_ATOL <= v <= TWO_PI + _ANGLE_ATOL):
                raise ValidationError("angle_out_of_range",
                                      f"theta entry {v!r} outside [0, 2pi]")
        for v in phi:
            if not (-_ANGLE_ATOL <= v <= math.pi + _ANGLE_ATOL):
                raise ValidationError("angle_out_of_range",
                                      f"phi entry {v!r} outside [0, pi]")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        if not isinstance(self.assignment, ActionAssignment):
            raise ValidationError("bad_assignment",
                                  "assignment must be an ActionAssignment")

    def angles(self, agent: str, xi: int) -> tuple[float, float]:
        """(theta, phi) for one agent and observation."""
        off = 0 if agent == "a" else 2
        return self.theta[off + xi], self.phi[off + xi]

    def to_dict(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "theta": list(self.theta),
                "phi": list(self.phi),
                "assignment": self.assignment.to_indices()}


def canonicalize_strategy(alpha: float, theta: Iterable[float],
                          phi: Iterable[float],
                          assignment: ActionAssignment) -> QubitStrategy:
    """Build a strategy from arbitrary real theta/phi angles."""
    pairs = [canonicalize_angles(t, p) for t, p in zip(theta, phi, strict=True)]
    return QubitStrategy(alpha=alpha,
                         theta=tuple(t for t, _ in pairs),
                         phi=tuple(p for _, p in pairs),
                         assignment=assignment)


def parse_strategy(doc: Mapping[str, Any]) -> QubitStrategy:
    """Build a validated QubitStrategy from a parsed JSON document.

    Schema: {"alpha": real, "theta": [4 reals], "phi": [4 reals],
    "assignment": [8 action indices]} with the assignment flattened as
    ActionAssignment.to_indices.
    """
    if not isinstance(doc, Mapping):
        raise ValidationError("bad_document", "strategy document must be an object")
    for key in ("alpha", "theta", "phi", "assignment"):
        if key not in doc:
            raise ValidationError("missing_field", f"strategy lacks field {key!r}")
    theta = doc["theta"]
    phi = doc["phi"]
    if not isinstance(theta, (list, tuple)) or len(theta) != 4:
        raise ValidationError("angle_out_of_range", "theta must hold 4 reals")
    if not isinstance(phi, (list, tuple)) or len(phi) != 4:
        raise ValidationError("angle_out_of_range", "phi must hold 4 reals")
    return QubitStrategy(alpha=float(doc["alpha"]),
                         theta=tuple(float(v) for v in theta),
                         phi=tuple(float(v) for v in phi),
                         assignment=ActionAssignment.from_indices(doc["assignment"]))


def load_strategy(path: str | Path) -> QubitStrategy:
    """Read and validate a strategy JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_strategy(doc)


def _outcome_pair_probs(alpha: float, theta_a: float, theta_b: float,
                        phi_a: float, phi_b: float
                        ) -> tuple[float, float, float, float]:
    """Closed-form probabilities of the four outcome pairs (++, +-, -+, --)."""
    ca = math.cos(0.5 * alpha) ** 2
    sa = 1.0 - ca
    cpa = math.cos(0.5 * phi_a) ** 2
    spa = 1.0 - cpa
    cpb = math.cos(0.5 * phi_b) ** 2
    spb = 1.0 - cpb
    beta = (BETA_PREFACTOR * math.sin(alpha) * math.cos(theta_a + theta_b)
            * math.sin(phi_a) * math.sin(phi_b))
    return (ca * cpa * cpb + sa * spa * spb + beta,
            ca * cpa * spb + sa * spa * cpb - beta,
            ca * spa * cpb + sa * cpa * spb - beta,
            ca * spa * spb + sa * cpa * cpb + beta)


def _lone_outcome_probs(alpha: float, phi: float) -> tuple[float, float]:
    """Outcome probabilities for one agent when the other does not measure."""
    ca = math.cos(0.5 * alpha) ** 2
    sa = 1.0 - ca
    cp = math.cos(0.5 * phi) ** 2
    sp = 1.0 - cp
    return ca * cp + sa * sp, ca * sp + sa * cp


def occupation_from_table(strategy: QubitStrategy) -> OccupationMeasure:
    """Occupation measure from the closed-form probability table.

    Degenerate agent/observation pairs (u+ = u-) are routed through the
    fixed-action marginal expressions instead of the two-sided table.
    """
    asg = strategy.assignment
    q = np.zeros((2, 2, 2, 2))
    for xa in (0, 1):
        th_a, ph_a = strategy.angles("a", xa)
        deg_a = asg.degenerate("a", xa)
        for xb in (0, 1):
            th_b, ph_b = strategy.angles("b", xb)
            deg_b = asg.degenerate("b", xb)
            if deg_a and deg_b:
                q[asg.a_plus[xa], asg.b_plus[xb], xa, xb] = 1.0
            elif deg_a:
                p_plus, p_minus = _lone_outcome_probs(strategy.alpha, ph_b)
                q[asg.a_plus[xa], asg.b_plus[xb], xa, xb] = p_plus
                q[asg.a_plus[xa], asg.b_minus[xb], xa, xb] = p_minus
            elif deg_b:
                p_plus, p_minus = _lone_outcome_probs(strategy.alpha, ph_a)
                q[asg.a_plus[xa], asg.b_plus[xb], xa, xb] = p_plus
                q[asg.a_minus[xa], asg.b_plus[xb], xa, xb] = p_minus
            else:
                pp, pm, mp, mm = _outcome_pair_probs(strategy.alpha, th_a, th_b,
                                                     ph_a, ph_b)
                q[asg.a_plus[xa], asg.b_plus[xb], xa, xb] = pp
                q[asg.a_plus[xa], asg.b_minus[xb], xa, xb] = pm
                q[asg.a_minus[xa], asg.b_plus[xb], xa, xb] = mp
                q[asg.a_minus[xa], asg.b_minus[xb], xa, xb] = mm
    return OccupationMeasure(q)


def equal_action_probability(strategy: QubitStrategy, xi_a: int, xi_b: int) -> float:
    """Q(u_A = u_B | xi_a, xi_b) by the applicable closed-form case.

    The five cases split on which agents' measurements are degenerate
    and on whether the + outcomes of the two agents share an action.
    """
    asg = strategy.assignment
    deg_a = asg.degenerate("a", xi_a)
    deg_b = asg.degenerate("b", xi_b)
    th_a, ph_a = strategy.angles("a", xi_a)
    th_b, ph_b = strategy.angles("b", xi_b)
    if deg_a and deg_b:
        return 1.0 if asg.a_plus[xi_a] == asg.b_plus[xi_b] else 0.0
    if deg_a or deg_b:
        phi_active = ph_b if deg_a else ph_a
        fixed = asg.a_plus[xi_a] if deg_a else asg.b_plus[xi_b]
        active_plus = asg.b_plus[xi_b] if deg_a else asg.a_plus[xi_a]
        p_plus, p_minus = _lone_outcome_probs(strategy.alpha, phi_active)
        return p_plus if fixed == active_plus else p_minus
    cpa = math.cos(0.5 * ph_a) ** 2
    spa = 1.0 - cpa
    cpb = math.cos(0.5 * ph_b) ** 2
    spb = 1.0 - cpb
    beta = (BETA_PREFACTOR * math.sin(strategy.alpha) * math.cos(th_a + th_b)
            * math.sin(ph_a) * math.sin(ph_b))
    if asg.a_plus[xi_a] == asg.b_plus[xi_b]:
        return cpa * cpb + spa * spb + 2.0 * beta
    return cpa * spb + spa * cpb - 2.0 * beta


def _projector_family(basis: tuple[np.ndarray, np.ndarray],
                      plus_action: int, minus_action: int
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Projectors (P[action 0], P[action 1]) for one agent/observation."""
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    if plus_action == minus_action:
        return (eye, zero) if plus_action == 0 else (zero, eye)
    plus, minus = basis
    p_plus = np.outer(plus, plus.conj())
    p_minus = np.outer(minus, minus.conj())
    return ((p_plus, p_minus) if plus_action == 0 else (p_minus, p_plus))


def _occupation_by_trace(state_vec: np.ndarray,
                         proj_a: Sequence[tuple[np.ndarray, np.ndarray]],
                         proj_b: Sequence[tuple[np.ndarray, np.ndarray]]
                         ) -> OccupationMeasure:
    q = np.zeros((2, 2, 2, 2))
    for xa in (0, 1):
        for xb in (0, 1):
            for i in (0, 1):
                for j in (0, 1):
                    op = np.kron(proj_a[xa][i], proj_b[xb][j])
                    q[i, j, xa, xb] = float(np.real(
                        state_vec.conj() @ op @ state_vec))
    return OccupationMeasure(q)


def occupation_from_trace(strategy: QubitStrategy) -> OccupationMeasure:
    """Occupation measure via explicit projectors on the composite space.

    Independent of the closed-form table; the two routes agreeing
    entrywise is the correctness oracle for both.
    """
    asg = strategy.assignment
    proj_a = []
    proj_b = []
    for xi in (0, 1):
        proj_a.append(_projector_family(measurement_basis(*strategy.angles("a", xi)),
                                        asg.a_plus[xi], asg.a_minus[xi]))
        proj_b.append(_projector_family(measurement_basis(*strategy.angles("b", xi)),
                                        asg.b_plus[xi], asg.b_minus[xi]))
    return _occupation_by_trace(shared_state(strategy.alpha), proj_a, proj_b)


BasisPair = tuple[np.ndarray, np.ndarray]


def _check_basis(basis: BasisPair) -> BasisPair:
    plus = np.asarray(basis[0], dtype=complex).reshape(2)
    minus = np.asarray(basis[1], dtype=complex).reshape(2)
    gram = np.array([[plus.conj() @ plus, plus.conj() @ minus],
                     [minus.conj() @ plus, minus.conj() @ minus]])
    if np.max(np.abs(gram - np.eye(2))) > 1e-10:
        raise ValidationError("bad_basis", "measurement pair is not orthonormal")
    return plus, minus


def occupation_from_state(state: PureTwoQubitState,
                          a_bases: Sequence[BasisPair],
                          b_bases: Sequence[BasisPair],
                          assignment: ActionAssignment) -> OccupationMeasure:
    """Occupation measure of an arbitrary pure state with explicit bases."""
    proj_a = [_projector_family(_check_basis(a_bases[xi]),
                                assignment.a_plus[xi], assignment.a_minus[xi])
              for xi in (0, 1)]
    proj_b = [_projector_family(_check_basis(b_bases[xi]),
                                assignment.b_plus[xi], assignment.b_minus[xi])
              for xi in (0, 1)]
    return _occupation_by_trace(np.asarray(state.amplitudes, dtype=complex),
                                proj_a, proj_b)


def _extract_angles(vec: np.ndarray) -> tuple[float, float]:
    """Bloch angles (theta, phi) whose + vector spans the same ray as vec."""
    a0 = abs(vec[0])
    a1 = abs(vec[1])
    phi = 2.0 * math.atan2(a1, a0)
    if a0 < 1e-15 or a1 < 1e-15:
        return 0.0, phi
    theta = (cmath.phase(vec[1]) - cmath.phase(vec[0])) % TWO_PI
    return theta, phi


def schmidt_reduce(state: PureTwoQubitState,
                   a_bases: Sequence[BasisPair],
                   b_bases: Sequence[BasisPair],
                   assignment: ActionAssignment) -> QubitStrategy:
    """Rotate an arbitrary pure-state strategy into canonical-state form.

    The state is Schmidt-decomposed with coefficients ordered
    descending, fixing alpha = 2 arccos(largest coefficient) in
    [0, pi/2]; each local projector is conjugated by the corresponding
    Schmidt-basis rotation and its angles re-extracted.  The returned
    strategy induces the same occupation measure as the input.
    """
    amp = np.asarray(state.amplitudes, dtype=complex).reshape(2, 2)
    u_a, singulars, vh = np.linalg.svd(amp)
    coeff = min(1.0, max(0.0, float(singulars[0])))
    alpha = 2.0 * math.acos(coeff)
    u_b = vh.T  # columns are the B-side Schmidt vectors

    theta: list[float] = []
    phi: list[float] = []
    for agent, rot, bases in (("a", u_a, a_bases), ("b", u_b, b_bases)):
        for xi in (0, 1):
            if assignment.degenerate(agent, xi):
                theta.append(0.0)
                phi.append(0.0)
                continue
            plus, _ = _check_basis(bases[xi])
            rotated = rot.conj().T @ plus
            th, ph = _extract_angles(rotated)
            theta.append(th)
            phi.append(ph)
    return QubitStrategy(alpha=alpha, theta=tuple(theta), phi=tuple(phi),
                         assignment=assignment)
