import math

import numpy as np
import pytest

from qteam import ValidationError, cac_instance, expected_cost
from qteam.classical import classical_optimum
from qteam.nosignalling import no_signalling_residual
from qteam.quantum import (
    ActionAssignment,
    PureTwoQubitState,
    QubitStrategy,
    all_assignments,
    canonicalize_angles,
    canonicalize_strategy,
    case1_assignments,
    equal_action_probability,
    measurement_basis,
    occupation_from_state,
    occupation_from_table,
    occupation_from_trace,
    parse_strategy,
    schmidt_reduce,
    shared_state,
)

from qteam.verify import random_chi, random_prior, random_strategy

PI = math.pi


def _random_basis(rng, dephase=True):
    theta = rng.random() * 2 * PI
    phi = rng.random() * PI
    plus, minus = measurement_basis(theta, phi)
    if dephase:
        plus = plus * np.exp(1j * rng.random() * 2 * PI)
        minus = minus * np.exp(1j * rng.random() * 2 * PI)
    return plus, minus


class TestAssignments:
    def test_counts(self):
        assert len(set(all_assignments())) == 256
        assert len(case1_assignments()) == 16

    def test_canonical_is_nondegenerate(self):
        v = ActionAssignment.canonical()
        for agent in ("a", "b"):
            for xi in (0, 1):
                assert not v.degenerate(agent, xi)
        assert v in case1_assignments()

    def test_index_round_trip(self):
        for asg in all_assignments()[:16]:
            assert ActionAssignment.from_indices(asg.to_indices()) == asg


class TestMeasurementBasis:
    def test_z_axis(self):
        plus, minus = measurement_basis(0.0, 0.0)
        assert np.allclose(plus, [1, 0])
        assert np.allclose(minus, [0, 1])

    def test_antipodal_axis(self):
        plus, minus = measurement_basis(0.0, PI)
        assert np.allclose(plus, [0, 1])
        assert np.allclose(minus, [-1, 0])

    def test_orthonormal(self, rng):
        for _ in range(200):
            plus, minus = measurement_basis(rng.random() * 2 * PI,
                                            rng.random() * PI)
            assert abs(np.vdot(plus, plus) - 1) < 1e-12
            assert abs(np.vdot(minus, minus) - 1) < 1e-12
            assert abs(np.vdot(plus, minus)) < 1e-12


class TestOccupationRoutes:
    def test_product_state_deterministic(self):
        s = QubitStrategy(alpha=0.0, theta=(0,) * 4, phi=(0,) * 4,
                          assignment=ActionAssignment.canonical())
        q = occupation_from_table(s).table
        assert np.all(q[0, 0] == 1.0)

    def test_maximally_entangled_z(self):
        s = QubitStrategy(alpha=PI / 2, theta=(0,) * 4, phi=(0,) * 4,
                          assignment=ActionAssignment.canonical())
        q = occupation_from_table(s).table
        assert np.allclose(q[0, 0], 0.5)
        assert np.allclose(q[1, 1], 0.5)
        assert np.allclose(q[0, 1], 0.0)

    def test_quarter_probability_example(self):
        s = QubitStrategy(alpha=PI / 2, theta=(0,) * 4,
                          phi=(0.0, 0.0, PI / 2, PI / 2),
                          assignment=ActionAssignment.canonical())
        q = occupation_from_trace(s).table
        assert q[0, 0, 0, 0] == pytest.approx(0.25, abs=1e-12)

    def test_table_matches_trace(self, rng):
        worst = 0.0
        for _ in range(300):
            s = random_strategy(rng)
            diff = np.max(np.abs(occupation_from_table(s).table
                                 - occupation_from_trace(s).table))
            worst = max(worst, float(diff))
        assert worst < 1e-12

    def test_rows_sum_to_one(self, rng):
        for _ in range(50):
            q = occupation_from_trace(random_strategy(rng)).table
            assert np.allclose(q.sum(axis=(0, 1)), 1.0, atol=1e-12)

    def test_product_state_factorizes(self, rng):
        for _ in range(25):
            s = random_strategy(rng)
            s0 = QubitStrategy(alpha=0.0, theta=s.theta, phi=s.phi,
                               assignment=s.assignment)
            q = occupation_from_table(s0).table
            for xa in (0, 1):
                for xb in (0, 1):
                    cell = q[:, :, xa, xb]
                    outer = np.outer(cell.sum(axis=1), cell.sum(axis=0))
                    assert np.allclose(cell, outer, atol=1e-12)

    def test_entries_in_unit_interval(self, rng):
        for _ in range(200):
            q = occupation_from_table(random_strategy(rng)).table
            assert q.min() >= -1e-12 and q.max() <= 1 + 1e-12

    def test_quantum_obeys_no_signalling(self, rng):
        for _ in range(200):
            s = random_strategy(rng)
            assert no_signalling_residual(occupation_from_table(s)) < 1e-12


class TestEqualActionProbability:
    def test_both_degenerate(self):
        same = ActionAssignment(a_plus=(0, 0), a_minus=(0, 0),
                                b_plus=(0, 0), b_minus=(0, 0))
        s = QubitStrategy(alpha=1.0, theta=(0.3,) * 4, phi=(0.8,) * 4,
                          assignment=same)
        assert equal_action_probability(s, 0, 0) == 1.0
        differ = ActionAssignment(a_plus=(0, 0), a_minus=(0, 0),
                                  b_plus=(1, 1), b_minus=(1, 1))
        s2 = QubitStrategy(alpha=1.0, theta=(0.3,) * 4, phi=(0.8,) * 4,
                           assignment=differ)
        assert equal_action_probability(s2, 0, 0) == 0.0

    def test_aligned_interference_sums_to_one(self):
        # maximally entangled, phi = pi/2 both sides, phases cancelling
        s = QubitStrategy(alpha=PI / 2, theta=(0.0, 0.0, 0.0, 0.0),
                          phi=(PI / 2,) * 4,
                          assignment=ActionAssignment.canonical())
        assert equal_action_probability(s, 0, 0) == pytest.approx(1.0, abs=1e-12)

    def test_matches_occupation_sum(self, rng):
        for _ in range(200):
            s = random_strategy(rng)
            q = occupation_from_table(s).table
            for xa in (0, 1):
                for xb in (0, 1):
                    direct = equal_action_probability(s, xa, xb)
                    summed = q[0, 0, xa, xb] + q[1, 1, xa, xb]
                    assert direct == pytest.approx(summed, abs=1e-12)


class TestCanonicalization:
    def test_angles_land_in_range(self, rng):
        for _ in range(300):
            theta = rng.uniform(-4 * PI, 4 * PI)
            phi = rng.uniform(-4 * PI, 4 * PI)
            t0, p0 = canonicalize_angles(theta, phi)
            assert 0 <= t0 < 2 * PI
            assert 0 <= p0 <= PI

    def test_projectors_unchanged(self, rng):
        for _ in range(300):
            theta = rng.uniform(-4 * PI, 4 * PI)
            phi = rng.uniform(-4 * PI, 4 * PI)
            t0, p0 = canonicalize_angles(theta, phi)
            for raw, canon in zip(measurement_basis(theta, phi),
                                  measurement_basis(t0, p0)):
                assert np.allclose(np.outer(raw, raw.conj()),
                                   np.outer(canon, canon.conj()), atol=1e-12)

    def test_occupation_preserved(self, rng):
        for _ in range(50):
            alpha = rng.random() * PI
            theta = rng.uniform(-4 * PI, 4 * PI, size=4)
            phi = rng.uniform(-4 * PI, 4 * PI, size=4)
            asg = all_assignments()[int(rng.integers(256))]
            canon = canonicalize_strategy(alpha, theta, phi, asg)
            a_bases = [measurement_basis(theta[i], phi[i]) for i in (0, 1)]
            b_bases = [measurement_basis(theta[i], phi[i]) for i in (2, 3)]
            raw_occ = occupation_from_state(PureTwoQubitState(shared_state(alpha)),
                                            a_bases, b_bases, asg)
            diff = np.max(np.abs(raw_occ.table - occupation_from_table(canon).table))
            assert diff < 1e-12


class TestLocalStrategiesNeverBeatClassical:
    def test_product_alpha_endpoints(self, rng):
        for _ in range(60):
            inst = cac_instance(random_prior(rng), random_chi(rng))
            _, j_classical = classical_optimum(inst)
            s = random_strategy(rng)
            for alpha in (0.0, PI):
                local = QubitStrategy(alpha=alpha, theta=s.theta, phi=s.phi,
                                      assignment=s.assignment)
                cost = expected_cost(inst, occupation_from_table(local))
                assert cost >= j_classical - 1e-9


class TestSchmidtReduce:
    def test_canonical_input_unchanged(self):
        z_basis = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))
        for alpha in (0.3, 1.0, PI / 2):
            state = PureTwoQubitState(shared_state(alpha))
            reduced = schmidt_reduce(state, [z_basis, z_basis],
                                     [z_basis, z_basis],
                                     ActionAssignment.canonical())
            assert reduced.alpha == pytest.approx(alpha, abs=1e-12)
            assert np.allclose(reduced.phi, 0.0, atol=1e-12)

    def test_product_state_alpha_zero(self):
        z_basis = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))
        state = PureTwoQubitState(np.array([1, 0, 0, 0], dtype=complex))
        reduced = schmidt_reduce(state, [z_basis, z_basis], [z_basis, z_basis],
                                 ActionAssignment.canonical())
        assert reduced.alpha == pytest.approx(0.0, abs=1e-12)

    def test_random_states_and_bases(self, rng):
        worst = 0.0
        for _ in range(40):
            amp = rng.normal(size=4) + 1j * rng.normal(size=4)
            amp /= np.linalg.norm(amp)
            state = PureTwoQubitState(amp)
            a_bases = [_random_basis(rng) for _ in range(2)]
            b_bases = [_random_basis(rng) for _ in range(2)]
            asg = all_assignments()[int(rng.integers(256))]
            direct = occupation_from_state(state, a_bases, b_bases, asg)
            reduced = schmidt_reduce(state, a_bases, b_bases, asg)
            assert 0.0 <= reduced.alpha <= PI / 2 + 1e-12
            diff = np.max(np.abs(direct.table
                                 - occupation_from_trace(reduced).table))
            worst = max(worst, float(diff))
        assert worst < 1e-10

    def test_non_unit_state_rejected(self):
        with pytest.raises(ValidationError) as err:
            PureTwoQubitState(np.array([1.0, 1.0, 0.0, 0.0], dtype=complex))
        assert err.value.code == "non_unit_state"

    def test_bad_basis_rejected(self, rng):
        state = PureTwoQubitState(shared_state(1.0))
        skew = (np.array([1, 0], dtype=complex),
                np.array([0.6, 0.8], dtype=complex))
        with pytest.raises(ValidationError):
            occupation_from_state(state, [skew, skew], [skew, skew],
                                  ActionAssignment.canonical())


class TestStrategySerialization:
    def test_round_trip(self, rng):
        s = random_strategy(rng)
        doc = s.to_dict()
        back = parse_strategy(doc)
        assert back.alpha == s.alpha
        assert back.theta == s.theta
        assert back.assignment == s.assignment

    def test_out_of_range_angle_rejected(self):
        with pytest.raises(ValidationError):
            QubitStrategy(alpha=4.0, theta=(0,) * 4, phi=(0,) * 4,
                          assignment=ActionAssignment.canonical())

    def test_missing_field_rejected(self):
        with pytest.raises(ValidationError):
            parse_strategy({"alpha": 1.0, "theta": [0, 0, 0, 0],
                            "phi": [0, 0, 0, 0]})
