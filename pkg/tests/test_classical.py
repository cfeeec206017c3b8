import numpy as np
import pytest

from qteam import SymPrior, cac_instance, expected_cost
from qteam.classical import (
    ALL_DETERMINISTIC_POLICIES,
    DeterministicPolicy,
    classical_optimum,
    deterministic_costs,
    deterministic_occupation,
    sym_classical_optimum,
)

from qteam.verify import random_chi, random_sym_prior


def _policy(bits: str) -> DeterministicPolicy:
    return DeterministicPolicy(*(int(b) for b in bits))


class TestDeterministicPolicies:
    def test_sixteen_distinct(self):
        assert len(set(ALL_DETERMINISTIC_POLICIES)) == 16

    def test_constant_policy_0000(self):
        q = deterministic_occupation(_policy("0000"))
        assert q.table[0, 0].tolist() == [[1.0, 1.0], [1.0, 1.0]]

    def test_constant_policy_0001(self):
        q = deterministic_occupation(_policy("0001"))
        # A plays index 0, B plays index 1, whatever the observations
        assert np.all(q.table[0, 1] == 1.0)
        assert q.table.sum() == 4.0

    def test_mirroring_policy_1100(self):
        q = deterministic_occupation(_policy("1100"))
        for xa in (0, 1):
            for xb in (0, 1):
                assert q.table[xa, xb, xa, xb] == 1.0


class TestClassicalOptimum:
    def test_lambda08_chi1(self, sym08):
        _, cost = classical_optimum(cac_instance(sym08, 1.0))
        assert cost == pytest.approx(-0.8, abs=1e-12)

    def test_lambda08_chi8_mismatch_branch(self, sym08):
        policy, cost = classical_optimum(cac_instance(sym08, 8.0))
        assert cost == pytest.approx(-4.0, abs=1e-12)
        # lexicographic tie-break lands on the first constant-mismatch policy
        assert policy == _policy("0001")

    def test_lambda08_small_chi(self, sym08):
        _, cost = classical_optimum(cac_instance(sym08, 0.05))
        assert cost == pytest.approx(-0.5, abs=1e-12)

    def test_optimum_is_vertex_minimum(self, rng):
        for _ in range(25):
            inst = cac_instance(random_sym_prior(rng), random_chi(rng))
            _, cost = classical_optimum(inst)
            assert cost == deterministic_costs(inst).min()

    def test_tie_break_lexicographic(self):
        # dyadic prior, so the four mirror-family costs tie bit-exactly
        prior = SymPrior(s=0.25, k=0.0625, t=0.09375)
        inst = cac_instance(prior, 2.0)
        policy, cost = classical_optimum(inst)
        costs = deterministic_costs(inst)
        winners = [p for p, c in zip(ALL_DETERMINISTIC_POLICIES, costs)
                   if c == cost]
        assert len(winners) == 4
        assert policy == min(winners)
        assert policy == _policy("0100")


class TestSymClosedForm:
    def test_breakpoint_upper(self, sym08):
        chi = 4.0  # equals (s+t)/(k+t) at lambda = 0.8
        assert sym_classical_optimum(sym08, chi) == pytest.approx(-2.0, abs=1e-12)
        assert (-chi * (sym08.s + sym08.k + 2 * sym08.t)
                == pytest.approx(-(1 + chi) * (sym08.s + sym08.t), abs=1e-12))

    def test_breakpoint_lower(self, sym08):
        chi = 0.25  # equals (k+t)/(s+t)
        assert sym_classical_optimum(sym08, chi) == pytest.approx(-0.5, abs=1e-12)
        assert (-(1 + chi) * (sym08.s + sym08.t)
                == pytest.approx(-(sym08.s + sym08.k + 2 * sym08.t), abs=1e-12))

    def test_middle_branch(self, sym08):
        assert sym_classical_optimum(sym08, 1.0) == pytest.approx(-0.8, abs=1e-12)

    def test_matches_enumeration(self, rng):
        for i in range(300):
            p = random_sym_prior(rng)
            if i % 3 == 0:
                chi = (p.k + p.t) / (p.s + p.t)
            elif i % 3 == 1:
                chi = (p.s + p.t) / (p.k + p.t)
            else:
                chi = random_chi(rng)
            closed = sym_classical_optimum(p, chi)
            _, enumerated = classical_optimum(cac_instance(p, chi))
            assert abs(closed - enumerated) < 1e-12


class TestPolicyCostIdentities:
    """Closed-form costs of all 16 policies on a symmetric prior.

    Derived directly from the policy encoding (i, j) =
    (alpha xi_A xor beta, gamma xi_B xor delta); the groupings follow
    from which observation cells the policy matches on.
    """

    def test_identities(self, rng):
        for _ in range(20):
            p = random_sym_prior(rng)
            chi = random_chi(rng)
            inst = cac_instance(p, chi)
            s, k, t = p.s, p.k, p.t

            def cost(bits: str) -> float:
                return expected_cost(inst, deterministic_occupation(_policy(bits)))

            base = -(k + s + 2 * t)
            assert cost("0000") == pytest.approx(base, abs=1e-12)
            assert cost("0011") == pytest.approx(base, abs=1e-12)
            assert cost("0001") == pytest.approx(chi * base, abs=1e-12)
            assert cost("0010") == pytest.approx(chi * base, abs=1e-12)
            assert cost("1100") == pytest.approx(-k - s - 2 * chi * t, abs=1e-12)
            assert cost("1111") == pytest.approx(-k - s - 2 * chi * t, abs=1e-12)
            assert cost("1101") == pytest.approx(-chi * (k + s) - 2 * t, abs=1e-12)
            assert cost("1110") == pytest.approx(-chi * (k + s) - 2 * t, abs=1e-12)
            for bits in ("0100", "1000", "1011", "0111"):
                assert cost(bits) == pytest.approx(-(1 + chi) * (s + t), abs=1e-12)
            for bits in ("1001", "0110", "1010", "0101"):
                assert cost(bits) == pytest.approx(-(1 + chi) * (k + t), abs=1e-12)
