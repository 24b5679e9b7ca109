"""Satisfiability reduction: gadget structure, equilibria, readback."""

from fractions import Fraction

import pytest

from choremarket.errors import (
    BadParams,
    Malformed,
    NonIntegralEarnings,
    NotGadget,
    NotSatisfying,
)
from choremarket.graphs import build_disutility_graph, check_condition1
from choremarket.model import agent_budget, fixed_earnings_instance
from choremarket.sat_reduction import (
    CNFFormula,
    SATGadgetParams,
    assignment_to_equilibrium,
    balancer_earning,
    build_sat_gadget,
    clause_money,
    equilibrium_to_assignment,
    expand_to_equal_earnings,
    gadget_from_json,
    gadget_to_json,
    parse_dimacs,
)
from choremarket.verification import verify_equilibrium

F = Fraction

PHI = CNFFormula(3, [(1, 2, 3), (-1, -2, 3)])


class TestFormula:
    def test_rejects_short_clause(self):
        with pytest.raises(Malformed):
            CNFFormula(2, [(1, 2)])

    def test_rejects_repeated_variable(self):
        with pytest.raises(Malformed):
            CNFFormula(3, [(1, -1, 2)])

    def test_satisfies(self):
        assert PHI.satisfies([True, False, False])
        assert not PHI.satisfies([False, False, False])

    def test_parse_dimacs(self):
        text = "c comment\np cnf 3 2\n1 2 3 0\n-1 -2 3 0\n"
        assert parse_dimacs(text) == PHI


class TestParams:
    def test_defaults_valid(self):
        SATGadgetParams()

    def test_rejects_large_eps_prime(self):
        with pytest.raises(BadParams):
            SATGadgetParams(eps_prime=F(1, 10))

    def test_rejects_tiny_eps_prime(self):
        with pytest.raises(BadParams):
            SATGadgetParams(eps_prime=F(1, 1000))


class TestGadgetStructure:
    def test_counts(self):
        g = build_sat_gadget(PHI)
        n, m = PHI.num_vars, len(PHI.clauses)
        assert g.instance.n == 2 * n + 4 * m == 14
        assert g.instance.m == 2 * n + 3 * m == 12

    def test_balancer_earning_single_clause(self):
        g = build_sat_gadget(CNFFormula(3, [(1, 2, 3)]))
        assert g.instance.earning[g.balancer(0)] == F(7, 60)

    def test_clause_money_identity(self):
        # Four agents' earnings sum to pos*(3e/2) + neg*(2e) - e'.
        params = SATGadgetParams()
        for clause in [(1, 2, 3), (-1, -2, 3), (-1, -2, -3), (1, -2, 3)]:
            pos = sum(1 for lit in clause if lit > 0)
            neg = 3 - pos
            expected = (
                pos * 3 * params.eps / 2 + neg * 2 * params.eps - params.eps_prime
            )
            assert clause_money(clause, params) == expected
            g = build_sat_gadget(CNFFormula(3, [clause]), params)
            total = sum(
                g.instance.earning[g.clause_agent(0, s)] for s in range(4)
            )
            assert total == expected

    def test_gadget_fails_condition1(self):
        g = build_sat_gadget(PHI)
        assert not check_condition1(build_disutility_graph(g.instance)).ok

    def test_json_roundtrip(self):
        g = build_sat_gadget(PHI)
        again = gadget_from_json(gadget_to_json(g))
        assert again.instance == g.instance
        assert again.formula == g.formula

    def test_plain_instance_is_not_a_gadget(self):
        from choremarket.model import instance_to_json

        g = build_sat_gadget(PHI)
        with pytest.raises(NotGadget):
            gadget_from_json(instance_to_json(g.instance))


class TestEquilibria:
    @pytest.mark.parametrize(
        "assignment",
        [
            (True, True, True),
            (True, False, True),
            (False, False, True),
            (False, True, False),
        ],
    )
    def test_satisfying_assignments_give_equilibria(self, assignment):
        g = build_sat_gadget(PHI)
        cand = assignment_to_equilibrium(g, assignment)
        assert verify_equilibrium(g.instance, cand).ok
        assert equilibrium_to_assignment(g, cand) == assignment

    def test_unsatisfying_assignment_rejected(self):
        g = build_sat_gadget(PHI)
        with pytest.raises(NotSatisfying):
            assignment_to_equilibrium(g, (False, False, False))

    def test_all_true_clause_prices(self):
        g = build_sat_gadget(CNFFormula(3, [(1, 2, 3)]))
        cand = assignment_to_equilibrium(g, (True, True, True))
        for slot in range(3):
            assert cand.prices[g.clause_chore(0, slot)] == F(5, 36)

    def test_all_negated_all_false(self):
        g = build_sat_gadget(CNFFormula(3, [(-1, -2, -3)]))
        cand = assignment_to_equilibrium(g, (False, False, False))
        assert verify_equilibrium(g.instance, cand).ok
        assert equilibrium_to_assignment(g, cand) == (False, False, False)


class TestExpansion:
    def test_integer_earnings_expand(self):
        inst = fixed_earnings_instance(10, [[1], [2]], [2, 1])
        expanded, groups = expand_to_equal_earnings(inst)
        assert expanded.n == 3
        assert groups == ((0, 1), (2,))
        assert all(e == 1 for e in expanded.earning)
        assert expanded.disutility[0] == expanded.disutility[1]

    def test_fractional_unit(self):
        inst = fixed_earnings_instance(10, [[1]], [F(3, 2)])
        expanded, _ = expand_to_equal_earnings(inst, unit=F(1, 2))
        assert expanded.n == 3

    def test_non_integral_rejected(self):
        inst = fixed_earnings_instance(10, [[1]], [F(3, 2)])
        with pytest.raises(NonIntegralEarnings):
            expand_to_equal_earnings(inst)

    def test_zero_earning_agents_dropped(self):
        inst = fixed_earnings_instance(10, [[1], [1]], [0, 1])
        expanded, groups = expand_to_equal_earnings(inst)
        assert expanded.n == 1 and groups == ((), (0,))

    def test_expanded_budgets_match(self):
        inst = fixed_earnings_instance(10, [[1, 3], [None, 1]], [2, 1])
        expanded, groups = expand_to_equal_earnings(inst)
        p = (F(1), F(1))
        for i, group in enumerate(groups):
            total = sum(agent_budget(expanded, k, p) for k in group)
            assert total == agent_budget(inst, i, p)
