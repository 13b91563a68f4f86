import random
from fractions import Fraction

import pytest

from ddr.core import parse_presentation
from ddr.weights import (WeightAssignment, WeightError, search_weights,
                         solve_feasibility, verify_weight_test)
from ddr.whitehead import build_whitehead


def all_half(p):
    g = build_whitehead(p)
    return WeightAssignment({e.id: Fraction(1, 2) for e in g.edges})


class TestVerify:
    def test_fx4_all_half_passes(self, fx4):
        cert = verify_weight_test(fx4, frozenset(), all_half(fx4))
        assert cert.passed
        assert [r.passed for r in cert.reports] == [True] * 4

    def test_fx4_all_zero_fails_cycle_condition(self, fx4):
        g = build_whitehead(fx4)
        zero = WeightAssignment({e.id: Fraction(0) for e in g.edges})
        cert = verify_weight_test(fx4, frozenset(), zero)
        assert not cert.passed
        by_condition = {r.condition: r.passed for r in cert.reports}
        assert by_condition[3] is False
        witness_weight, witness_cycle = cert.reports[2].witness
        assert witness_weight < 2 and witness_cycle

    def test_fx3_all_half_passes_with_vacuous_condition_one(self, fx3):
        cert = verify_weight_test(fx3, {"x1", "x2"}, all_half(fx3))
        assert cert.passed
        g = build_whitehead(fx3)
        s_s_edges = [e for e in g.edges
                     if e.a.gen in {"x1", "x2"} and e.b.gen in {"x1", "x2"}]
        assert s_s_edges == []

    def test_condition_one_and_two_bounds(self):
        p = parse_presentation("gens: a b\nrel: a a b b")
        g = build_whitehead(p)
        w = WeightAssignment({e.id: Fraction(1, 2) for e in g.edges})
        cert = verify_weight_test(p, {"a"}, w)
        by_condition = {r.condition: r for r in cert.reports}
        assert by_condition[1].passed is False  # the a-a corner weighs 1/2 < 1

    def test_not_cyclically_reduced_rejected(self):
        p = parse_presentation("gens: a b\nrel: b a a^-1 b")
        with pytest.raises(WeightError) as exc:
            verify_weight_test(p, frozenset(), WeightAssignment({0: Fraction(1)}))
        assert exc.value.code == "NOT_CYCLICALLY_REDUCED"

    def test_improper_subset_rejected(self, fx4):
        with pytest.raises(WeightError) as exc:
            verify_weight_test(fx4, {"a", "b"}, all_half(fx4))
        assert exc.value.code == "S_NOT_PROPER"

    def test_negative_weight_rejected(self, fx4):
        g = build_whitehead(fx4)
        w = WeightAssignment({e.id: Fraction(-1, 2) for e in g.edges})
        with pytest.raises(WeightError) as exc:
            verify_weight_test(fx4, frozenset(), w)
        assert exc.value.code == "NEGATIVE_WEIGHT"

    def test_missing_domain_rejected(self, fx4):
        with pytest.raises(WeightError) as exc:
            verify_weight_test(fx4, frozenset(), WeightAssignment({0: Fraction(1)}))
        assert exc.value.code == "BAD_DOMAIN"

    def test_no_reduced_cycle_makes_condition_three_vacuous(self):
        # the corner graph of <a,b | a b> has two edges and no reduced cycle
        p = parse_presentation("gens: a b\nrel: a b")
        g = build_whitehead(p)
        zero = WeightAssignment({e.id: Fraction(0) for e in g.edges})
        cert = verify_weight_test(p, frozenset(), zero)
        assert cert.passed
        assert cert.reports[2].witness is None


class TestSearch:
    def test_fx4_feasible_and_verified(self, fx4):
        found = search_weights(fx4, frozenset())
        assert found is not None
        assert verify_weight_test(fx4, frozenset(), found).passed

    def test_fx3_feasible(self, fx3):
        found = search_weights(fx3, {"x1", "x2"})
        assert found is not None
        assert verify_weight_test(fx3, {"x1", "x2"}, found).passed

    def test_torsion_infeasible(self):
        p = parse_presentation("gens: a\nrel: a a")
        assert search_weights(p, frozenset()) is None
        p3 = parse_presentation("gens: a\nrel: a^3")
        assert search_weights(p3, frozenset()) is None

    def test_two_generator_torsion_like(self):
        # the corner graph of a^2 b^2 is a 4-cycle, so the program is
        # feasible (all corners at 1/2 reach the relator cap exactly)
        p = parse_presentation("gens: a b\nrel: a a b b")
        found = search_weights(p, frozenset())
        assert found is not None
        assert verify_weight_test(p, frozenset(), found).passed

    def test_round_trip_on_fixture_matrix(self, fx1, fx2, fx3, fx4):
        cases = [(fx1, frozenset()), (fx1, {"a"}), (fx2, {"a", "b"}),
                 (fx3, {"y1", "y2"}), (fx4, {"a"}), (fx4, {"b"})]
        for p, s in cases:
            found = search_weights(p, s)
            if found is not None:
                assert verify_weight_test(p, s, found).passed

    def test_slack_perturbation_keeps_passing(self, genus2):
        # the length-8 relator capped at 6 leaves slack 2 above the all-1/2
        # corner sum of 4, so pointwise bumps within slack must keep passing
        base = all_half(genus2)
        assert verify_weight_test(genus2, frozenset(), base).passed
        rng = random.Random(13)
        for _ in range(10):
            bumped = dict(base.weights)
            for eid in rng.sample(sorted(bumped), 3):
                bumped[eid] += Fraction(rng.randint(1, 4), 8)
            if sum(bumped.values()) <= 6:
                assert verify_weight_test(genus2, frozenset(),
                                          WeightAssignment(bumped)).passed


class TestSerialization:
    def test_round_trip(self, fx4):
        w = all_half(fx4)
        text = w.serialize()
        assert "w 0 1/2" in text
        again = WeightAssignment.parse(text)
        assert dict(again.weights) == dict(w.weights)

    def test_parse_errors(self):
        with pytest.raises(WeightError):
            WeightAssignment.parse("nope")
        with pytest.raises(WeightError):
            WeightAssignment.parse("w x 1/2")


class TestSimplex:
    def test_simple_feasible(self):
        point = solve_feasibility(2, [({0: Fraction(1)}, ">=", Fraction(1)),
                                      ({0: Fraction(1), 1: Fraction(1)}, "<=", Fraction(3))])
        assert point is not None
        assert point[0] >= 1 and point[0] + point[1] <= 3

    def test_simple_infeasible(self):
        point = solve_feasibility(1, [({0: Fraction(1)}, ">=", Fraction(2)),
                                      ({0: Fraction(1)}, "<=", Fraction(1))])
        assert point is None

    def test_negative_rhs_normalization(self):
        # -x <= -2 means x >= 2
        point = solve_feasibility(1, [({0: Fraction(-1)}, "<=", Fraction(-2))])
        assert point is not None and point[0] >= 2

    def test_exactness(self):
        point = solve_feasibility(1, [({0: Fraction(3)}, ">=", Fraction(1)),
                                      ({0: Fraction(3)}, "<=", Fraction(1))])
        assert point == [Fraction(1, 3)]

    def test_random_lps_against_certificates(self):
        rng = random.Random(21)
        for _ in range(100):
            nvars = rng.randint(1, 4)
            constraints = []
            for _ in range(rng.randint(1, 5)):
                coeffs = {v: Fraction(rng.randint(-3, 3)) for v in range(nvars)
                          if rng.random() < 0.8}
                sense = rng.choice(["<=", ">="])
                rhs = Fraction(rng.randint(-4, 4))
                constraints.append((coeffs, sense, rhs))
            point = solve_feasibility(nvars, constraints)
            if point is None:
                continue
            assert all(x >= 0 for x in point)
            for coeffs, sense, rhs in constraints:
                lhs = sum(c * point[v] for v, c in coeffs.items())
                assert lhs <= rhs if sense == "<=" else lhs >= rhs
