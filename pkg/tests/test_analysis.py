import math
from fractions import Fraction

import pytest

from whacamole import analysis as an


class TestETable:
    def test_small_values(self):
        t = an.e_table(3)
        assert t[1, 1] == 1
        assert t[2, 2] == Fraction(3, 2)
        assert t[2, 1] == 1
        assert t[0, 0] == 0

    def test_bounds_hold(self):
        assert an.check_e_bounds(an.e_table(20))
        assert an.e_bound_violations(an.e_table(20)) == []

    def test_lower_bound_formula(self):
        assert an.e_lower_bound(2, 2) == Fraction(3, 2)

    def test_bad_size(self):
        with pytest.raises(ValueError):
            an.e_table(0)

    def test_greedy_fraction_approaches_limit(self):
        t = an.e_table(50)
        r = 50 / float(t[50, 50])
        assert 1.55 < r < math.e / (math.e - 1)


class TestWords:
    def test_feasibility(self):
        assert an.is_feasible("td", 1)
        assert not an.is_feasible("tt", 1)
        assert an.is_feasible("tdtdd", 3)
        assert an.is_feasible("dttdd", 3)

    def test_td_word_matches_table(self):
        t = an.e_table(6)
        for a in range(1, 7):
            assert an.expected_gain("td" * a, a, a) == t[a, a]

    def test_delete_only_gains_nothing(self):
        for a in range(1, 5):
            assert an.expected_gain("d" * a, a, a) == 0

    def test_td_inversion_pair(self):
        hi, lo = an.expected_gain("tdtdd", 3, 3), an.expected_gain("dttdd", 3, 3)
        assert hi >= lo
        assert an.expected_gain("tdtd", 2, 2) == Fraction(3, 2)

    def test_two_strategies_beat_td_td(self):
        words = [w for w in an.feasible_words(3) if w.count("t") == 2]
        assert words
        assert all(an.expected_gain(w, 3, 3) >= Fraction(3, 2) for w in words)

    def test_infeasible_word_rejected(self):
        with pytest.raises(an.Infeasible):
            an.expected_gain("ttt", 2, 2)

    def test_feasible_words_are_feasible(self):
        ws = list(an.feasible_words(3))
        assert ws and all(an.is_feasible(w, 3) for w in ws)

    def test_lemmas_small(self):
        rep = an.verify_strategy_lemmas(4)
        assert rep.ok and not rep.counterexamples
        assert sum(rep.checked.values()) > 0

    def test_lemma_guard(self):
        with pytest.raises(an.TooLarge):
            an.verify_strategy_lemmas(7)


class TestDominance:
    def test_examples(self):
        assert an.dominates({3, 1}, {2})
        assert not an.dominates({2}, {3})
        assert an.dominates({5, 4}, {4, 3})
        assert not an.dominates({5}, {1, 2})
        assert an.dominates(set(), set())

    def test_three_forms_agree_small(self):
        for x in an.subsets(range(1, 5)):
            for y in an.subsets(range(1, 5)):
                d = an.dominates(x, y)
                assert d == an.dominates_injection(x, y) == an.dominates_counting(x, y)

    def test_sharp(self):
        assert an.sharp(2, [1, 2, 3]) == 2

    def test_report(self):
        rep = an.verify_dominance(range(1, 5))
        assert rep.ok and rep.pairs == 256


class TestLBSequence:
    def test_n3(self):
        s = an.solve_lb_sequence(3)
        assert 1.6328 <= s.R <= 1.6330
        assert s.z[2] == pytest.approx(an.quintic_root(), abs=1e-9)
        assert s.ordered and an.check_lb_inequalities(s)
        assert s.residual < 1e-9

    def test_queue_order(self):
        assert an.solve_lb_sequence(3).queue_order() == [2, 4, 6, 3, 1, 0]

    def test_monotone_in_n(self):
        rs = [an.solve_lb_sequence(n).R for n in range(3, 13)]
        assert rs == sorted(rs) and rs[-1] < 1.6379

    def test_bounds(self):
        with pytest.raises(ValueError):
            an.solve_lb_sequence(1)
        with pytest.raises(an.NoSolution):
            an.solve_lb_sequence(3, lo=1.0, hi=1.1)


class TestRandQueueBound:
    def test_n1_exact(self):
        b = an.randomized_queue_bound(1)
        assert b.R == Fraction(4, 3)
        assert sum(b.v) == 1

    def test_exact_and_float_agree(self):
        e = an.randomized_queue_bound(30, exact=True)
        f = an.randomized_queue_bound(30, exact=False)
        assert float(e.R) == pytest.approx(f.R, rel=1e-12)

    def test_limit(self):
        b = an.randomized_queue_bound(10**6)
        assert abs(b.R - math.e / (math.e - 1)) < 1e-5
        assert abs(math.fsum(b.v) - 1) < 1e-12

    def test_bad_n(self):
        with pytest.raises(ValueError):
            an.randomized_queue_bound(0)
