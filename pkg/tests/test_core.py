import numpy as np
import pytest

from subcoord.core import (
    PartitionMatroid,
    brute_force_opt,
    check_set_function,
    enumerate_selections,
    is_feasible,
    marginal_gain,
    selection_from_pairs,
    selection_to_pairs,
)
from subcoord.synthetic import (
    CardinalitySquared,
    Modular,
    overlap_toy,
    random_modular,
    random_weighted_coverage,
)


class TestPartitionMatroid:
    def test_block_bookkeeping(self):
        m = PartitionMatroid((2, 3, 1))
        assert m.n_agents == 3
        assert m.size == 6
        assert list(m.offsets()) == [0, 2, 5, 6]
        assert m.pair_index(1, 2) == 4
        assert m.selection_count() == 3 * 4 * 2
        assert m.selection_count(include_idle=False) == 6

    def test_rejects_empty_blocks(self):
        with pytest.raises(ValueError):
            PartitionMatroid((2, 0))
        with pytest.raises(ValueError):
            PartitionMatroid(())

    def test_pair_index_bounds(self):
        m = PartitionMatroid((2, 2))
        with pytest.raises(ValueError):
            m.pair_index(2, 0)
        with pytest.raises(ValueError):
            m.pair_index(0, 2)


class TestFeasibility:
    def test_one_pair_per_block(self):
        m = PartitionMatroid((2, 2))
        assert is_feasible([(0, 1), (1, 0)], m)
        assert not is_feasible([(0, 0), (0, 1)], m)
        assert is_feasible([], m)

    def test_out_of_range_raises(self):
        m = PartitionMatroid((2, 2))
        with pytest.raises(ValueError):
            is_feasible([(0, 5)], m)

    def test_selection_round_trip(self):
        m = PartitionMatroid((2, 3))
        sel = selection_from_pairs([(1, 2)], m)
        assert sel == (None, 2)
        assert selection_to_pairs(sel) == ((1, 2),)
        with pytest.raises(ValueError):
            selection_from_pairs([(0, 0), (0, 1)], m)

    def test_downward_closed(self):
        # every subset of a feasible pair set is feasible
        rng = np.random.default_rng(0)
        m = PartitionMatroid((3, 2, 4))
        for _ in range(200):
            pairs = []
            for agent in range(m.n_agents):
                if rng.random() < 0.7:
                    pairs.append((agent, int(rng.integers(m.blocks[agent]))))
            assert is_feasible(pairs, m)
            keep = [p for p in pairs if rng.random() < 0.5]
            assert is_feasible(keep, m)


class TestMarginalGain:
    def test_overlap_toy_values(self):
        fn, m, state = overlap_toy()
        assert marginal_gain(fn, (0, 0), (None, None), state) == pytest.approx(1.0)
        assert marginal_gain(fn, (0, 0), (None, 0), state) == pytest.approx(0.5)

    def test_zero_gain_for_redundant_pair(self):
        fn, m, state = overlap_toy()
        # a pair whose items are already covered adds nothing
        from subcoord.synthetic import WeightedCoverage

        m2 = PartitionMatroid((1, 1))
        dup = WeightedCoverage(m2, {(0, 0): (0,), (1, 0): (0,)})
        w = np.array([1.0])
        assert marginal_gain(dup, (1, 0), (0, None), w) == 0.0

    def test_infeasible_union_raises(self):
        fn, m, state = overlap_toy()
        with pytest.raises(ValueError):
            marginal_gain(fn, (0, 0), (0, None), state)

    def test_chain_rule_identity(self):
        # gain + F(A) = F(A + e) exactly
        rng = np.random.default_rng(1)
        for seed in range(20):
            fn, m, state = random_weighted_coverage(3, 2, np.random.default_rng(seed))
            sel = (None, int(rng.integers(2)), None)
            pair = (0, int(rng.integers(2)))
            union = (pair[1],) + sel[1:]
            assert marginal_gain(fn, pair, sel, state) + fn.evaluate(sel, state) == pytest.approx(
                fn.evaluate(union, state), abs=1e-12
            )


class TestBruteForce:
    def test_overlap_toy(self):
        fn, m, state = overlap_toy()
        sel, val = brute_force_opt(fn, m, state)
        assert sel == (0, 0)
        assert val == pytest.approx(1.5)

    def test_single_agent_max(self):
        m = PartitionMatroid((2,))
        fn = Modular(m)
        sel, val = brute_force_opt(fn, m, np.array([0.2, 0.7]))
        assert val == pytest.approx(0.7)
        assert sel == (1,)

    def test_zero_function(self):
        fn, m, state = overlap_toy()
        _, val = brute_force_opt(fn, m, np.zeros(3))
        assert val == 0.0

    def test_dominates_every_feasible_set(self):
        for seed in range(10):
            fn, m, state = random_weighted_coverage(2, 3, np.random.default_rng(seed))
            _, val = brute_force_opt(fn, m, state)
            for sel in enumerate_selections(m):
                assert val >= fn.evaluate(sel, state) - 1e-12

    def test_lexicographic_tie_break(self):
        # all-equal utilities: the empty selection is lexicographically first
        m = PartitionMatroid((2, 2))

        class Constant:
            def evaluate(self, sel, state):
                return 1.0

            def marginal_bound(self, state):
                return 0.0

        sel, _ = brute_force_opt(Constant(), m, None)
        assert sel == (None, None)

    def test_enumeration_cap(self):
        m = PartitionMatroid((9,) * 8)
        fn = Modular(m)
        with pytest.raises(ValueError):
            brute_force_opt(fn, m, np.ones(m.size), cap=10**4)


class TestPropertyAudit:
    def test_weighted_coverage_passes(self):
        fn, m, state = random_weighted_coverage(2, 2, np.random.default_rng(0))
        report = check_set_function(fn, m, state)
        assert report.ok, report.summary()

    def test_supermodular_flagged(self):
        report = check_set_function(CardinalitySquared(), PartitionMatroid((1, 1, 1)), None)
        assert len(report.submodularity) > 0

    def test_zero_function_passes(self):
        fn, m, _ = overlap_toy()
        report = check_set_function(fn, m, np.zeros(3))
        assert report.ok

    def test_sampled_mode_needs_rng(self):
        fn, m, state = overlap_toy()
        with pytest.raises(ValueError):
            check_set_function(fn, m, state, mode="sampled")
        report = check_set_function(
            fn, m, state, mode="sampled", trials=50, rng=np.random.default_rng(0)
        )
        assert report.ok

    def test_modular_passes(self):
        fn, m, state = random_modular(3, 3, np.random.default_rng(5))
        assert check_set_function(fn, m, state).ok
