import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggglm.aggregation import AggregateSummary, Block
from aggglm.glm import FAMILIES, GlmFamily, bregman_divergence
from aggglm.imputation import impute_sorted, impute_targets, sorted_view
from oracles import brute_force_impute, cvxpy_oracle, grid_oracle, random_instance, random_valid


class TestSortedView:
    def test_direct(self):
        v = sorted_view([3, 1, 2])
        np.testing.assert_array_equal(v.order, [1, 2, 0])
        np.testing.assert_array_equal(v.sorted_values, [1, 2, 3])

    def test_stable_ties(self):
        np.testing.assert_array_equal(sorted_view([1, 1]).order, [0, 1])

    def test_singleton(self):
        v = sorted_view([5])
        np.testing.assert_array_equal(v.order, [0])
        np.testing.assert_array_equal(v.sorted_values, [5])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40))
    def test_roundtrip(self, values):
        v = sorted_view(values)
        assert np.all(np.diff(v.sorted_values) >= 0)
        np.testing.assert_array_equal(v.values(), np.asarray(values, dtype=float))
        assert sorted(v.order.tolist()) == list(range(len(values)))


class TestImputeSorted:
    # expected values below were confirmed with the grid oracle in
    # test_examples_match_grid_oracle
    EXAMPLES = [
        ([1, 2, 3, 4, 5], [(3, 2.5)], [1, 2, 2.5, 4, 5]),
        ([1, 2, 3], [(2, 2)], [1, 2, 3]),
        ([1, 2, 3, 4, 5, 6], [(2, 2.5), (5, 4.5)], [1, 2.5, 3, 4, 4.5, 6]),
        ([5, 6, 7], [(3, 4)], [4, 4, 4]),
    ]

    @pytest.mark.parametrize("gamma,cons,expected", EXAMPLES)
    def test_examples(self, gamma, cons, expected):
        np.testing.assert_array_equal(impute_sorted(gamma, cons), expected)

    @pytest.mark.parametrize("gamma,cons,expected", EXAMPLES)
    @pytest.mark.parametrize("kind", ["gaussian", "poisson"])
    def test_examples_match_grid_oracle(self, gamma, cons, expected, kind):
        ranks = [c[0] for c in cons]
        values = [c[1] for c in cons]
        z, _ = grid_oracle(kind, gamma, ranks, values, step=0.01)
        np.testing.assert_allclose(z, expected, atol=1e-6)

    def test_ranks_and_values_form(self):
        np.testing.assert_array_equal(impute_sorted([1, 2, 3, 4, 5], [3], [2.5]), [1, 2, 2.5, 4, 5])

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_matches_conic_solver(self, kind):
        rng = np.random.default_rng(11)
        fam = GlmFamily(kind)
        for _ in range(15):
            g, r, v = random_instance(rng, kind)
            ours = impute_sorted(g, r, v)
            _, ref = cvxpy_oracle(kind, g, r, v)
            assert float(np.sum(fam.divergence(ours, g))) <= ref + 1e-5

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_sorted_and_exact(self, seed):
        rng = np.random.default_rng(seed)
        g, r, v = random_instance(rng, "gaussian", max_size=20, max_constraints=6)
        out = impute_sorted(g, r, v)
        assert np.all(np.diff(out) >= 0)
        assert np.array_equal(out[r - 1], v)
        # every entry is either copied from gamma or from a constraint value
        assert np.all(np.isin(out, np.concatenate([g, v])))


def single(rows, cons):
    return AggregateSummary([Block(rows, cons)])


class TestImputeTargets:
    def test_scatter_example(self):
        out = impute_targets([3, 1, 2], single([0, 1, 2], [(2, 1.5)]))
        np.testing.assert_array_equal(out, [3, 1, 1.5])

    def test_scatter_example_brute_force(self):
        grid = np.round(np.arange(0, 4.01, 0.1), 10)
        best, _ = brute_force_impute("gaussian", [3, 1, 2], [([0, 1, 2], [(2, 1.5)])], grid)
        np.testing.assert_allclose(best, [3, 1, 1.5])

    def test_full_constraints_identity(self):
        summary = single(range(4), [(1, 1), (2, 2), (3, 3), (4, 4)])
        np.testing.assert_array_equal(impute_targets([1, 2, 3, 4], summary), [1, 2, 3, 4])

    def test_two_blocks(self):
        summary = AggregateSummary([Block([0, 1], [(2, 5)]), Block([2, 3], [(2, 5)])])
        out = impute_targets([2, 1, 1, 2], summary)
        np.testing.assert_array_equal(out, [5, 1, 1, 5])
        grid = np.arange(0, 6.0, 1.0)
        best, _ = brute_force_impute("gaussian", [2, 1, 1, 2], [([0, 1], [(2, 5)]), ([2, 3], [(2, 5)])], grid)
        np.testing.assert_array_equal(best, out)

    def test_uncovered_rows_pass_through(self):
        out = impute_targets([9.0, 1.0, 2.0, 7.0], single([1, 2], [(1, 1.5)]))
        np.testing.assert_array_equal(out, [9.0, 1.5, 2.0, 7.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            impute_targets([1.0, 2.0], single([0, 1, 2], [(1, 0.0)]))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_properties(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 40))
        gamma = rng.normal(0, 2, n)
        # ties in gamma exercise the stable tie-break
        gamma[rng.integers(0, n)] = gamma[0]
        rows = rng.permutation(n)
        cut = int(rng.integers(1, n))
        blocks = []
        for part in (rows[:cut], rows[cut:]):
            h = int(rng.integers(1, part.size + 1))
            ranks = np.sort(rng.choice(np.arange(1, part.size + 1), h, replace=False))
            values = np.sort(rng.normal(0, 2, h))
            blocks.append(Block(part, list(zip(ranks, values))))
        summary = AggregateSummary(blocks)
        out = impute_targets(gamma, summary)
        for b in blocks:
            r = np.asarray(b.rows)
            np.testing.assert_array_equal(np.sort(out[r])[b.ranks - 1], b.values)
            order = np.argsort(gamma[r], kind="stable")
            assert np.all(np.diff(out[r][order]) >= 0)
        assert np.all((out == gamma) | np.isin(out, np.concatenate([b.values for b in blocks])))
        np.testing.assert_array_equal(impute_targets(out, summary), out)


@pytest.mark.parametrize("kind", FAMILIES)
def test_pairwise_swap(kind):
    rng = np.random.default_rng(21)
    fam = GlmFamily(kind)
    for _ in range(2000):
        x = np.sort(random_valid(rng, kind, 2))[::-1]
        y = np.sort(random_valid(rng, kind, 2))[::-1]
        assert fam.divergence(x, y).sum() <= fam.divergence(x, y[::-1]).sum() + 1e-12
        assert fam.divergence(y, x).sum() <= fam.divergence(y[::-1], x).sum() + 1e-12


@pytest.mark.parametrize("kind", FAMILIES)
def test_isotonic_permutation_is_optimal(kind):
    rng = np.random.default_rng(22)
    for _ in range(20):
        gamma = random_valid(rng, kind, 15)
        y = np.sort(random_valid(rng, kind, 15))
        iso = sorted_view(gamma).scatter(y)
        best = bregman_divergence(kind, iso, gamma)
        for _ in range(30):
            assert best <= bregman_divergence(kind, y[rng.permutation(15)], gamma) + 1e-12
