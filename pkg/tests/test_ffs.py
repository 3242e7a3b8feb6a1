import numpy as np
import pytest

from domgen.ffs import ffs_select, ffs_select_with_state, maxmin_oracle
from domgen.style import StyleVector


def style_1d(x):
    return StyleVector(mu=np.array([float(x)]), sigma=np.array([0.0]))


def random_styles(rng, n, c=3):
    return [
        StyleVector(mu=rng.normal(0, 1, c), sigma=np.abs(rng.normal(0, 1, c)))
        for _ in range(n)
    ]


class TestFfsSelect:
    def test_k1_is_start(self):
        styles = [style_1d(v) for v in (5, 1, 9, 3)]
        assert ffs_select(styles, 1, 3).indices == [3]

    def test_k_equals_n_selects_all(self):
        styles = [style_1d(v) for v in (5, 1, 9, 3)]
        base = ffs_select(styles, 4, 2)
        assert sorted(base.indices) == [0, 1, 2, 3]
        assert base.indices[0] == 2

    def test_farthest_second_pick(self):
        styles = [style_1d(v) for v in (0, 1, 2, 10)]
        assert ffs_select(styles, 2, 0).indices == [0, 3]

    def test_collinear_equally_spaced(self):
        # left endpoint start: right endpoint second, midpoint third
        styles = [style_1d(v) for v in (0, 1, 2)]
        assert ffs_select(styles, 3, 0).indices == [0, 2, 1]

    def test_random_start_is_seeded(self):
        styles = [style_1d(v) for v in (0, 1, 2, 10)]
        a = ffs_select(styles, 2, "random:42")
        b = ffs_select(styles, 2, "random:42")
        assert a.indices == b.indices

    def test_duplicates_deferred(self):
        # duplicates are only selected once all distinct styles are exhausted
        styles = [style_1d(v) for v in (0, 0, 5, 5, 9)]
        base = ffs_select(styles, 3, 0)
        picked_values = [0, 5, 9]
        assert sorted(styles[i].mu[0] for i in base.indices) == picked_values

    def test_duplicate_invariance(self):
        rng = np.random.default_rng(0)
        styles = random_styles(rng, 6)
        base = ffs_select(styles, 3, 0)
        padded = styles + [styles[2], styles[4]]
        base_padded = ffs_select(padded, 3, 0)
        assert base.indices == base_padded.indices

    def test_trace_nonincreasing(self):
        rng = np.random.default_rng(1)
        styles = random_styles(rng, 20)
        _, state = ffs_select_with_state(styles, 10, 0)
        vals = [v for v in state.max_dist_trace if v is not None]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_min_dist_zero_at_selected(self):
        rng = np.random.default_rng(2)
        styles = random_styles(rng, 8)
        base, state = ffs_select_with_state(styles, 4, 1)
        assert np.allclose(state.min_dist[base.indices], 0.0)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        styles = random_styles(rng, 15)
        assert ffs_select(styles, 5, 2).indices == ffs_select(styles, 5, 2).indices

    @pytest.mark.parametrize("k", [0, -1, 7])
    def test_bad_k(self, k):
        styles = [style_1d(v) for v in range(6)]
        with pytest.raises(ValueError):
            ffs_select(styles, k, 0)

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            ffs_select([], 1, 0)

    def test_bad_start(self):
        styles = [style_1d(v) for v in range(4)]
        with pytest.raises(ValueError):
            ffs_select(styles, 2, 9)
        with pytest.raises(ValueError):
            ffs_select(styles, 2, "nonsense")


class TestMaxminOracle:
    def test_rejects_large_corpus(self):
        styles = [style_1d(v) for v in range(13)]
        with pytest.raises(ValueError):
            maxmin_oracle(styles, 2, 0)

    def test_matches_fast_path_exhaustive(self):
        # every k and every start for a handful of corpora
        rng = np.random.default_rng(4)
        for trial in range(20):
            n = int(rng.integers(2, 9))
            styles = random_styles(rng, n, c=int(rng.integers(1, 4)))
            for k in range(1, n + 1):
                for start in range(n):
                    fast = ffs_select(styles, k, start)
                    slow = maxmin_oracle(styles, k, start)
                    assert fast.indices == slow.indices

    def test_matches_fast_path_with_duplicates(self):
        rng = np.random.default_rng(5)
        for trial in range(20):
            styles = random_styles(rng, 5)
            styles = styles + [styles[0], styles[3]]
            for k in (2, 4, 7):
                assert ffs_select(styles, k, 1).indices == maxmin_oracle(styles, k, 1).indices
