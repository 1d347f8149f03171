import numpy as np
import pytest

from poai.errors import ValidationError
from poai.metrics import compute_metrics, gini, shannon_entropy_bits, spearman
from poai.pool import NodeClass
from poai.simulate import BlockRecord, Protocol, SimResult


def make_result(elapsed_list, depth=2, producer_ids=None, classes=None, hash_ops=None, failed=None):
    n = len(elapsed_list)
    producer_ids = producer_ids or [1] * n
    classes = classes or [NodeClass.SUPER] * n
    hash_ops = hash_ops or [0] * n
    failed = failed or [0] * n
    ledger = [
        BlockRecord(0, i, producer_ids[i], classes[i], elapsed_list[i], hash_ops[i], failed[i])
        for i in range(n)
    ]
    return SimResult(
        protocol=Protocol.POAI,
        seed=0,
        node_ids=sorted(set(producer_ids)),
        confirmation_depth=depth,
        ledger=ledger,
    )


class TestGini:
    def test_uniform_counts(self):
        assert gini([1, 1, 1, 1]) == pytest.approx(0.0, abs=1e-12)

    def test_single_producer(self):
        # sum |xi - xj| / (2 n^2 mean) = 24 / 32
        assert gini([4, 0, 0, 0]) == pytest.approx(0.75, rel=1e-12)

    def test_matches_pairwise_definition(self, rng):
        x = rng.integers(0, 50, 12).astype(float)
        n, mean = len(x), x.mean()
        brute = sum(abs(a - b) for a in x for b in x) / (2 * n * n * mean)
        assert gini(x) == pytest.approx(brute, rel=1e-10)

    def test_all_zero_counts(self):
        assert gini([0, 0, 0]) == 0.0

    def test_bounds(self, rng):
        for _ in range(50):
            v = gini(rng.integers(0, 100, 10))
            assert 0.0 <= v <= 1.0


class TestEntropy:
    def test_uniform_four(self):
        assert shannon_entropy_bits([1, 1, 1, 1]) == pytest.approx(2.0, rel=1e-12)

    def test_degenerate(self):
        assert shannon_entropy_bits([4, 0, 0, 0]) == 0.0

    def test_scale_invariance(self, rng):
        c = rng.integers(1, 30, 8)
        assert shannon_entropy_bits(c) == pytest.approx(shannon_entropy_bits(7 * c), rel=1e-12)


class TestSpearman:
    def test_perfect_monotone(self):
        x = np.arange(10.0)
        assert spearman(x, np.exp(x)) == pytest.approx(1.0)
        assert spearman(x, -x) == pytest.approx(-1.0)

    def test_matches_scipy_with_ties(self, rng):
        scipy_stats = pytest.importorskip("scipy.stats")
        for _ in range(25):
            x = rng.integers(0, 8, 30).astype(float)  # plenty of ties
            y = rng.uniform(0, 1, 30)
            expected = scipy_stats.spearmanr(x, y).statistic
            assert spearman(x, y) == pytest.approx(expected, rel=1e-10, abs=1e-12)

    def test_constant_input_is_nan(self):
        assert np.isnan(spearman(np.ones(5), np.arange(5.0)))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            spearman(np.ones(3), np.ones(4))


class TestComputeMetrics:
    def test_confirmation_windows(self):
        res = make_result([1.0, 2.0, 3.0, 4.0, 5.0], depth=2)
        m = compute_metrics(res)
        # windows: 2+3, 3+4, 4+5
        assert m.mean_confirmation_time == pytest.approx((5 + 7 + 9) / 3)

    def test_uniform_producers(self):
        res = make_result([1.0] * 8, producer_ids=[1, 2, 3, 4, 1, 2, 3, 4])
        m = compute_metrics(res)
        assert m.gini == pytest.approx(0.0, abs=1e-12)
        assert m.producer_entropy == pytest.approx(2.0)

    def test_random_fraction_counts_random_class(self):
        classes = [NodeClass.SUPER, NodeClass.RANDOM, NodeClass.SUPER, NodeClass.RANDOM]
        res = make_result([1.0] * 4, depth=1, classes=classes)
        assert compute_metrics(res).random_node_block_fraction == 0.5

    def test_failed_fraction_counts_rounds_with_failures(self):
        res = make_result([1.0] * 4, depth=1, failed=[0, 3, 1, 0])
        assert compute_metrics(res).failed_round_fraction == 0.5

    def test_hash_ops_total(self):
        res = make_result([1.0] * 4, depth=1, hash_ops=[5, 0, 7, 1])
        assert compute_metrics(res).total_hash_ops == 13

    def test_zero_count_nodes_lower_gini_inputs(self):
        res = make_result([1.0] * 4, depth=1, producer_ids=[1, 1, 1, 1])
        res.node_ids = [1, 2, 3, 4]  # three silent nodes
        assert compute_metrics(res).gini == pytest.approx(0.75)

    def test_empty_ledger_rejected(self):
        res = make_result([1.0])
        res.ledger = []
        with pytest.raises(ValidationError, match="empty"):
            compute_metrics(res)

    def test_ledger_shorter_than_depth_rejected(self):
        res = make_result([1.0, 1.0], depth=6)
        with pytest.raises(ValidationError, match="depth"):
            compute_metrics(res)
