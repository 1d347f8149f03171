import numpy as np
import pytest

from poai.errors import ValidationError
from poai.features import NodeFeatures
from poai.metrics import compute_metrics
from poai.pool import NodeClass, SelectionConfig
from poai.simulate import (
    LEDGER_HEADER,
    Protocol,
    SimConfig,
    dpos_delegate_count,
    generate_network,
    ledger_csv,
    next_producer,
    rotation_order,
    run_baseline,
    run_protocol,
    run_simulation,
    score_nodes,
)


def make_node(node_id, cpr=0.5, payoff=100.0, latency=0.1, attacked=0.0, discarded=0.0):
    return NodeFeatures(
        node_id=node_id,
        computing_power_ratio=cpr,
        online_time=1000.0,
        payoff=payoff,
        hop=10.0,
        connection_number=50.0,
        latency=latency,
        discarded_probability=discarded,
        attacked_probability=attacked,
        attract_probability=0.0,
    )


def safe_nodes(n, seed=0):
    """Heterogeneous nodes with zero failure probabilities."""
    rng = np.random.default_rng(seed)
    return [
        make_node(i + 1, cpr=float(rng.uniform(0.01, 1)), payoff=float(rng.uniform(1, 1e4)),
                  latency=float(rng.uniform(0, 0.5)))
        for i in range(n)
    ]


def poai_cfg(n, epochs=3, rounds=12, whole_max=6, seed=0, protocol=Protocol.POAI):
    return SimConfig(
        num_nodes=n,
        epochs=epochs,
        rounds_per_epoch=rounds,
        protocol=protocol,
        selection=SelectionConfig(whole_max=whole_max),
        seed=seed,
    )


class TestRotation:
    def test_next_producer_round_robin(self):
        from poai.pool import InjectedDraws, rank_nodes, select_pool

        ranked = rank_nodes([(1, 125.0), (2, 65.2), (3, 50.0), (4, 7.5), (5, 3.0)])
        pool = select_pool(ranked, SelectionConfig(whole_max=5), injected=InjectedDraws(3, 2, (4,)))
        order = [next_producer(pool, r) for r in range(5)]
        assert order == [1, 2, 4, 1, 2]
        assert next_producer(pool, pool.pool_size) == next_producer(pool, 0)

    def test_rotation_order_supers_then_sorted_randoms(self):
        from poai.pool import NodePool

        pool = NodePool(super_ids=(9, 2), random_ids=(3, 7), pool_size=4, sup_num=2,
                        rad_num=2, threshold=1.0)
        assert rotation_order(pool) == [9, 2, 3, 7]

    def test_pool_of_one_always_produces_same_node(self):
        from poai.pool import NodePool

        pool = NodePool(super_ids=(4,), random_ids=(), pool_size=1, sup_num=1,
                        rad_num=0, threshold=2.0)
        assert [next_producer(pool, r) for r in range(6)] == [4] * 6


class TestRunSimulation:
    def test_no_failures_equals_pure_rotation(self):
        nodes = safe_nodes(8)
        cfg = poai_cfg(8)
        res = run_simulation(cfg, nodes)
        met = compute_metrics(res)
        assert met.failed_round_fraction == 0.0
        for epoch in range(cfg.epochs):
            pool = res.pools[epoch]
            order = rotation_order(pool)
            producers = [rec.producer_id for rec in res.ledger if rec.epoch == epoch]
            assert producers == [order[r % pool.pool_size] for r in range(cfg.rounds_per_epoch)]

    def test_deterministic(self):
        nodes = generate_network(10, seed=5)
        a = run_simulation(poai_cfg(10, seed=3), nodes)
        b = run_simulation(poai_cfg(10, seed=3), nodes)
        assert a.ledger == b.ledger and a.pools == b.pools

    def test_seed_changes_ledger(self):
        nodes = generate_network(10, seed=5)
        a = run_simulation(poai_cfg(10, seed=3), nodes)
        b = run_simulation(poai_cfg(10, seed=4), nodes)
        assert a.ledger != b.ledger

    def test_random_nodes_produce_blocks(self):
        nodes = generate_network(10, seed=1)
        res = run_simulation(poai_cfg(10, epochs=5, rounds=20, whole_max=8, seed=2), nodes)
        met = compute_metrics(res)
        assert met.random_node_block_fraction > 0.0
        assert met.total_hash_ops == 0

    def test_hash_ops_zero_on_every_block(self):
        nodes = generate_network(6, seed=2)
        res = run_simulation(poai_cfg(6, seed=9), nodes)
        assert all(rec.hash_ops == 0 for rec in res.ledger)

    def test_attacked_producer_skipped(self):
        # node with certain attack failure never produces, but rounds still fill
        nodes = [make_node(1, cpr=0.9), make_node(2, cpr=0.8, attacked=1.0),
                 make_node(3, cpr=0.5), make_node(4, cpr=0.1)]
        cfg = poai_cfg(4, epochs=2, rounds=8, whole_max=5, seed=1)
        res = run_simulation(cfg, nodes)
        assert len(res.ledger) == 16
        assert 2 not in res.producer_ids()
        assert any(rec.failed_attempts > 0 for rec in res.ledger)

    def test_classes_match_pool_membership(self):
        nodes = generate_network(9, seed=3)
        res = run_simulation(poai_cfg(9, seed=6), nodes)
        for rec in res.ledger:
            pool = res.pools[rec.epoch]
            if rec.producer_id in pool.super_ids:
                assert rec.producer_class is NodeClass.SUPER
            else:
                assert rec.producer_id in pool.random_ids
                assert rec.producer_class is NodeClass.RANDOM

    def test_elapsed_is_latency_plus_validation(self):
        nodes = safe_nodes(6, seed=4)
        by_id = {n.node_id: n for n in nodes}
        res = run_simulation(poai_cfg(6, seed=1), nodes)
        for rec in res.ledger:
            assert rec.elapsed == pytest.approx(by_id[rec.producer_id].latency + 1.0)

    def test_wrong_protocol_rejected(self):
        with pytest.raises(ValidationError):
            run_simulation(poai_cfg(6, protocol=Protocol.POW), safe_nodes(6))

    def test_node_count_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            run_simulation(poai_cfg(7), safe_nodes(6))


class TestBaselines:
    def test_pow_degenerate_cpr(self):
        nodes = [make_node(1, cpr=1.0)] + [make_node(i, cpr=0.0) for i in range(2, 6)]
        cfg = poai_cfg(5, protocol=Protocol.POW, seed=8)
        res = run_baseline(cfg, nodes)
        assert res.producer_ids() == {1}
        assert all(rec.hash_ops > 0 for rec in res.ledger)

    def test_pow_total_hash_ops_positive(self):
        res = run_baseline(poai_cfg(6, protocol=Protocol.POW), safe_nodes(6))
        assert compute_metrics(res).total_hash_ops > 0

    def test_pos_equal_payoffs_uniform_within_3_sigma(self):
        n, rounds = 5, 10_000
        nodes = [make_node(i + 1, payoff=400.0) for i in range(n)]
        cfg = SimConfig(num_nodes=n, epochs=1, rounds_per_epoch=rounds, protocol=Protocol.POS,
                        selection=SelectionConfig(whole_max=4), seed=13)
        res = run_baseline(cfg, nodes)
        counts = {i + 1: 0 for i in range(n)}
        for rec in res.ledger:
            counts[rec.producer_id] += 1
        expected = rounds / n
        sigma = np.sqrt(rounds * (1 / n) * (1 - 1 / n))
        for c in counts.values():
            assert abs(c - expected) <= 3 * sigma

    def test_pos_weights_follow_payoff(self):
        nodes = [make_node(1, payoff=1000.0), make_node(2, payoff=1.0)]
        cfg = SimConfig(num_nodes=2, epochs=1, rounds_per_epoch=500, protocol=Protocol.POS,
                        selection=SelectionConfig(whole_max=3), seed=3)
        res = run_baseline(cfg, nodes)
        counts = sum(1 for rec in res.ledger if rec.producer_id == 1)
        assert counts > 450

    def test_dpos_delegates_match_sort_oracle(self):
        rng = np.random.default_rng(31)
        payoffs = rng.uniform(0, 1e4, 12)
        payoffs[3] = payoffs[7]  # force a tie
        nodes = [make_node(i + 1, payoff=float(p)) for i, p in enumerate(payoffs)]
        cfg = poai_cfg(12, protocol=Protocol.DPOS, whole_max=8, seed=2)
        res = run_baseline(cfg, nodes)
        k = dpos_delegate_count(cfg.selection, 12)
        oracle = [nid for nid, _ in sorted(
            ((n.node_id, n.payoff) for n in nodes), key=lambda e: (-e[1], e[0])
        )[:k]]
        assert list(res.delegate_ids) == oracle
        assert res.producer_ids() == set(oracle)

    def test_dpos_round_robin_is_even(self):
        nodes = safe_nodes(8, seed=6)
        cfg = poai_cfg(8, epochs=2, rounds=12, protocol=Protocol.DPOS, seed=1)
        res = run_baseline(cfg, nodes)
        counts = {}
        for rec in res.ledger:
            counts[rec.producer_id] = counts.get(rec.producer_id, 0) + 1
        assert max(counts.values()) - min(counts.values()) <= 1

    def test_baselines_have_no_random_class(self):
        for proto in (Protocol.POW, Protocol.POS, Protocol.DPOS):
            res = run_baseline(poai_cfg(6, protocol=proto, seed=4), safe_nodes(6))
            assert all(rec.producer_class is NodeClass.UNKNOWN for rec in res.ledger)

    def test_pow_zero_total_weight_rejected(self):
        nodes = [make_node(i + 1, cpr=0.0) for i in range(4)]
        with pytest.raises(ValidationError):
            run_baseline(poai_cfg(4, protocol=Protocol.POW), nodes)

    def test_poai_rejected_by_baseline_runner(self):
        with pytest.raises(ValidationError):
            run_baseline(poai_cfg(6), safe_nodes(6))


class TestScoreNodes:
    def test_oracle_scores_match_oracle(self, sample_row_one):
        from poai.features import normalize_features
        from poai.oracle import oracle_mean

        scores = score_nodes([sample_row_one], "oracle")
        assert scores[0] == (1, pytest.approx(oracle_mean(normalize_features(sample_row_one))))

    def test_model_scorer_used(self):
        from poai.scorer.model import init_model, predict
        from poai.features import normalize_features

        model = init_model(2)
        nodes = safe_nodes(3)
        scores = score_nodes(nodes, model)
        for node, (nid, s) in zip(nodes, scores):
            assert nid == node.node_id
            assert s == pytest.approx(predict(model, normalize_features(node)))


class TestGenerateNetwork:
    def test_deterministic(self):
        assert generate_network(10, seed=3) == generate_network(10, seed=3)

    def test_risk_cap_respected(self):
        for node in generate_network(200, seed=1, max_risk=0.05):
            assert node.attacked_probability <= 0.05
            assert node.discarded_probability <= 0.05
            assert node.attract_probability <= 0.05

    def test_heterogeneous_cpr(self):
        cprs = [n.computing_power_ratio for n in generate_network(50, seed=2)]
        assert max(cprs) - min(cprs) > 0.5


class TestExport:
    def test_ledger_csv_layout(self):
        res = run_simulation(poai_cfg(6, seed=2), safe_nodes(6))
        text = ledger_csv(res).decode("utf-8")
        lines = text.splitlines()
        assert lines[0] == LEDGER_HEADER
        assert len(lines) == 1 + len(res.ledger)
        cells = lines[1].split(",")
        assert len(cells) == 7
        assert cells[3] in ("super", "random", "unknown")

    def test_run_protocol_dispatch(self):
        nodes = safe_nodes(6)
        assert run_protocol(poai_cfg(6), nodes).protocol is Protocol.POAI
        assert run_protocol(poai_cfg(6, protocol=Protocol.POS), nodes).protocol is Protocol.POS
