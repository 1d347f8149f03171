"""Deterministic round-based consensus simulator.

One run is organized as epochs, each holding a fixed number of
block-production rounds. Under the pool protocol a node pool is
selected per epoch (with an epoch-derived sub-seed) and blocks are
produced by rotating through it: supers in rank order, then random
nodes in ascending id order. A scheduled producer can fail its round
with its attacked probability and then its discarded probability; a
failure advances the rotation to the next pool member and is recorded
on the block that is eventually produced.

Three simplified baselines share the round structure:

* pow  -- producer sampled proportional to computing power ratio,
          block interval exponentially distributed, counted hash work
* pos  -- producer sampled proportional to payoff
* dpos -- fixed delegate set (top payoff), strict round robin

Every run is a pure function of (config, nodes): all randomness comes
from generators derived by mixing the master seed with the epoch index
and a per-purpose stream number.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from poai.errors import SimulationError, ValidationError
from poai.features import FeatureRanges, NodeFeatures, default_ranges, normalize_features
from poai.metrics import Metrics
from poai.oracle import oracle_mean
from poai.pool import NodeClass, NodePool, SelectionConfig, classify, pool_size_bounds, rank_nodes, select_pool
from poai.scorer.model import ScorerModel, predict_batch

VALIDATION_TIME = 1.0      # seconds added to every non-pow block
POW_HASH_RATE = 1e6        # modeled hash ops per second per unit of cpr

_SEED_MASK = (1 << 64) - 1

LEDGER_HEADER = "epoch,round,producer_id,producer_class,elapsed_s,hash_ops,failed_attempts"


class Protocol(Enum):
    POAI = "poai"
    POW = "pow"
    POS = "pos"
    DPOS = "dpos"


@dataclass(frozen=True)
class SimConfig:
    num_nodes: int
    epochs: int
    rounds_per_epoch: int
    protocol: Protocol
    selection: SelectionConfig
    scorer: object = "oracle"  # "oracle" or a ScorerModel
    pow_mean_block_interval: float = 600.0
    confirmation_depth: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValidationError(f"num_nodes must be >= 1, got {self.num_nodes!r}")
        if self.epochs < 1 or self.rounds_per_epoch < 1:
            raise ValidationError("epochs and rounds_per_epoch must be >= 1")
        if self.pow_mean_block_interval <= 0:
            raise ValidationError("pow_mean_block_interval must be > 0")
        if self.confirmation_depth < 1:
            raise ValidationError("confirmation_depth must be >= 1")
        if not (self.scorer == "oracle" or isinstance(self.scorer, ScorerModel)):
            raise ValidationError("scorer must be 'oracle' or a ScorerModel")


@dataclass(frozen=True)
class BlockRecord:
    epoch: int
    round: int
    producer_id: int
    producer_class: NodeClass
    elapsed: float
    hash_ops: int
    failed_attempts: int


@dataclass
class SimResult:
    protocol: Protocol
    seed: int
    node_ids: list[int]
    confirmation_depth: int
    ledger: list[BlockRecord] = field(default_factory=list)
    pools: list[NodePool] = field(default_factory=list)      # one per epoch (pool protocol)
    delegate_ids: tuple[int, ...] = ()                       # dpos only

    def producer_ids(self) -> set[int]:
        return {rec.producer_id for rec in self.ledger}


def _stream_rng(seed: int, epoch: int, stream: int) -> np.random.Generator:
    # Counter-mixed split: epochs are independent but reproducible.
    return np.random.default_rng(np.random.SeedSequence([seed & _SEED_MASK, epoch, stream]))


def generate_network(n: int, seed: int, max_risk: float = 0.05) -> list[NodeFeatures]:
    """Synthesize an operating network for protocol comparison runs.

    Capability-related features are heterogeneous (computing power
    ratio uniform in [0, 1], payoff and connection number log-uniform),
    while the per-round failure probabilities stay below ``max_risk``:
    a network where half the producers fail half their slots is not a
    meaningful baseline for comparing protocols. Deterministic per
    seed. For training data with full-range risk features use
    :func:`poai.dataset.generate_dataset` instead.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not (0.0 <= max_risk <= 1.0):
        raise ValidationError(f"max_risk must lie in [0, 1], got {max_risk!r}")
    rng = np.random.default_rng(seed)
    nodes = []
    for i in range(n):
        nodes.append(
            NodeFeatures(
                node_id=i + 1,
                computing_power_ratio=float(rng.uniform(0.0, 1.0)),
                online_time=float(rng.uniform(0.0, 86400.0)),
                payoff=float(10.0 ** rng.uniform(0.0, 5.0) - 1.0),
                hop=float(rng.integers(0, 257)),
                connection_number=float(round(10.0 ** rng.uniform(0.0, 6.0) - 1.0)),
                latency=float(rng.uniform(0.0, 1.0)),
                discarded_probability=float(rng.uniform(0.0, max_risk)),
                attacked_probability=float(rng.uniform(0.0, max_risk)),
                attract_probability=float(rng.uniform(0.0, max_risk)),
            )
        )
    return nodes


def _check_nodes(cfg: SimConfig, nodes: list[NodeFeatures]) -> dict[int, NodeFeatures]:
    if len(nodes) < 2:
        raise ValidationError(f"need at least 2 nodes, got {len(nodes)}")
    if len(nodes) != cfg.num_nodes:
        raise ValidationError(f"config says {cfg.num_nodes} nodes, got {len(nodes)}")
    by_id = {}
    for node in nodes:
        if node.node_id in by_id:
            raise ValidationError(f"duplicate node_id {node.node_id}")
        by_id[node.node_id] = node
    return by_id


def score_nodes(
    nodes: list[NodeFeatures],
    scorer: object = "oracle",
    ranges: FeatureRanges | None = None,
) -> list[tuple[int, float]]:
    """Capability score per node, via the oracle or a trained model."""
    if ranges is None:
        ranges = default_ranges()
    matrices = np.stack([normalize_features(node, ranges) for node in nodes])
    if scorer == "oracle":
        scores = [oracle_mean(m) for m in matrices]
    elif isinstance(scorer, ScorerModel):
        scores = predict_batch(scorer, matrices).tolist()
    else:
        raise ValidationError("scorer must be 'oracle' or a ScorerModel")
    return [(node.node_id, float(s)) for node, s in zip(nodes, scores)]


def rotation_order(pool: NodePool) -> list[int]:
    """Block-production order: supers by rank, then randoms by id."""
    return list(pool.super_ids) + sorted(pool.random_ids)


def next_producer(pool: NodePool, round_index: int) -> int:
    """Scheduled producer for a round; pure round-robin over the pool."""
    if pool.pool_size < 1:
        raise ValidationError("pool is empty")
    order = rotation_order(pool)
    return order[round_index % pool.pool_size]


def run_simulation(
    cfg: SimConfig,
    nodes: list[NodeFeatures],
    ranges: FeatureRanges | None = None,
) -> SimResult:
    """Run the pool protocol; returns the block ledger and per-epoch pools."""
    if cfg.protocol is not Protocol.POAI:
        raise ValidationError(f"run_simulation handles {Protocol.POAI.value}, got {cfg.protocol.value}")
    by_id = _check_nodes(cfg, nodes)

    # Node features are static, so scores and the ranking are computed once.
    ranked = rank_nodes(score_nodes(nodes, cfg.scorer, ranges))
    result = SimResult(
        protocol=cfg.protocol,
        seed=cfg.seed,
        node_ids=sorted(by_id),
        confirmation_depth=cfg.confirmation_depth,
    )

    for epoch in range(cfg.epochs):
        pool = select_pool(ranked, cfg.selection, _stream_rng(cfg.seed, epoch, 0))
        result.pools.append(pool)
        order = rotation_order(pool)
        rng = _stream_rng(cfg.seed, epoch, 1)
        max_attempts = 100 * pool.pool_size
        for round_index in range(cfg.rounds_per_epoch):
            failed = 0
            slot = round_index
            while True:
                if failed > max_attempts:
                    raise SimulationError(
                        f"epoch {epoch} round {round_index}: no pool member produced "
                        f"a block after {max_attempts} attempts"
                    )
                producer_id = order[slot % pool.pool_size]
                node = by_id[producer_id]
                if rng.random() < node.attacked_probability:
                    failed += 1
                    slot += 1
                    continue
                if rng.random() < node.discarded_probability:
                    failed += 1
                    slot += 1
                    continue
                break
            result.ledger.append(
                BlockRecord(
                    epoch=epoch,
                    round=round_index,
                    producer_id=producer_id,
                    producer_class=classify(producer_id, pool),
                    elapsed=node.latency + VALIDATION_TIME,
                    hash_ops=0,
                    failed_attempts=failed,
                )
            )
    return result


def dpos_delegate_count(selection: SelectionConfig, n_nodes: int) -> int:
    """Delegate count comparable to the pool protocol's expected pool size."""
    lo, hi = pool_size_bounds(selection, n_nodes)
    return (lo + hi + 1) // 2


def run_baseline(cfg: SimConfig, nodes: list[NodeFeatures]) -> SimResult:
    """Run one of the simplified pow / pos / dpos baselines."""
    if cfg.protocol not in (Protocol.POW, Protocol.POS, Protocol.DPOS):
        raise ValidationError(f"run_baseline handles pow/pos/dpos, got {cfg.protocol.value}")
    by_id = _check_nodes(cfg, nodes)
    ids = sorted(by_id)
    result = SimResult(
        protocol=cfg.protocol,
        seed=cfg.seed,
        node_ids=ids,
        confirmation_depth=cfg.confirmation_depth,
    )

    if cfg.protocol in (Protocol.POW, Protocol.POS):
        attr = "computing_power_ratio" if cfg.protocol is Protocol.POW else "payoff"
        weights = np.array([getattr(by_id[i], attr) for i in ids], dtype=np.float64)
        total = weights.sum()
        if total <= 0:
            raise ValidationError(f"{cfg.protocol.value} needs a positive total {attr}")
        probs = weights / total
    else:
        k = dpos_delegate_count(cfg.selection, len(nodes))
        by_payoff = sorted(nodes, key=lambda nd: (-nd.payoff, nd.node_id))
        delegates = [nd.node_id for nd in by_payoff[:k]]
        result.delegate_ids = tuple(delegates)

    for epoch in range(cfg.epochs):
        rng = _stream_rng(cfg.seed, epoch, 2)
        for round_index in range(cfg.rounds_per_epoch):
            if cfg.protocol is Protocol.DPOS:
                global_round = epoch * cfg.rounds_per_epoch + round_index
                producer_id = result.delegate_ids[global_round % len(result.delegate_ids)]
                elapsed = by_id[producer_id].latency + VALIDATION_TIME
                hash_ops = 0
            else:
                producer_id = ids[int(rng.choice(len(ids), p=probs))]
                if cfg.protocol is Protocol.POW:
                    elapsed = float(rng.exponential(cfg.pow_mean_block_interval))
                    elapsed = max(elapsed, 1e-12)  # keep the >0 invariant
                    hash_ops = int(round(elapsed * by_id[producer_id].computing_power_ratio * POW_HASH_RATE))
                else:
                    elapsed = by_id[producer_id].latency + VALIDATION_TIME
                    hash_ops = 0
            result.ledger.append(
                BlockRecord(
                    epoch=epoch,
                    round=round_index,
                    producer_id=producer_id,
                    producer_class=NodeClass.UNKNOWN,
                    elapsed=elapsed,
                    hash_ops=hash_ops,
                    failed_attempts=0,
                )
            )
    return result


def run_protocol(cfg: SimConfig, nodes: list[NodeFeatures],
                 ranges: FeatureRanges | None = None) -> SimResult:
    """Dispatch to the pool protocol or a baseline based on the config."""
    if cfg.protocol is Protocol.POAI:
        return run_simulation(cfg, nodes, ranges)
    return run_baseline(cfg, nodes)


def ledger_csv(result: SimResult) -> bytes:
    """Serialize the block ledger to its CSV layout."""
    lines = [LEDGER_HEADER]
    for rec in result.ledger:
        lines.append(
            f"{rec.epoch},{rec.round},{rec.producer_id},{rec.producer_class.value},"
            f"{rec.elapsed!r},{rec.hash_ops},{rec.failed_attempts}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def metrics_json(metrics: Metrics, protocol: Protocol, seed: int) -> bytes:
    doc = {"protocol": protocol.value, "seed": seed}
    doc.update(metrics.to_dict())
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")
