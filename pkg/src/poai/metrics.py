"""Decentralization and performance metrics over simulation ledgers.

The metric definitions are simulator-level proxies: the Gini
coefficient and Shannon entropy of per-node block counts measure how
evenly production spreads, the confirmation time sums the elapsed time
of the next ``confirmation_depth`` blocks, and hash operations count
modeled proof-of-work effort.
"""

import math
from dataclasses import dataclass

import numpy as np

from poai.errors import ValidationError
from poai.pool import NodeClass


def gini(counts) -> float:
    """Gini coefficient of a non-negative count vector (zeros included)."""
    x = np.sort(np.asarray(counts, dtype=np.float64))
    if x.size == 0:
        raise ValidationError("gini of an empty vector is undefined")
    if np.any(x < 0):
        raise ValidationError("gini requires non-negative values")
    total = x.sum()
    if total == 0:
        return 0.0
    n = x.size
    ranks = np.arange(1, n + 1)
    return float(2.0 * np.sum(ranks * x) / (n * total) - (n + 1) / n)


def shannon_entropy_bits(counts) -> float:
    """Shannon entropy (bits) of the distribution implied by counts."""
    x = np.asarray(counts, dtype=np.float64)
    total = x.sum()
    if total <= 0:
        raise ValidationError("entropy requires a positive total count")
    p = x[x > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation with average ranks for ties.

    Returns nan when either input has zero rank variance.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("spearman expects two equal-length 1-d arrays")
    if x.size < 2:
        raise ValidationError("spearman needs at least 2 observations")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(np.sum(rx * rx)) * float(np.sum(ry * ry)))
    if denom == 0.0:
        return float("nan")
    return float(np.sum(rx * ry) / denom)


@dataclass(frozen=True)
class Metrics:
    gini: float
    producer_entropy: float           # bits
    random_node_block_fraction: float
    mean_confirmation_time: float     # seconds
    total_hash_ops: int
    failed_round_fraction: float

    def to_dict(self) -> dict:
        return {
            "gini": self.gini,
            "producer_entropy": self.producer_entropy,
            "random_node_block_fraction": self.random_node_block_fraction,
            "mean_confirmation_time": self.mean_confirmation_time,
            "total_hash_ops": self.total_hash_ops,
            "failed_round_fraction": self.failed_round_fraction,
        }


def compute_metrics(result) -> Metrics:
    """Derive :class:`Metrics` from a finished simulation.

    ``result`` is a :class:`poai.simulate.SimResult`. The Gini
    coefficient is taken over per-node block counts across every
    network node (non-producers count as zero). Confirmation time
    averages, over all blocks followed by at least
    ``confirmation_depth`` more, the summed elapsed time of those next
    blocks; the ledger must be longer than the depth.
    """
    ledger = result.ledger
    if not ledger:
        raise ValidationError("cannot compute metrics for an empty ledger")
    depth = result.confirmation_depth
    n_blocks = len(ledger)
    if n_blocks <= depth:
        raise ValidationError(
            f"ledger has {n_blocks} blocks; confirmation depth {depth} needs at least {depth + 1}"
        )

    counts = {node_id: 0 for node_id in result.node_ids}
    for rec in ledger:
        counts[rec.producer_id] = counts.get(rec.producer_id, 0) + 1
    count_vec = np.array([counts[nid] for nid in sorted(counts)], dtype=np.float64)

    elapsed = np.array([rec.elapsed for rec in ledger])
    cumulative = np.concatenate(([0.0], np.cumsum(elapsed)))
    windows = cumulative[depth + 1 :] - cumulative[1 : n_blocks - depth + 1]

    random_blocks = sum(1 for rec in ledger if rec.producer_class is NodeClass.RANDOM)
    failed_rounds = sum(1 for rec in ledger if rec.failed_attempts > 0)

    return Metrics(
        gini=gini(count_vec),
        producer_entropy=shannon_entropy_bits(count_vec),
        random_node_block_fraction=random_blocks / n_blocks,
        mean_confirmation_time=float(np.mean(windows)),
        total_hash_ops=int(sum(rec.hash_ops for rec in ledger)),
        failed_round_fraction=failed_rounds / n_blocks,
    )
