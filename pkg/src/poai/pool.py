"""Node-pool construction: ranking, sizing, super/random selection.

Given per-node capability scores, the pool builder

1. ranks nodes by descending score (ties broken by ascending id),
2. draws the pool size uniformly from the open interval
   (whole_max / 2, whole_max), restricted to what the network can fill,
3. draws the super-node count, takes that many top-ranked nodes,
4. fills the rest of the pool with uniformly sampled non-super nodes.

The capability threshold exported with the pool is the score of the
lowest-ranked super node; everything at or above it (by rank position)
is super, everything else in the pool is a random node, and nodes
outside the pool are unknown.
"""

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from poai.errors import ConfigurationError, ValidationError


class NodeClass(Enum):
    SUPER = "super"
    RANDOM = "random"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SelectionConfig:
    """Pool sizing parameters.

    ``whole_max`` caps the pool; the pool size is drawn strictly
    between half of it and itself. ``sup_fraction_min`` bounds the
    super share of the pool from below.
    """

    whole_max: int
    sup_fraction_min: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.whole_max < 2:
            raise ValidationError(f"whole_max must be >= 2, got {self.whole_max!r}")
        if not (0.0 < self.sup_fraction_min < 1.0):
            raise ValidationError(
                f"sup_fraction_min must lie in (0, 1), got {self.sup_fraction_min!r}"
            )


@dataclass(frozen=True)
class NodePool:
    super_ids: tuple[int, ...]   # rank order
    random_ids: tuple[int, ...]  # ascending id
    pool_size: int
    sup_num: int
    rad_num: int
    threshold: float

    def __post_init__(self):
        if set(self.super_ids) & set(self.random_ids):
            raise ValidationError("super and random ids overlap")
        if len(self.super_ids) != self.sup_num or len(self.random_ids) != self.rad_num:
            raise ValidationError("pool counts do not match id lists")
        if self.sup_num + self.rad_num != self.pool_size:
            raise ValidationError("sup_num + rad_num must equal pool_size")

    def member_ids(self) -> set[int]:
        return set(self.super_ids) | set(self.random_ids)


@dataclass(frozen=True)
class InjectedDraws:
    """Fixed random draws for reproducing worked selection examples.

    Substitutes the three stochastic choices of :func:`select_pool`;
    every injected value is validated against the same constraints the
    random path enforces.
    """

    pool_size: int
    sup_num: int
    random_picks: tuple[int, ...]


def rank_nodes(scores) -> list[tuple[int, float]]:
    """Stable descending ranking; equal scores order by ascending id."""
    entries = [(int(node_id), float(atn)) for node_id, atn in scores]
    seen: set[int] = set()
    for node_id, _ in entries:
        if node_id in seen:
            raise ValidationError(f"duplicate node_id {node_id}")
        seen.add(node_id)
    return sorted(entries, key=lambda e: (-e[1], e[0]))


def pool_size_bounds(cfg: SelectionConfig, n_ranked: int) -> tuple[int, int]:
    """Inclusive [lo, hi] interval of valid pool sizes, or a config error.

    Valid sizes are the integers strictly between whole_max / 2 and
    whole_max that the ranked list can actually fill (and never fewer
    than 2, since a pool always holds at least one super and one
    random node).
    """
    lo = max(math.floor(0.5 * cfg.whole_max) + 1, 2)
    hi = min(cfg.whole_max - 1, n_ranked)
    if lo > hi:
        raise ConfigurationError(
            f"no valid pool size in ({0.5 * cfg.whole_max:g}, {cfg.whole_max}) "
            f"for a network of {n_ranked} ranked nodes"
        )
    return lo, hi


def _sup_num_bounds(cfg: SelectionConfig, pool_size: int) -> tuple[int, int]:
    lo = max(1, math.ceil(cfg.sup_fraction_min * pool_size))
    hi = pool_size - 1
    if lo > hi:
        raise ConfigurationError(
            f"sup_fraction_min={cfg.sup_fraction_min} leaves no super count "
            f"for pool size {pool_size}"
        )
    return lo, hi


def select_pool(
    ranked: list[tuple[int, float]],
    cfg: SelectionConfig,
    rng: np.random.Generator | None = None,
    injected: InjectedDraws | None = None,
) -> NodePool:
    """Build a node pool from a ranked list; deterministic per seed.

    The super nodes are always the top-ranked slice; the random nodes
    are drawn without replacement (partial Fisher-Yates shuffle) from
    the remainder and reported in ascending id order. ``rng`` defaults
    to a generator seeded from ``cfg.seed``.
    """
    if len(ranked) < 2:
        raise ValidationError(f"need at least 2 ranked nodes, got {len(ranked)}")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    ps_lo, ps_hi = pool_size_bounds(cfg, len(ranked))
    if injected is not None:
        pool_size = injected.pool_size
        if not (ps_lo <= pool_size <= ps_hi):
            raise ValidationError(
                f"injected pool_size {pool_size} outside valid range [{ps_lo}, {ps_hi}]"
            )
    else:
        pool_size = int(rng.integers(ps_lo, ps_hi + 1))

    sup_lo, sup_hi = _sup_num_bounds(cfg, pool_size)
    if injected is not None:
        sup_num = injected.sup_num
        if not (sup_lo <= sup_num <= sup_hi):
            raise ValidationError(
                f"injected sup_num {sup_num} outside valid range [{sup_lo}, {sup_hi}]"
            )
    else:
        sup_num = int(rng.integers(sup_lo, sup_hi + 1))

    rad_num = pool_size - sup_num
    super_ids = tuple(node_id for node_id, _ in ranked[:sup_num])
    threshold = ranked[sup_num - 1][1]

    candidates = [node_id for node_id, _ in ranked[sup_num:]]
    if injected is not None:
        picks = list(injected.random_picks)
        if len(picks) != rad_num:
            raise ValidationError(f"expected {rad_num} injected random picks, got {len(picks)}")
        if len(set(picks)) != len(picks) or not set(picks) <= set(candidates):
            raise ValidationError("injected random picks must be distinct non-super node ids")
        random_ids = tuple(sorted(picks))
    else:
        for i in range(rad_num):
            j = int(rng.integers(i, len(candidates)))
            candidates[i], candidates[j] = candidates[j], candidates[i]
        random_ids = tuple(sorted(candidates[:rad_num]))

    return NodePool(
        super_ids=super_ids,
        random_ids=random_ids,
        pool_size=pool_size,
        sup_num=sup_num,
        rad_num=rad_num,
        threshold=threshold,
    )


def classify(node_id: int, pool: NodePool) -> NodeClass:
    """Class of a node relative to a pool; absent nodes are unknown."""
    if node_id in pool.super_ids:
        return NodeClass.SUPER
    if node_id in pool.random_ids:
        return NodeClass.RANDOM
    return NodeClass.UNKNOWN


def pool_to_json(pool: NodePool, seed: int) -> str:
    """Serialize a pool plus the seed that produced it."""
    doc = {
        "pool_size": pool.pool_size,
        "sup_num": pool.sup_num,
        "threshold": pool.threshold,
        "super_ids": list(pool.super_ids),
        "random_ids": list(pool.random_ids),
        "seed": seed,
    }
    return json.dumps(doc, indent=1) + "\n"


def pool_from_json(text: str | bytes) -> tuple[NodePool, int]:
    """Parse the JSON emitted by :func:`pool_to_json`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse pool JSON: {exc}") from None
    try:
        pool = NodePool(
            super_ids=tuple(int(i) for i in doc["super_ids"]),
            random_ids=tuple(int(i) for i in doc["random_ids"]),
            pool_size=int(doc["pool_size"]),
            sup_num=int(doc["sup_num"]),
            rad_num=int(doc["pool_size"]) - int(doc["sup_num"]),
            threshold=float(doc["threshold"]),
        )
        return pool, int(doc["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed pool JSON: {exc}") from None
