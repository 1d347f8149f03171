"""Node state and feature normalization.

A node is described by nine raw features in three groups of three:

* node properties: computing power ratio, online time, payoff
* network nature:  hop count, connection number, latency
* safety elements: discarded / attacked / attract probabilities

``normalize_features`` maps the raw values into a 3x3 matrix with every
entry in [0, 1], laid out one group per row in the order above. That
matrix is the input consumed by the capability scorer and the synthetic
label oracle.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from poai.errors import ValidationError

# Matrix layout, row-major: row 0 node properties, row 1 network
# nature, row 2 safety elements.
FEATURE_NAMES = (
    "computing_power_ratio",
    "online_time",
    "payoff",
    "hop",
    "connection_number",
    "latency",
    "discarded_probability",
    "attacked_probability",
    "attract_probability",
)

_PROBABILITY_FIELDS = (
    "computing_power_ratio",
    "discarded_probability",
    "attacked_probability",
    "attract_probability",
)


@dataclass(frozen=True)
class NodeFeatures:
    """Raw per-node state.

    Times are seconds, payoff is coin-seconds (stake held over time),
    hop and connection_number are counts. All probability-like fields
    must lie in [0, 1]; everything else must be finite and >= 0.
    """

    node_id: int
    computing_power_ratio: float
    online_time: float
    payoff: float
    hop: float
    connection_number: float
    latency: float
    discarded_probability: float
    attacked_probability: float
    attract_probability: float

    def __post_init__(self):
        if not isinstance(self.node_id, int) or self.node_id < 0:
            raise ValidationError(f"node_id must be a non-negative integer, got {self.node_id!r}")
        for f in fields(self):
            if f.name == "node_id":
                continue
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValidationError(f"{f.name} must be finite, got {value!r}")
            if value < 0:
                raise ValidationError(f"{f.name} must be >= 0, got {value!r}")
            if f.name in _PROBABILITY_FIELDS and value > 1:
                raise ValidationError(f"{f.name} must be in [0, 1], got {value!r}")

    def as_tuple(self) -> tuple[float, ...]:
        """The nine features in matrix order (node_id excluded)."""
        return tuple(getattr(self, name) for name in FEATURE_NAMES)


@dataclass(frozen=True)
class RangeSpec:
    """Normalization rule for one feature: linear v/max or log10(1+v)/max."""

    kind: str  # "linear" or "log10"
    max: float

    def __post_init__(self):
        if self.kind not in ("linear", "log10"):
            raise ValidationError(f"unknown range kind {self.kind!r}")
        if not (math.isfinite(self.max) and self.max > 0):
            raise ValidationError(f"range max must be positive, got {self.max!r}")

    def apply(self, value: float) -> float:
        if self.kind == "linear":
            scaled = value / self.max
        else:
            scaled = math.log10(1.0 + value) / self.max
        return min(1.0, max(0.0, scaled))


@dataclass(frozen=True)
class FeatureRanges:
    """Per-feature normalization spec, one :class:`RangeSpec` per feature."""

    specs: tuple[RangeSpec, ...]

    def __post_init__(self):
        if len(self.specs) != len(FEATURE_NAMES):
            raise ValidationError(
                f"expected {len(FEATURE_NAMES)} range specs, got {len(self.specs)}"
            )

    def spec_for(self, feature: str) -> RangeSpec:
        return self.specs[FEATURE_NAMES.index(feature)]


def default_ranges() -> FeatureRanges:
    """Ranges sized for day-scale uptime and k-to-M scale counts.

    Payoff and connection number span several orders of magnitude, so
    they normalize on a log10 scale (saturating at 1e5-1 and 1e6-1);
    probability-like features pass through unchanged.
    """
    return FeatureRanges(
        specs=(
            RangeSpec("linear", 1.0),       # computing_power_ratio
            RangeSpec("linear", 86400.0),   # online_time, one day
            RangeSpec("log10", 5.0),        # payoff
            RangeSpec("linear", 256.0),     # hop
            RangeSpec("log10", 6.0),        # connection_number
            RangeSpec("linear", 1.0),       # latency
            RangeSpec("linear", 1.0),       # discarded_probability
            RangeSpec("linear", 1.0),       # attacked_probability
            RangeSpec("linear", 1.0),       # attract_probability
        )
    )


def normalize_features(raw: NodeFeatures, ranges: FeatureRanges | None = None) -> np.ndarray:
    """Normalize raw node state into the 3x3 feature matrix.

    Linear features map to clamp(value/max, 0, 1); log features to
    clamp(log10(1+value)/max, 0, 1). Under the default ranges the
    probability fields and the computing power ratio pass through
    unchanged. Returns a float64 array of shape (3, 3).
    """
    if ranges is None:
        ranges = default_ranges()
    values = raw.as_tuple()
    out = np.empty(9, dtype=np.float64)
    for i, (value, spec) in enumerate(zip(values, ranges.specs)):
        out[i] = spec.apply(value)
    return out.reshape(3, 3)


def validate_matrix(m: np.ndarray) -> np.ndarray:
    """Check that ``m`` is a finite 3x3 matrix with entries in [0, 1]."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValidationError(f"feature matrix must have shape (3, 3), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("feature matrix contains non-finite entries")
    if m.min() < 0.0 or m.max() > 1.0:
        raise ValidationError("feature matrix entries must lie in [0, 1]")
    return m
