"""Labeled node datasets: synthetic generation and CSV persistence.

The on-disk format is UTF-8 comma-separated text with LF line endings
and the fixed 11-column header::

    node_id,computing_power_ratio,online_time_s,payoff,hop,connection_number,latency_s,discarded_probability,attacked_probability,attract_probability,atn_label

Reals are written with ``repr`` so a save/load round trip is lossless.
"""

import math
from dataclasses import dataclass

import numpy as np

from poai.errors import DatasetFormatError, ValidationError
from poai.features import (
    FEATURE_NAMES,
    FeatureRanges,
    NodeFeatures,
    default_ranges,
    normalize_features,
)
from poai.oracle import oracle_atn

# fields whose raw values may never exceed 1 regardless of range spec
BOUNDED_FIELDS = frozenset(
    (
        "computing_power_ratio",
        "discarded_probability",
        "attacked_probability",
        "attract_probability",
    )
)

DATASET_HEADER = (
    "node_id,computing_power_ratio,online_time_s,payoff,hop,connection_number,"
    "latency_s,discarded_probability,attacked_probability,attract_probability,atn_label"
)
_COLUMNS = DATASET_HEADER.split(",")


@dataclass
class Dataset:
    """Ordered labeled samples: (node features, capability label)."""

    samples: list[tuple[NodeFeatures, float]]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def to_arrays(self, ranges: FeatureRanges | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Normalized feature matrices (n, 3, 3) and labels (n,)."""
        if ranges is None:
            ranges = default_ranges()
        n = len(self.samples)
        x = np.empty((n, 3, 3), dtype=np.float64)
        y = np.empty(n, dtype=np.float64)
        for i, (feat, label) in enumerate(self.samples):
            x[i] = normalize_features(feat, ranges)
            y[i] = label
        return x, y


def generate_dataset(
    n: int,
    seed: int,
    noise_std: float = 0.0,
    ranges: FeatureRanges | None = None,
) -> Dataset:
    """Draw ``n`` labeled samples, fully determined by ``seed``.

    Features are sampled uniformly within the normalization ranges
    (log-space uniform for the log-scaled features, with counts rounded
    to integers); labels come from the score oracle. The generator is
    consumed at a fixed per-sample rate, so the first ``n`` samples of
    a longer run with the same seed are identical.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if ranges is None:
        ranges = default_ranges()
    rng = np.random.default_rng(seed)
    samples: list[tuple[NodeFeatures, float]] = []
    for i in range(n):
        values: dict[str, float] = {}
        for name in FEATURE_NAMES:
            spec = ranges.spec_for(name)
            if name == "hop" and spec.kind == "linear":
                value = float(rng.integers(0, int(spec.max) + 1))
            elif spec.kind == "log10":
                value = 10.0 ** float(rng.uniform(0.0, spec.max)) - 1.0
                if name in ("hop", "connection_number"):
                    value = float(round(value))
            else:
                hi = min(spec.max, 1.0) if name in BOUNDED_FIELDS else spec.max
                value = float(rng.uniform(0.0, hi))
            values[name] = value
        feat = NodeFeatures(node_id=i + 1, **values)
        label = oracle_atn(normalize_features(feat, ranges), noise_std, rng)
        samples.append((feat, label))
    return Dataset(samples)


def _format_real(value: float) -> str:
    # repr of a Python float is the shortest string that round-trips.
    return repr(float(value))


def save_dataset(dataset: Dataset) -> bytes:
    """Serialize to the 11-column CSV layout."""
    lines = [DATASET_HEADER]
    for feat, label in dataset.samples:
        cells = [str(feat.node_id)]
        cells.extend(_format_real(v) for v in feat.as_tuple())
        cells.append(_format_real(label))
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_cell(raw: str, column: str, line_no: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DatasetFormatError(f"non-numeric value {raw!r} in column {column}", line_no) from None
    if not math.isfinite(value):
        raise DatasetFormatError(f"non-finite value in column {column}", line_no)
    return value


def load_dataset(data: bytes | str) -> Dataset:
    """Parse dataset CSV bytes, rejecting malformed rows with line numbers."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DatasetFormatError(f"not valid UTF-8: {exc}") from None
    else:
        text = data
    lines = text.splitlines()
    if not lines:
        raise DatasetFormatError("empty input, missing header", 1)
    header = lines[0].strip()
    if header != DATASET_HEADER:
        missing = set(_COLUMNS) - set(header.split(","))
        detail = f"missing columns {sorted(missing)}" if missing else "unexpected column order or names"
        raise DatasetFormatError(f"bad header ({detail})", 1)

    samples: list[tuple[NodeFeatures, float]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(_COLUMNS):
            raise DatasetFormatError(
                f"expected {len(_COLUMNS)} columns, found {len(cells)}", line_no
            )
        try:
            node_id = int(cells[0])
        except ValueError:
            raise DatasetFormatError(f"non-integer node_id {cells[0]!r}", line_no) from None
        values = [_parse_cell(c, col, line_no) for c, col in zip(cells[1:], _COLUMNS[1:])]
        try:
            feat = NodeFeatures(node_id, *values[:-1])
        except ValidationError as exc:
            raise DatasetFormatError(str(exc), line_no) from None
        label = values[-1]
        if label < 0:
            raise DatasetFormatError(f"atn_label must be >= 0, got {label!r}", line_no)
        samples.append((feat, label))
    return Dataset(samples)
