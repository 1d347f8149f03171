"""Synthetic ground-truth capability score.

The per-node capability (average transaction number, "atn") is modeled
as a squashed weighted sum of the normalized feature matrix: strong
positive weight on computing power and payoff, negative weight on hop
count, latency and the risk probabilities, with the attacked
probability weighted heaviest among the safety terms. The score is used
both to label synthetic datasets and as a reference scorer for the
simulator.
"""

import math

import numpy as np

from poai.errors import ValidationError
from poai.features import validate_matrix

# Weights laid out like the feature matrix: row 0 node properties,
# row 1 network nature, row 2 safety elements.
ORACLE_WEIGHTS = np.array(
    [
        [0.35, 0.10, 0.25],    # computing_power_ratio, online_time, payoff
        [-0.15, 0.10, -0.20],  # hop, connection_number, latency
        [-0.10, -0.30, -0.05], # discarded, attacked, attract probabilities
    ]
)

ATN_SCALE = 200.0


def oracle_mean(m: np.ndarray) -> float:
    """Noise-free capability score of a normalized feature matrix.

    Computes scale * sigmoid(4 * <W, m> - 1), which is strictly
    increasing in computing power ratio, online time, payoff and
    connection number, and strictly decreasing in hop, latency and the
    three risk probabilities.
    """
    m = validate_matrix(m)
    z = 4.0 * float(np.sum(ORACLE_WEIGHTS * m)) - 1.0
    return ATN_SCALE / (1.0 + math.exp(-z))


def oracle_atn(m: np.ndarray, noise_std: float, rng: np.random.Generator) -> float:
    """Capability score with additive Gaussian noise, clamped at 0.

    One normal draw is consumed from ``rng`` regardless of
    ``noise_std`` so that callers generating streams of samples consume
    the generator at a fixed rate.
    """
    if not (math.isfinite(noise_std) and noise_std >= 0):
        raise ValidationError(f"noise_std must be >= 0, got {noise_std!r}")
    mean = oracle_mean(m)
    eps = float(rng.normal())
    return max(0.0, mean + noise_std * eps)
