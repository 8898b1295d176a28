"""Ranked penalty weights for component-indexed and joint designs.

The component block is weighted by a monotone function of the component
index controlled by a shape exponent: zero gives uniform weights, positive
values penalize later (lower variance) components harder, negative values
penalize earlier components harder, and the two signs mirror each other.
The voxel block carries a single weight ``V**r``; ``information_parity_r``
picks the ``r`` at which both blocks contribute equal total prior Fisher
information under independent Laplace priors.
"""

from dataclasses import dataclass
from math import fsum, log

import numpy as np

from .errors import ValidationError

# Shape-exponent candidates: symmetric about zero, denser near zero.
GAMMA_GRID = (
    -3.0, -2.0, -1.5, -1.0, -0.8, -0.6, -0.5, -0.4, -0.3, -0.2, -0.15,
    -0.1, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8,
    1.0, 1.5, 2.0, 3.0,
)

# Multipliers applied to the parity value of r during the final tuning pass.
TAU_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5)

GAMMA_BOUND = 3.0


def pc_weights(K, gamma):
    """Per-component penalty weights for component indices 1..K.

    ``k**gamma`` for nonnegative gamma, ``(K+1-k)**(-gamma)`` otherwise,
    so the two signs produce mirror-image weight profiles.
    """
    if K < 1:
        raise ValidationError(f"need at least one component, got K={K}")
    k = np.arange(1, K + 1, dtype=np.float64)
    if gamma >= 0:
        return k ** gamma
    return (K + 1 - k) ** (-gamma)


def harmonic_number(K, order):
    """Generalized harmonic number: sum of k**(-order) for k = 1..K.

    Direct summation with exact (fsum) accumulation; K is at most a few
    hundred in practice so no asymptotic expansion is needed.
    """
    if K < 1:
        raise ValidationError(f"need K >= 1, got {K}")
    return fsum(k ** (-order) for k in range(1, K + 1))


def information_parity_r(K, V, gamma):
    """Voxel rescaling exponent that equalizes the prior Fisher information
    of the component block and the voxel block.

    Computed as ``-log(H) / (2 log V) + 1/2`` with H the generalized
    harmonic number of order ``2*|gamma|``; even in gamma by construction.
    """
    if K < 1:
        raise ValidationError(f"need K >= 1, got {K}")
    if V < 2:
        raise ValidationError(f"need V >= 2 for a meaningful voxel block, got {V}")
    h = harmonic_number(K, 2.0 * abs(gamma))
    return -log(h) / (2.0 * log(V)) + 0.5


def joint_weights(K, V, gamma, r):
    """Concatenated penalty weights: ranked component block then a flat
    voxel block at ``V**r``."""
    if V < 1:
        raise ValidationError(f"need V >= 1 voxels, got {V}")
    w_pc = pc_weights(K, gamma)
    w_vox = np.full(V, float(V) ** r)
    return np.concatenate([w_pc, w_vox])


def normalize_weights(w):
    """Rescale positive weights so they sum to their own length.

    Leaves ratios between entries intact; matches the convention of
    normalizing penalty factors to sum to the number of variables.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a nonempty 1-d vector")
    if not np.all(w > 0):
        raise ValidationError("weights must be strictly positive")
    return w * (w.size / np.sum(w))


@dataclass(frozen=True)
class PenaltySpec:
    """A fully resolved penalty configuration.

    ``weights`` is the normalized length-(K+V) vector (length K when
    V == 0, i.e. component-only models).
    """

    gamma: float
    K: int
    V: int
    r: float
    tau: float
    weights: np.ndarray

    def __post_init__(self):
        if abs(self.gamma) > GAMMA_BOUND:
            raise ValidationError(
                f"gamma {self.gamma} outside [-{GAMMA_BOUND}, {GAMMA_BOUND}]"
            )
        if self.weights.size != self.K + self.V:
            raise ValidationError("weight vector length must equal K + V")
        if not np.all(self.weights > 0):
            raise ValidationError("penalty weights must be strictly positive")
        total = float(np.sum(self.weights))
        if abs(total - (self.K + self.V)) > 1e-9 * max(1.0, self.K + self.V):
            raise ValidationError("penalty weights must be normalized to sum to K+V")


def make_penalty_spec(K, V, gamma, tau=1.0, r=None):
    """Build a normalized PenaltySpec.

    For V == 0 the spec covers a component-only design. Otherwise ``r``
    defaults to ``tau`` times the information-parity value.
    """
    if V == 0:
        w = normalize_weights(pc_weights(K, gamma))
        return PenaltySpec(gamma=gamma, K=K, V=0, r=0.0, tau=tau, weights=w)
    if r is None:
        r = tau * information_parity_r(K, V, gamma)
    w = normalize_weights(joint_weights(K, V, gamma, r))
    return PenaltySpec(gamma=gamma, K=K, V=V, r=r, tau=tau, weights=w)
