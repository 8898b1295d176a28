"""Classification and fit-quality metrics."""

import numpy as np
from scipy.stats import rankdata

from .errors import ValidationError

PROB_CLIP = 1e-10


def _check_binary(y):
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ValidationError("labels must be a nonempty 1-d vector")
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("labels must be 0/1")
    return y.astype(np.float64)


def binomial_deviance(y, p):
    """Mean binomial deviance: -2/n times the Bernoulli log-likelihood.

    Probabilities are clipped to [1e-10, 1 - 1e-10] so that perfectly
    confident predictions yield a finite value.
    """
    y = _check_binary(y)
    p = np.asarray(p, dtype=np.float64)
    if p.shape != y.shape:
        raise ValidationError(f"length mismatch: {y.size} labels, {p.size} probabilities")
    p = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(-2.0 * np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def null_deviance(y):
    """Deviance of the constant model that predicts the base rate."""
    y = _check_binary(y)
    ybar = float(np.mean(y))
    ybar = min(max(ybar, PROB_CLIP), 1.0 - PROB_CLIP)
    return float(2.0 * (-ybar * np.log(ybar) - (1.0 - ybar) * np.log1p(-ybar)))


def auc(y, scores):
    """Area under the ROC curve via the rank (Mann-Whitney) statistic.

    Ties contribute one half. Requires both classes present.
    """
    y = _check_binary(y)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != y.shape:
        raise ValidationError("labels and scores must have equal length")
    n1 = int(np.sum(y))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise ValidationError("AUC requires both classes present")
    ranks = rankdata(scores, method="average")
    r1 = float(np.sum(ranks[y == 1]))
    return (r1 - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def deviance_r2(cvd_model, cvd_null):
    """Proportion of baseline deviance explained: 1 - model/null.

    Negative when the model does worse than the baseline.
    """
    if cvd_null <= 0:
        raise ValidationError(f"baseline deviance must be positive, got {cvd_null}")
    return 1.0 - cvd_model / cvd_null


def percent_change_vs_reference(value, reference, higher_is_better=True):
    """Relative improvement over a reference value, in percent.

    Positive output always means improvement; for lower-is-better metrics
    (deviance) the sign is flipped accordingly.
    """
    if reference == 0:
        raise ValidationError("reference value must be nonzero")
    change = 100.0 * (value - reference) / abs(reference)
    return change if higher_is_better else -change
