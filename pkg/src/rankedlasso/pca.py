"""Column standardization and principal-component basis via thin SVD."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class PcaBasis:
    """Centering/scaling vectors plus an orthonormal loading matrix.

    ``loadings`` has one column per retained component, ordered by
    nonincreasing singular value; ``scores = standardize(X) @ loadings``.
    """

    mean: np.ndarray
    scale: np.ndarray
    loadings: np.ndarray
    sing_vals: np.ndarray

    @property
    def n_components(self):
        return self.loadings.shape[1]

    @property
    def n_voxels(self):
        return self.loadings.shape[0]


def _column_stats(X):
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    # Constant columns keep scale 1 so standardization stays finite.
    constant = sd <= 1e-13 * (np.abs(mean) + 1.0)
    scale = np.where(constant, 1.0, sd)
    return mean, scale


def fit_pca(X):
    """Standardize columns (mean 0, sd 1 with n-1 divisor) and extract all
    numerically nonzero principal components.

    Components with singular value below 1e-10 of the largest are dropped;
    no variance-based cutoff is applied. Each loading column is flipped so
    its largest-magnitude entry is positive, which fixes the SVD sign
    ambiguity deterministically.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("expected an n x V matrix")
    n, V = X.shape
    if n < 2:
        raise ValidationError(f"need at least 2 samples to fit a basis, got {n}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("matrix contains non-finite entries")

    mean, scale = _column_stats(X)
    Xs = (X - mean) / scale
    _, s, vt = np.linalg.svd(Xs, full_matrices=False)
    if s[0] <= 0.0:
        raise ValidationError("matrix has no variation after standardization")
    K = int(np.sum(s > RANK_RTOL * s[0]))
    K = min(K, n - 1, V)
    if K < 1:
        raise ValidationError("matrix has rank zero after centering")

    loadings = vt[:K].T.copy()
    flip = loadings[np.argmax(np.abs(loadings), axis=0), np.arange(K)] < 0
    loadings[:, flip] *= -1.0
    return PcaBasis(mean=mean, scale=scale, loadings=loadings, sing_vals=s[:K].copy())


def standardize(basis, X):
    """Apply the basis centering and scaling to rows with V columns."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != basis.n_voxels:
        raise ValidationError(
            f"expected {basis.n_voxels} columns, got {X.shape[1]}"
        )
    return (X - basis.mean) / basis.scale


def transform(basis, X):
    """Project rows into component space: standardize then apply loadings."""
    return standardize(basis, X) @ basis.loadings


def project_to_voxels(basis, beta_pc):
    """Map component-space coefficients back to a voxel-space vector.

    The result satisfies ``transform(basis, X) @ beta_pc ==
    standardize(basis, X) @ project_to_voxels(basis, beta_pc)``.
    """
    beta_pc = np.asarray(beta_pc, dtype=np.float64)
    if beta_pc.shape != (basis.n_components,):
        raise ValidationError(
            f"expected length-{basis.n_components} coefficient vector, got {beta_pc.shape}"
        )
    return basis.loadings @ beta_pc


def explained_variance_ratio(basis):
    sq = basis.sing_vals ** 2
    return sq / np.sum(sq)
