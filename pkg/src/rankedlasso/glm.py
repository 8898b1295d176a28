"""Penalized logistic regression with per-feature penalty factors.

The solver minimizes, over intercept ``b0`` and coefficients ``beta``,

    (1/n) * sum_i [log(1 + exp(eta_i)) - y_i * eta_i]
        + lam * sum_j w_j * (alpha * |beta_j| + (1 - alpha)/2 * beta_j**2)

with ``eta = b0 + Z @ beta``. Columns are standardized internally to mean
zero and unit L2 norm before penalization and coefficients are transformed
back to the caller's scale on return, so the penalty acts uniformly across
predictors regardless of their units. The intercept is never penalized.

Algorithm: outer iteratively reweighted least squares (quadratic
approximation of the binomial log-likelihood at the current iterate) with
inner cyclic coordinate descent over an active set, plus a step-halving
line search that makes every outer iteration decrease the true penalized
objective. A fit is accepted only once the exact KKT stationarity residual
drops below tolerance, so every returned solution carries its own
optimality certificate.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, ValidationError
from .metrics import binomial_deviance

ALPHA_FLOOR = 1e-3   # keeps the path start finite as alpha -> 0
PROB_CLIP = 1e-10
IRLS_PMIN = 1e-5     # probability clamp inside the quadratic approximation


@dataclass
class GlmProblem:
    """Design matrix, binary labels, normalized penalty factors, and the
    elastic-net mixing parameter (1 = pure L1)."""

    Z: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        self.Z = np.asarray(self.Z, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.Z.ndim != 2:
            raise ValidationError("design must be an n x p matrix")
        n, p = self.Z.shape
        if self.y.shape != (n,):
            raise ValidationError("labels must align with design rows")
        if not np.isin(self.y, (0.0, 1.0)).all():
            raise ValidationError("labels must be 0/1")
        if self.y.min() == self.y.max():
            raise ValidationError("labels contain a single class")
        if not np.all(np.isfinite(self.Z)):
            raise ValidationError("design contains non-finite entries")
        if self.weights.shape != (p,):
            raise ValidationError("need one penalty weight per feature")
        if not np.all(self.weights > 0):
            raise ValidationError("penalty weights must be strictly positive")
        if abs(float(np.sum(self.weights)) - p) > 1e-9 * max(1.0, p):
            raise ValidationError("penalty weights must be normalized to sum to p")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def p(self):
        return self.Z.shape[1]


@dataclass
class GlmPath:
    """Solutions along a decreasing penalty sequence (caller scale)."""

    lambdas: np.ndarray
    intercepts: np.ndarray
    coefs: np.ndarray       # shape (len(lambdas), p)
    deviances: np.ndarray   # training deviance per lambda
    nnz: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.lambdas) >= 0):
            raise ValidationError("lambda sequence must be strictly decreasing")
        if not np.all(np.isfinite(self.deviances)):
            raise ValidationError("path deviances must be finite")


def _standardize_design(Z):
    """Center columns and scale to unit L2 norm; constant columns become
    exactly zero with scale 1 so they can never be selected."""
    n = Z.shape[0]
    mean = Z.mean(axis=0)
    Zc = Z - mean
    norms = np.sqrt(np.einsum("ij,ij->j", Zc, Zc))
    constant = norms <= 1e-10 * np.sqrt(n) * (np.abs(mean) + 1.0)
    scale = np.where(constant, 1.0, norms)
    Zs = Zc / scale
    if constant.any():
        Zs[:, constant] = 0.0
    return np.asfortranarray(Zs), mean, scale


@njit(cache=True, nogil=True)
def _log1pexp(x):
    if x > 35.0:
        return x
    if x < -35.0:
        return np.exp(x)
    return np.log1p(np.exp(x))


@njit(cache=True, nogil=True)
def _objective(eta, y, beta, pen_l1, pen_l2):
    n = eta.shape[0]
    acc = 0.0
    for i in range(n):
        acc += _log1pexp(eta[i]) - y[i] * eta[i]
    acc /= n
    for j in range(beta.shape[0]):
        bj = beta[j]
        if bj != 0.0:
            acc += pen_l1[j] * abs(bj) + 0.5 * pen_l2[j] * bj * bj
    return acc


@njit(cache=True, nogil=True)
def _kkt_residual(Zs, y, eta, beta, pen_l1, pen_l2):
    """Max stationarity violation of the penalized objective at (eta, beta),
    including the unpenalized intercept coordinate."""
    n, p = Zs.shape
    resid = np.empty(n)
    mean_res = 0.0
    for i in range(n):
        pi = 1.0 / (1.0 + np.exp(-eta[i]))
        resid[i] = pi - y[i]
        mean_res += resid[i]
    worst = abs(mean_res / n)
    for j in range(p):
        g = 0.0
        for i in range(n):
            g += Zs[i, j] * resid[i]
        g /= n
        bj = beta[j]
        if bj != 0.0:
            s = 1.0 if bj > 0.0 else -1.0
            v = abs(g + pen_l2[j] * bj + pen_l1[j] * s)
        else:
            v = abs(g) - pen_l1[j]
            if v < 0.0:
                v = 0.0
        if v > worst:
            worst = v
    return worst


@njit(cache=True, nogil=True)
def _cd_sweep(Zs, v, r, beta, pen_l1, pen_l2, qhat, full, compute_q):
    """One cyclic pass of coordinate descent on the weighted quadratic.

    ``full`` selects all coordinates versus only currently nonzero ones.
    ``qhat[j]`` caches sum_i v_i Zs_ij^2 for the current weights. Returns
    the largest qhat-weighted squared coefficient change of the pass.
    """
    n, p = Zs.shape
    dlx = 0.0
    for j in range(p):
        if not full and beta[j] == 0.0:
            continue
        if compute_q:
            q = 0.0
            for i in range(n):
                q += v[i] * Zs[i, j] * Zs[i, j]
            qhat[j] = q
        q = qhat[j]
        g = 0.0
        for i in range(n):
            g += v[i] * Zs[i, j] * r[i]
        u = g / n + (q / n) * beta[j]
        au = abs(u) - pen_l1[j]
        if au <= 0.0 or q <= 0.0:
            bnew = 0.0
        else:
            bnew = (au if u > 0.0 else -au) / (q / n + pen_l2[j])
        d = bnew - beta[j]
        if d != 0.0:
            for i in range(n):
                r[i] -= Zs[i, j] * d
            beta[j] = bnew
            change = q * d * d
            if change > dlx:
                dlx = change
    return dlx


@njit(cache=True, nogil=True)
def _fit_kernel(Zs, y, pen_l1, pen_l2, beta, b0, cd_tol, max_sweeps,
                max_outer, kkt_tol, obj_hist):
    """Solve the penalized problem at one lambda in standardized space.

    ``beta`` is the warm start and is updated in place. Returns
    (b0, n_outer, kkt, status, sweeps) with status 0 on success.
    """
    n, p = Zs.shape
    eta = np.full(n, b0)
    for j in range(p):
        bj = beta[j]
        if bj != 0.0:
            for i in range(n):
                eta[i] += Zs[i, j] * bj
    obj = _objective(eta, y, beta, pen_l1, pen_l2)
    obj_hist[0] = obj

    v = np.empty(n)
    r = np.empty(n)
    z = np.empty(n)
    qhat = np.zeros(p)
    beta_old = np.empty(p)
    eta_old = np.empty(n)
    beta_try = np.empty(p)
    eta_try = np.empty(n)

    kkt = np.inf
    sweeps = 0
    status = 1
    n_outer = 0
    tol = cd_tol

    for outer in range(max_outer):
        n_outer = outer + 1
        sumv = 0.0
        for i in range(n):
            e = eta[i]
            pi = 1.0 / (1.0 + np.exp(-e))
            if pi < IRLS_PMIN:
                pi = IRLS_PMIN
            elif pi > 1.0 - IRLS_PMIN:
                pi = 1.0 - IRLS_PMIN
            vi = pi * (1.0 - pi)
            v[i] = vi
            r[i] = (y[i] - pi) / vi
            z[i] = e + r[i]
            sumv += vi
        for j in range(p):
            beta_old[j] = beta[j]
        b0_old = b0
        for i in range(n):
            eta_old[i] = eta[i]

        # coordinate descent on the quadratic model: full pass, then
        # active-set passes until stable, repeated until a full pass
        # no longer moves anything
        first = True
        while sweeps < max_sweeps:
            dlx = _cd_sweep(Zs, v, r, beta, pen_l1, pen_l2, qhat, True, first)
            first = False
            # intercept coordinate (unpenalized)
            num = 0.0
            for i in range(n):
                num += v[i] * r[i]
            d0 = num / sumv
            if d0 != 0.0:
                b0 += d0
                for i in range(n):
                    r[i] -= d0
                change = (sumv / n) * d0 * d0
                if change > dlx:
                    dlx = change
            sweeps += 1
            if dlx < tol:
                break
            while sweeps < max_sweeps:
                dlx_a = _cd_sweep(Zs, v, r, beta, pen_l1, pen_l2, qhat, False, False)
                num = 0.0
                for i in range(n):
                    num += v[i] * r[i]
                d0 = num / sumv
                if d0 != 0.0:
                    b0 += d0
                    for i in range(n):
                        r[i] -= d0
                    change = (sumv / n) * d0 * d0
                    if change > dlx_a:
                        dlx_a = change
                sweeps += 1
                if dlx_a < tol:
                    break

        # candidate iterate; eta recovered from the fixed working response
        for i in range(n):
            eta_try[i] = z[i] - r[i]
        for j in range(p):
            beta_try[j] = beta[j]
        b0_try = b0

        # step-halving keeps the true objective nonincreasing
        t = 1.0
        stalled = False
        while True:
            obj_new = _objective(eta_try, y, beta_try, pen_l1, pen_l2)
            if obj_new <= obj + 1e-12 * (1.0 + abs(obj)):
                break
            t *= 0.5
            if t < 1e-12:
                stalled = True
                break
            for j in range(p):
                beta_try[j] = beta_old[j] + t * (beta[j] - beta_old[j])
            b0_try = b0_old + t * (b0 - b0_old)
            for i in range(n):
                eta_try[i] = eta_old[i] + t * (eta[i] - eta_old[i])

        if stalled:
            for j in range(p):
                beta[j] = beta_old[j]
            b0 = b0_old
            for i in range(n):
                eta[i] = eta_old[i]
            obj_hist[outer + 1] = obj
        else:
            for j in range(p):
                beta[j] = beta_try[j]
            b0 = b0_try
            for i in range(n):
                eta[i] = eta_try[i]
            obj = obj_new
            obj_hist[outer + 1] = obj

        kkt = _kkt_residual(Zs, y, eta, beta, pen_l1, pen_l2)
        if kkt <= kkt_tol:
            status = 0
            break

        moved = 0.0
        for i in range(n):
            dm = abs(eta[i] - eta_old[i])
            if dm > moved:
                moved = dm
        if stalled or moved < 1e-10:
            # quadratic steps have flattened out but stationarity has not
            # been certified: demand more accuracy from the inner solver
            tol *= 1e-2
            if tol < 1e-16:
                break
        if sweeps >= max_sweeps:
            break

    return b0, n_outer, kkt, status, sweeps


def lambda_path(problem, n_lambda=100, ratio=None):
    """Log-spaced penalty sequence from the smallest all-zero lambda down.

    The start is max_j |<z_j, y - ybar>| / (n * max(alpha, 1e-3) * w_j)
    over standardized columns, at which every penalized coefficient is
    zero. ``ratio`` defaults to 1e-2 when n < p and 1e-4 otherwise.
    """
    if n_lambda < 2:
        raise ValidationError("need at least two lambda values")
    if ratio is None:
        ratio = 1e-2 if problem.n < problem.p else 1e-4
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"ratio must lie in (0, 1), got {ratio}")
    Zs, _, _ = _standardize_design(problem.Z)
    resid = problem.y - problem.y.mean()
    inner = np.abs(Zs.T @ resid)
    denom = problem.n * max(problem.alpha, ALPHA_FLOOR) * problem.weights
    lam_max = float(np.max(inner / denom))
    if lam_max <= 0.0:
        raise ValidationError("design is orthogonal to the centered labels")
    # nudge up by one part in 1e12 so the all-zero solution is exact at the start
    lam_max *= 1.0 + 1e-12
    return np.geomspace(lam_max, lam_max * ratio, n_lambda)


def _solve_std(Zs, y, weights, alpha, lam, beta_std, b0, *, cd_tol, kkt_tol,
               max_outer, max_sweeps, objective_history=None):
    pen_l1 = lam * alpha * weights
    pen_l2 = lam * (1.0 - alpha) * weights
    obj_hist = np.full(max_outer + 1, np.nan)
    b0, n_outer, kkt, status, _ = _fit_kernel(
        Zs, y, pen_l1, pen_l2, beta_std, b0, cd_tol, max_sweeps,
        max_outer, kkt_tol, obj_hist,
    )
    if objective_history is not None:
        objective_history.append(obj_hist[: n_outer + 1].copy())
    return b0, kkt, status


def _back_transform(b0_std, beta_std, mean, scale):
    coef = beta_std / scale
    return b0_std - float(mean @ coef), coef


def fit_at_lambda(problem, lam, warm_start=None, *, cd_tol=1e-7, kkt_tol=1e-6,
                  max_outer=200, max_sweeps=100_000, objective_history=None):
    """Fit at a single penalty value; returns (intercept, coefficients) on
    the caller's scale.

    ``warm_start`` may carry (intercept, coefficients) from a nearby
    lambda. Raises ConvergenceError, with the last iterate attached, if
    the KKT residual cannot be brought below ``kkt_tol``.
    """
    if lam < 0:
        raise ValidationError(f"lambda must be nonnegative, got {lam}")
    Zs, mean, scale = _standardize_design(problem.Z)
    if warm_start is None:
        beta_std = np.zeros(problem.p)
        ybar = problem.y.mean()
        b0 = float(np.log(ybar / (1.0 - ybar)))
    else:
        b0_caller, coef = warm_start
        coef = np.asarray(coef, dtype=np.float64)
        beta_std = coef * scale
        b0 = float(b0_caller) + float(mean @ coef)
    b0, kkt, status = _solve_std(
        Zs, problem.y, problem.weights, problem.alpha, lam, beta_std, b0,
        cd_tol=cd_tol, kkt_tol=kkt_tol, max_outer=max_outer,
        max_sweeps=max_sweeps, objective_history=objective_history,
    )
    intercept, coef = _back_transform(b0, beta_std, mean, scale)
    if status != 0:
        raise ConvergenceError(
            f"no KKT certificate at lambda={lam:g}: residual {kkt:.3e} "
            f"exceeds tolerance {kkt_tol:g}",
            intercept=intercept, coef=coef, kkt_violation=kkt,
        )
    return intercept, coef


def fit_path(problem, lambdas=None, n_lambda=100, ratio=None, *, cd_tol=1e-7,
             kkt_tol=1e-6, max_outer=200, max_sweeps=100_000):
    """Fit the full regularization path with warm starts.

    Standardization happens once; each solution seeds the next smaller
    lambda. Supplying ``lambdas`` overrides the automatic sequence.
    """
    if lambdas is None:
        lambdas = lambda_path(problem, n_lambda=n_lambda, ratio=ratio)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    Zs, mean, scale = _standardize_design(problem.Z)
    y = problem.y
    ybar = y.mean()
    beta_std = np.zeros(problem.p)
    b0 = float(np.log(ybar / (1.0 - ybar)))

    L = lambdas.size
    intercepts = np.empty(L)
    coefs = np.empty((L, problem.p))
    deviances = np.empty(L)
    nnz = np.empty(L, dtype=np.int64)
    for idx, lam in enumerate(lambdas):
        b0, kkt, status = _solve_std(
            Zs, y, problem.weights, problem.alpha, float(lam), beta_std, b0,
            cd_tol=cd_tol, kkt_tol=kkt_tol, max_outer=max_outer,
            max_sweeps=max_sweeps,
        )
        if status != 0:
            intercept, coef = _back_transform(b0, beta_std, mean, scale)
            raise ConvergenceError(
                f"path fit failed at lambda index {idx} (lambda={lam:g}), "
                f"KKT residual {kkt:.3e}",
                intercept=intercept, coef=coef, kkt_violation=kkt,
            )
        intercepts[idx], coefs[idx] = _back_transform(b0, beta_std, mean, scale)
        eta = intercepts[idx] + problem.Z @ coefs[idx]
        deviances[idx] = binomial_deviance(y, _sigmoid(eta))
        nnz[idx] = int(np.count_nonzero(beta_std))
    return GlmPath(lambdas=lambdas, intercepts=intercepts, coefs=coefs,
                   deviances=deviances, nnz=nnz)


def _sigmoid(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def predict_prob(intercept, coefficients, Z):
    """Class-1 probabilities, clipped to [1e-10, 1 - 1e-10] so downstream
    deviance evaluation stays finite."""
    Z = np.asarray(Z, dtype=np.float64)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[None, :]
    if Z.shape[1] != coefficients.shape[0]:
        raise ValidationError(
            f"design has {Z.shape[1]} columns but got {coefficients.shape[0]} coefficients"
        )
    eta = intercept + Z @ coefficients
    return np.clip(_sigmoid(eta), PROB_CLIP, 1.0 - PROB_CLIP)


def kkt_violation(problem, lam, intercept, coef):
    """Stationarity certificate for a fitted point, in standardized space.

    Returns the largest violation across all coordinates (features and
    intercept); a correct fit at tolerance t satisfies value <= t.
    """
    Zs, mean, scale = _standardize_design(problem.Z)
    coef = np.asarray(coef, dtype=np.float64)
    beta_std = coef * scale
    b0_std = float(intercept) + float(mean @ coef)
    eta = b0_std + Zs @ beta_std
    pen_l1 = lam * problem.alpha * problem.weights
    pen_l2 = lam * (1.0 - problem.alpha) * problem.weights
    return float(_kkt_residual(Zs, problem.y, eta, beta_std, pen_l1, pen_l2))
