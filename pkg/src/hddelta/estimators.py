"""Lasso, conservative lasso, nodewise precision, debiased lasso and OLS.

All estimators follow the scaling

    (1/n) ||y - X b||_2^2 + 2 * lam * sum_j w_j |b_j|

so the orthonormal-design solution is the plain soft threshold
``sign(rho) * max(|rho| - lam, 0)`` with ``rho = x_j'y / n``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._cd import cd_gram
from .exceptions import DegenerateError, DimensionError, DomainError, RankError

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 10_000
# nodewise fits run tighter so the diagonal identity of Theta_hat @ Gram holds to ~1e-12
NODEWISE_TOL = 1e-13
TAU2_FLOOR = 1e-10


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``X`` (n x p, rows are observations), response ``y``."""

    X: np.ndarray
    y: np.ndarray
    beta_true: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise DimensionError(f"X must be 2-d, got shape {X.shape}")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DimensionError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise DimensionError(f"y has length {y.shape[0]}, X has {n} rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DomainError("X and y must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.beta_true is not None:
            b = np.asarray(self.beta_true, dtype=float).ravel()
            if b.shape[0] != p:
                raise DimensionError(f"beta_true has length {b.shape[0]}, expected {p}")
            object.__setattr__(self, "beta_true", b)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def gram(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X'X/n, X'y/n)``."""
        n = self.n
        return self.X.T @ self.X / n, self.X.T @ self.y / n


@dataclass
class Estimate:
    beta_hat: np.ndarray
    lam: float
    sigma2_hat: float
    iterations: int = 0
    converged: bool = True
    method: str = "lasso"
    weights: Optional[np.ndarray] = None
    objective_trace: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta_hat)

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "beta_hat": self.beta_hat.tolist(),
            "support": self.support.tolist(),
            "lambda": self.lam,
            "sigma2_hat": self.sigma2_hat,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        return out


@dataclass
class PrecisionEstimate:
    """Nodewise estimate of the inverse covariance.

    ``gamma[j]`` holds the length-(p-1) coefficients of column j regressed
    on the remaining columns (original order, column j removed).
    """

    Theta_hat: np.ndarray
    tau2: np.ndarray
    lambda_node: np.ndarray
    gamma: list = field(default_factory=list, repr=False)

    @property
    def support_sizes(self) -> np.ndarray:
        return np.array([np.count_nonzero(g) for g in self.gamma], dtype=int)


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _residual_variance(data: Dataset, beta: np.ndarray) -> float:
    r = data.y - data.X @ beta
    return float(r @ r) / data.n


def _penalty(lam: float, weights, p: int) -> np.ndarray:
    if lam < 0 or not np.isfinite(lam):
        raise DomainError(f"lambda must be a finite nonnegative number, got {lam}")
    if weights is None:
        return np.full(p, float(lam))
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape[0] != p:
        raise DimensionError(f"weights have length {w.shape[0]}, expected {p}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("penalty weights must be finite and nonnegative")
    return lam * w


def _solve_gram(G, c, pen, beta0, tol, max_sweeps, track):
    beta = np.zeros(c.shape[0]) if beta0 is None else np.array(beta0, dtype=float)
    trace = np.empty(max_sweeps if track else 0)
    sweeps, converged = cd_gram(G, c, pen, beta, tol, max_sweeps, track, trace)
    return beta, int(sweeps), bool(converged), (trace[:sweeps].copy() if track else None)


def lasso_cd(
    data: Dataset,
    lam: float,
    weights=None,
    *,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    beta_init=None,
    standardize: bool = False,
    track_objective: bool = False,
    gram=None,
) -> Estimate:
    """Weighted lasso by cyclic coordinate descent.

    Parameters
    ----------
    data : Dataset
    lam : float
        Penalty level; the objective is ``(1/n)||y-Xb||^2 + 2 lam sum w_j|b_j|``.
    weights : array-like, optional
        Nonnegative per-coordinate penalty weights (default all ones).
    tol : float
        Stop once a full sweep moves no coordinate by more than ``tol``.
    max_sweeps : int
        Sweep budget. Exhausting it returns ``converged=False``; it does not raise.
    beta_init : array-like, optional
        Warm start.
    standardize : bool
        Fit on columns scaled to unit second moment and map back.
    track_objective : bool
        Record the objective (without the constant ``||y||^2/n``) after every sweep.
    gram : tuple, optional
        Precomputed ``(X'X/n, X'y/n)``.

    Returns
    -------
    Estimate
    """
    p = data.p
    pen = _penalty(lam, weights, p)
    G, c = data.gram() if gram is None else gram
    scale = None
    if standardize:
        d = np.sqrt(np.diag(G))
        scale = np.where(d > 0, d, 1.0)
        G = G / np.outer(scale, scale)
        c = c / scale
        if beta_init is not None:
            beta_init = np.asarray(beta_init, dtype=float) * scale
    beta, sweeps, converged, trace = _solve_gram(
        np.ascontiguousarray(G), np.ascontiguousarray(c), pen, beta_init,
        tol, max_sweeps, track_objective,
    )
    if scale is not None:
        beta = beta / scale
    return Estimate(
        beta_hat=beta,
        lam=float(lam),
        sigma2_hat=_residual_variance(data, beta),
        iterations=sweeps,
        converged=converged,
        method="lasso",
        weights=None if weights is None else np.asarray(weights, dtype=float).ravel(),
        objective_trace=trace,
    )


def lasso_path(data: Dataset, lambdas: Sequence[float], **opts) -> list[Estimate]:
    """Fit the lasso at each ``lambdas`` value, warm-starting in the order given.

    Pass a descending grid for the usual path behaviour.
    """
    gram = opts.pop("gram", None) or data.gram()
    out = []
    beta = None
    for lam in lambdas:
        est = lasso_cd(data, lam, beta_init=beta, gram=gram, **opts)
        beta = est.beta_hat
        out.append(est)
    return out


def conservative_weights(beta_stage1, lam: float) -> np.ndarray:
    """``w_j = lam / max(|b_j|, lam)``; always in (0, 1] for ``lam > 0``."""
    return lam / np.maximum(np.abs(np.asarray(beta_stage1, dtype=float)), lam)


def conservative_lasso(data: Dataset, lam: float, *, lam_stage2: Optional[float] = None,
                       **opts) -> Estimate:
    """Two-stage conservative lasso.

    Stage one is the plain lasso at ``lam``. Stage two reruns it with
    weights ``lam / max(|b_j|, lam)`` at ``lam_stage2`` (defaults to ``lam``).
    """
    if not lam > 0:
        raise DomainError(f"conservative lasso needs lambda > 0, got {lam}")
    lam2 = lam if lam_stage2 is None else float(lam_stage2)
    gram = opts.pop("gram", None) or data.gram()
    stage1 = lasso_cd(data, lam, gram=gram, **opts)
    w = conservative_weights(stage1.beta_hat, lam)
    stage2 = lasso_cd(data, lam2, w, gram=gram, beta_init=stage1.beta_hat, **opts)
    stage2.method = "conservative_lasso"
    stage2.iterations += stage1.iterations
    stage2.converged = stage1.converged and stage2.converged
    return stage2


def default_lambda_node(n: int, p: int) -> float:
    return float(np.sqrt(np.log(p) / n))


def nodewise_precision(X, lambda_node=None, *, tol: float = NODEWISE_TOL,
                       max_sweeps: int = DEFAULT_MAX_SWEEPS, threads: int = 1
                       ) -> PrecisionEstimate:
    """Approximate inverse of ``X'X/n`` by p lasso regressions of each column on the rest.

    Row j of the result is ``(e_j - gamma_j) / tau2_j`` with
    ``tau2_j = ||x_j - X_{-j} gamma_j||^2 / n + lam_j ||gamma_j||_1``.
    Raises ``DegenerateError`` when some ``tau2_j`` falls to 1e-10 or below.
    """
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    if X.ndim != 2:
        raise DimensionError("X must be 2-d")
    n, p = X.shape
    if p < 2:
        raise DimensionError(f"nodewise regression needs p >= 2, got {p}")
    if lambda_node is None:
        lambda_node = default_lambda_node(n, p)
    lam = np.broadcast_to(np.asarray(lambda_node, dtype=float), (p,)).copy()
    if np.any(lam < 0):
        raise DomainError("nodewise penalties must be nonnegative")
    G = X.T @ X / n

    def fit(j):
        idx = np.r_[0:j, j + 1:p]
        Gs = np.ascontiguousarray(G[np.ix_(idx, idx)])
        cs = np.ascontiguousarray(G[idx, j])
        gamma, _, converged, _ = _solve_gram(Gs, cs, np.full(p - 1, lam[j]), None,
                                             tol, max_sweeps, False)
        r = X[:, j] - X[:, idx] @ gamma
        tau2 = float(r @ r) / n + lam[j] * float(np.abs(gamma).sum())
        return idx, gamma, tau2

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            fits = list(ex.map(fit, range(p)))
    else:
        fits = [fit(j) for j in range(p)]

    Theta = np.zeros((p, p))
    tau2 = np.empty(p)
    gammas = []
    for j, (idx, gamma, t2) in enumerate(fits):
        if t2 <= TAU2_FLOOR:
            raise DegenerateError(
                f"nodewise residual scale tau2[{j}] = {t2:.3e} is degenerate "
                "(constant or collinear column)")
        Theta[j, j] = 1.0
        Theta[j, idx] = -gamma
        Theta[j] /= t2
        tau2[j] = t2
        gammas.append(gamma)
    return PrecisionEstimate(Theta_hat=Theta, tau2=tau2, lambda_node=lam, gamma=gammas)


def debias_dcl(data: Dataset, beta_cl: Estimate, prec) -> Estimate:
    """One-step correction ``b = beta + Theta X'(y - X beta) / n``.

    ``prec`` may be a ``PrecisionEstimate`` or a plain p x p array.
    """
    Theta = prec.Theta_hat if isinstance(prec, PrecisionEstimate) else np.asarray(prec, float)
    beta = np.asarray(beta_cl.beta_hat if isinstance(beta_cl, Estimate) else beta_cl, float)
    p = data.p
    if Theta.shape != (p, p) or beta.shape != (p,):
        raise DimensionError(
            f"expected Theta {(p, p)} and beta ({p},), got {Theta.shape} and {beta.shape}")
    r = data.y - data.X @ beta
    b = beta + Theta @ (data.X.T @ r) / data.n
    return Estimate(
        beta_hat=b,
        lam=beta_cl.lam if isinstance(beta_cl, Estimate) else 0.0,
        sigma2_hat=_residual_variance(data, b),
        method="dcl",
    )


def ols(data: Dataset) -> Estimate:
    """Least squares; raises ``RankError`` unless X has full column rank p < n."""
    if data.p >= data.n:
        raise RankError(f"OLS needs p < n, got p={data.p}, n={data.n}")
    beta, _, rank, _ = np.linalg.lstsq(data.X, data.y, rcond=None)
    if rank < data.p:
        raise RankError(f"design has rank {rank} < p={data.p}")
    return Estimate(beta_hat=beta, lam=0.0, sigma2_hat=_residual_variance(data, beta),
                    method="ols")
