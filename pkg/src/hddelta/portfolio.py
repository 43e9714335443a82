"""Global-minimum-variance weights and bounds on out-of-sample variance error."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bound import BoundReport, slack
from .estimators import PrecisionEstimate, nodewise_precision
from .exceptions import DegenerateError, DimensionError, DomainError
from .norms import NormKind, mat_norm


@dataclass
class PortfolioInstance:
    Sigma: np.ndarray
    w: np.ndarray
    returns: Optional[np.ndarray] = None

    def __post_init__(self):
        self.Sigma = np.asarray(self.Sigma, dtype=float)
        self.w = np.asarray(self.w, dtype=float).ravel()
        p = self.w.shape[0]
        if self.Sigma.shape != (p, p):
            raise DimensionError(f"Sigma has shape {self.Sigma.shape}, w has length {p}")
        if not np.allclose(self.Sigma, self.Sigma.T, rtol=0, atol=1e-12):
            raise DomainError("Sigma must be symmetric")
        if abs(self.w.sum() - 1.0) > 1e-10:
            raise DomainError(f"weights sum to {self.w.sum()}, not 1")
        if self.returns is not None:
            self.returns = np.asarray(self.returns, dtype=float)
            if self.returns.ndim != 2 or self.returns.shape[1] != p:
                raise DimensionError("returns must be n x p")


def _square(Sigma) -> np.ndarray:
    S = np.asarray(Sigma, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.size == 0:
        raise DimensionError(f"expected a nonempty square matrix, got shape {S.shape}")
    return S


def gmv_weights(Theta) -> np.ndarray:
    """``Theta 1 / (1' Theta 1)``, renormalised so the weights sum to exactly one."""
    Theta = _square(Theta)
    p = Theta.shape[0]
    ones = np.ones(p)
    num = Theta @ ones / p
    den = ones @ Theta @ ones / p
    if abs(den * p) <= 1e-10 * p:
        raise DegenerateError(f"1'Theta 1 = {den * p:.3e} is too close to zero")
    w = num / den
    return w / w.sum()


def oos_variance(w_hat, Sigma) -> float:
    w = np.asarray(w_hat, dtype=float).ravel()
    S = _square(Sigma)
    if S.shape[0] != w.shape[0]:
        raise DimensionError("weights and covariance do not conform")
    return max(float(w @ S @ w), 0.0)


def _prep(w_hat, w, Sigma):
    S = _square(Sigma)
    w_hat = np.asarray(w_hat, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if not (w_hat.shape == w.shape == (S.shape[0],)):
        raise DimensionError("weights and covariance do not conform")
    return w_hat, w, S, w_hat - w


def variance_error_bound_theorem(w_hat, w, Sigma) -> BoundReport:
    """Derivative route in l1: ``2||Sigma w||_1 ||h||_1 + |h'Sigma h|`` with ``h = w_hat - w``.

    The quadratic remainder is kept so the inequality holds for every sample,
    not only asymptotically.
    """
    w_hat, w, S, h = _prep(w_hat, w, Sigma)
    fd_norm = 2.0 * float(np.abs(S @ w).sum())
    est_err = float(np.abs(h).sum())
    actual = abs(float(w_hat @ S @ w_hat - w @ S @ w))
    linear = abs(2.0 * float(w @ S @ h))
    rem = abs(float(h @ S @ h))
    bound = fd_norm * est_err + rem
    eps = slack(bound)
    holds = actual <= linear + rem + eps and linear <= fd_norm * est_err + eps and actual <= bound + eps
    return BoundReport(norm=1, fd_norm=fd_norm, est_err=est_err, actual=actual,
                       linear_term=linear, remainder=rem, bound=bound, holds=bool(holds),
                       route="theorem")


def variance_error_bound_direct(w_hat, w, Sigma) -> BoundReport:
    """Direct Hoelder route: ``||h||_1^2 ||Sigma||_max + 2 ||h||_1 ||Sigma||_max ||w||_1``.

    In the report, ``fd_norm`` is ``2 ||Sigma||_max ||w||_1`` and ``remainder``
    is the bound ``||h||_1^2 ||Sigma||_max`` on the quadratic piece.
    """
    w_hat, w, S, h = _prep(w_hat, w, Sigma)
    smax = mat_norm(S, NormKind.MAX_ABS)
    h1 = float(np.abs(h).sum())
    w1 = float(np.abs(w).sum())
    actual = abs(float(w_hat @ S @ w_hat - w @ S @ w))
    linear = abs(2.0 * float(h @ S @ w))
    quad = abs(float(h @ S @ h))
    fd_norm = 2.0 * smax * w1
    rem = h1 * h1 * smax
    bound = rem + fd_norm * h1
    eps = slack(bound)
    holds = (actual <= quad + linear + eps and quad <= rem + eps
             and linear <= fd_norm * h1 + eps and actual <= bound + eps)
    return BoundReport(norm=1, fd_norm=fd_norm, est_err=h1, actual=actual,
                       linear_term=linear, remainder=rem, bound=bound, holds=bool(holds),
                       route="direct")


def div_measure(Sigma) -> float:
    """Ratio of the max column sum to the max absolute entry; at least 1."""
    S = _square(Sigma)
    top = mat_norm(S, NormKind.MAX_ABS)
    if top == 0.0:
        raise DegenerateError("div is undefined for the zero matrix")
    return mat_norm(S, NormKind.COL_SUM) / top


# --------------------------------------------------------------------------
# vech / duplication
# --------------------------------------------------------------------------

def _vech_index(q: int):
    # lower triangle, column by column
    return [(i, j) for j in range(q) for i in range(j, q)]


def vech(S) -> np.ndarray:
    S = _square(S)
    return np.array([S[i, j] for i, j in _vech_index(S.shape[0])])


def unvech(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    q = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if q * (q + 1) // 2 != v.size:
        raise DimensionError(f"length {v.size} is not triangular")
    S = np.zeros((q, q))
    for k, (i, j) in enumerate(_vech_index(q)):
        S[i, j] = S[j, i] = v[k]
    return S


def duplication_matrix(q: int) -> np.ndarray:
    """The q^2 x q(q+1)/2 matrix with ``vec(S) = D vech(S)`` (column-major vec)."""
    if q < 1:
        raise DomainError("q must be >= 1")
    D = np.zeros((q * q, q * (q + 1) // 2))
    for k, (i, j) in enumerate(_vech_index(q)):
        D[j * q + i, k] = 1.0
        D[i * q + j, k] = 1.0
    return D


def vec(S) -> np.ndarray:
    return np.asarray(S, dtype=float).ravel(order="F")


def vech_fd_norm(w) -> float:
    """Frobenius norm of ``(w' kron w') D_q``, checked against ``sqrt(2)||w||_2^2 <= sqrt(2)||w||_1^2``."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0:
        raise DimensionError("empty weight vector")
    row = np.kron(w, w) @ duplication_matrix(w.size)
    direct = float(np.linalg.norm(row))
    mid = np.sqrt(2.0) * float(w @ w)
    top = np.sqrt(2.0) * float(np.abs(w).sum()) ** 2
    if not (direct <= mid * (1 + 1e-12) + 1e-15 and mid <= top * (1 + 1e-12) + 1e-15):
        raise ArithmeticError(f"vech bound chain violated: {direct} <= {mid} <= {top}")
    return direct


# --------------------------------------------------------------------------
# estimation from returns
# --------------------------------------------------------------------------

def sample_covariance(returns, demean: bool = True) -> np.ndarray:
    R = np.asarray(returns, dtype=float)
    if R.ndim != 2 or R.shape[0] < 2:
        raise DimensionError("returns must be an n x p matrix with n >= 2")
    if demean:
        R = R - R.mean(axis=0)
    return R.T @ R / R.shape[0]


@dataclass
class GMVEstimate:
    w_hat: np.ndarray
    precision: PrecisionEstimate
    Sigma_hat: np.ndarray

    @property
    def gross_exposure(self) -> float:
        return float(np.abs(self.w_hat).sum())

    @property
    def max_row_support(self) -> int:
        # nodewise support plus the diagonal entry
        return int(self.precision.support_sizes.max()) + 1


def estimate_gmv(returns, lambda_node=None, demean: bool = True) -> GMVEstimate:
    """Nodewise-precision GMV weights from an n x p return matrix."""
    R = np.asarray(returns, dtype=float)
    if R.ndim != 2:
        raise DimensionError("returns must be 2-d")
    X = R - R.mean(axis=0) if demean else R
    prec = nodewise_precision(X, lambda_node)
    return GMVEstimate(w_hat=gmv_weights(prec.Theta_hat), precision=prec,
                       Sigma_hat=sample_covariance(R, demean=demean))
