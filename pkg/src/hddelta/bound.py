"""Pathwise evaluation of the bound

    ||f(b) - f(b0)||_q <= |||f_d(b0)|||_q * ||b - b0||_q + ||l(b - b0)||_q

for linear maps, quadratic forms and basis-point evaluations, plus regime
labelling and rate orders.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .exceptions import DimensionError, DomainError
from .norms import mat_norm_q, parse_q, vec_norm_q


# --------------------------------------------------------------------------
# function families
# --------------------------------------------------------------------------

class FunctionSpec:
    """A map R^p -> R^m with an exact derivative and exact remainder."""

    kind = "abstract"
    p: int
    m: int

    def __call__(self, beta) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, beta0) -> np.ndarray:
        raise NotImplementedError

    def remainder(self, h) -> np.ndarray:
        """``f(b0 + h) - f(b0) - f_d(b0) h``, which for these families does not depend on b0."""
        return np.zeros(self.m)

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if v.shape[0] != self.p:
            raise DimensionError(f"{self.kind}: expected length {self.p}, got {v.shape[0]}")
        return v


class Linear(FunctionSpec):
    kind = "linear"

    def __init__(self, D):
        D = np.asarray(D, dtype=float)
        if D.ndim == 1:
            D = D[None, :]
        if D.ndim != 2 or D.size == 0:
            raise DimensionError(f"D must be a nonempty matrix, got shape {D.shape}")
        self.D = D
        self.m, self.p = D.shape

    def __call__(self, beta):
        return self.D @ self._check(beta)

    def derivative(self, beta0):
        self._check(beta0)
        return self.D


class Quadratic(FunctionSpec):
    kind = "quadratic"
    m = 1

    def __init__(self, S, *, sym_tol: float = 1e-12):
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.size == 0:
            raise DimensionError(f"S must be square, got shape {S.shape}")
        scale = max(1.0, float(np.abs(S).max()))
        if not np.allclose(S, S.T, rtol=0, atol=sym_tol * scale):
            raise DomainError("S must be symmetric")
        self.S = S
        self.p = S.shape[0]

    def __call__(self, beta):
        b = self._check(beta)
        return np.array([b @ self.S @ b])

    def derivative(self, beta0):
        return (2.0 * (self.S @ self._check(beta0)))[None, :]

    def remainder(self, h):
        h = self._check(h)
        return np.array([h @ self.S @ h])


class BasisPoint(FunctionSpec):
    """``f(b) = h(x0)'b`` for a fixed basis vector ``h(x0)``."""

    kind = "basis"
    m = 1

    def __init__(self, h):
        h = np.asarray(h, dtype=float).ravel()
        if h.size == 0:
            raise DimensionError("basis vector is empty")
        self.h = h
        self.p = h.shape[0]

    def __call__(self, beta):
        return np.array([self.h @ self._check(beta)])

    def derivative(self, beta0):
        self._check(beta0)
        return self.h[None, :]


def derivative(f: FunctionSpec, beta0) -> np.ndarray:
    return f.derivative(beta0)


# --------------------------------------------------------------------------
# regimes and rates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeSpec:
    C: float
    k_n: float
    d_n: float
    regime: str

    def __post_init__(self):
        if self.regime not in ("a", "b", "c"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if not (self.C > 0 and self.k_n > 0 and self.d_n > 0):
            raise DomainError("C, k_n and d_n must be positive")


def classify_regime(fd_norm: float, C: float, k_n: float = 1.0, d_n: float = 1.0,
                    tol: float = 0.05) -> RegimeSpec:
    """Label ``fd_norm`` as constant (a), growing like ``C k_n`` (b) or shrinking like ``C / d_n`` (c).

    Regime a wins whenever ``fd_norm`` is within a factor ``1 + tol`` of C.
    Otherwise the label goes to whichever of ``C k_n`` and ``C / d_n`` is
    closer on a log scale (ties go to b).
    """
    if not fd_norm > 0:
        raise DomainError(f"derivative norm must be positive, got {fd_norm}")
    if not C > 0:
        raise DomainError(f"C must be positive, got {C}")
    if not (k_n > 0 and d_n > 0):
        raise DomainError("k_n and d_n must be positive")
    dist = lambda target: abs(math.log(fd_norm / target))
    if dist(C) <= math.log1p(tol):
        regime = "a"
    elif dist(C * k_n) <= dist(C / d_n):
        regime = "b"
    else:
        regime = "c"
    return RegimeSpec(C=C, k_n=k_n, d_n=d_n, regime=regime)


@dataclass(frozen=True)
class RateSpec:
    """Named estimator rate ``r_n``.

    ``lasso``:  sqrt(n / log p) / sqrt(s)
    ``gmv``:    sqrt(n / log p) / s**1.5    (s = max row sparsity of the precision matrix)
    ``root_n``: sqrt(n)
    ``series``: 1 / (sqrt(p / n) + p**-alpha)
    ``fixed``:  ``value`` as given
    """

    name: str
    n: int = 0
    p: int = 0
    s: float = 1.0
    alpha: float = 1.0
    value: Optional[float] = None

    def r_n(self) -> float:
        n, p, s = self.n, self.p, self.s
        if self.name == "fixed":
            r = self.value
        elif self.name == "root_n":
            r = math.sqrt(n)
        elif self.name == "lasso":
            r = math.sqrt(n / math.log(p)) / math.sqrt(s)
        elif self.name == "gmv":
            r = math.sqrt(n / math.log(p)) / s ** 1.5
        elif self.name == "series":
            r = 1.0 / (math.sqrt(p / n) + p ** (-self.alpha))
        else:
            raise ValueError(f"unknown rate {self.name!r}")
        if r is None or not r > 0 or not math.isfinite(r):
            raise DomainError(f"rate {self.name} is not a positive number at n={n}, p={p}, s={s}")
        return float(r)


def rate_bound(rate: RateSpec, regime: RegimeSpec) -> float:
    """Order of the bound: 1/r_n (a), k_n/r_n (b), 1/(d_n r_n) (c)."""
    r = rate.r_n()
    if regime.regime == "a":
        return 1.0 / r
    if regime.regime == "b":
        return regime.k_n / r
    return 1.0 / (regime.d_n * r)


# --------------------------------------------------------------------------
# pathwise check
# --------------------------------------------------------------------------

def slack(bound: float) -> float:
    return 1e-9 * (1.0 + abs(bound))


@dataclass
class BoundReport:
    norm: float
    fd_norm: float
    est_err: float
    actual: float
    linear_term: float
    remainder: float
    bound: float
    holds: bool
    regime: Optional[RegimeSpec] = None
    rate_value: Optional[float] = None
    route: str = "theorem"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["norm"] = "inf" if math.isinf(self.norm) else int(self.norm)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def pathwise_check(f: FunctionSpec, beta_hat, beta0, q=2, *,
                   regime: Optional[RegimeSpec] = None,
                   rate: Optional[RateSpec] = None) -> BoundReport:
    """Run the inequality chain numerically for one estimate.

    ``holds`` is true when the triangle step, the compatibility step and
    the final inequality all hold up to ``1e-9 * (1 + bound)``.
    """
    q = parse_q(q)
    beta_hat = f._check(beta_hat)
    beta0 = f._check(beta0)
    h = beta_hat - beta0
    fd = f.derivative(beta0)
    fd_norm = mat_norm_q(fd, q)
    est_err = vec_norm_q(h, q)
    actual = vec_norm_q(f(beta_hat) - f(beta0), q)
    linear_term = vec_norm_q(fd @ h, q)
    remainder = vec_norm_q(f.remainder(h), q)
    bound = fd_norm * est_err + remainder
    eps = slack(bound)
    holds = (actual <= linear_term + remainder + eps
             and linear_term <= fd_norm * est_err + eps
             and actual <= bound + eps)
    rate_value = rate_bound(rate, regime) if (rate is not None and regime is not None) else None
    return BoundReport(norm=q, fd_norm=fd_norm, est_err=est_err, actual=actual,
                       linear_term=linear_term, remainder=remainder, bound=bound,
                       holds=bool(holds), regime=regime, rate_value=rate_value)
