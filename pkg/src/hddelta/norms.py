"""Vector and matrix norms, and numerical checks of ||Ax||_q <= |||A|||_q ||x||_q."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DimensionError


class NormKind(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    COL_SUM = "colsum"        # |||A|||_1, max column sum
    FROBENIUS = "frobenius"   # |||A|||_2
    ROW_SUM = "rowsum"        # |||A|||_inf, max row sum
    MAX_ABS = "maxabs"        # ||A||_inf, entrywise max; not the row-sum norm

    @property
    def is_vector(self) -> bool:
        return self in (NormKind.L1, NormKind.L2, NormKind.LINF)


# q -> (vector norm, compatible matrix norm)
COMPATIBLE = {
    1: (NormKind.L1, NormKind.COL_SUM),
    2: (NormKind.L2, NormKind.FROBENIUS),
    np.inf: (NormKind.LINF, NormKind.ROW_SUM),
}


def parse_q(q) -> float:
    """Accept 1, 2, inf (or the strings "1", "2", "inf")."""
    if isinstance(q, str):
        q = q.strip().lower()
        q = np.inf if q in ("inf", "infinity", "oo") else float(q)
    q = float(q)
    if q not in COMPATIBLE:
        raise ValueError(f"q must be one of 1, 2, inf; got {q}")
    return q


def vec_norm(v, kind=NormKind.L2) -> float:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise DimensionError("norm of an empty vector")
    kind = NormKind(kind)
    a = np.abs(v)
    if kind is NormKind.L1:
        return float(a.sum())
    if kind is NormKind.L2:
        return float(np.sqrt(v @ v))
    if kind is NormKind.LINF:
        return float(a.max())
    raise ValueError(f"{kind.value} is not a vector norm")


def mat_norm(A, kind=NormKind.FROBENIUS) -> float:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"expected a nonempty matrix, got shape {A.shape}")
    kind = NormKind(kind)
    a = np.abs(A)
    if kind is NormKind.FROBENIUS:
        return float(np.sqrt((A * A).sum()))
    if kind is NormKind.COL_SUM:
        return float(a.sum(axis=0).max())
    if kind is NormKind.ROW_SUM:
        return float(a.sum(axis=1).max())
    if kind is NormKind.MAX_ABS:
        return float(a.max())
    raise ValueError(f"{kind.value} is not a matrix norm")


def vec_norm_q(v, q) -> float:
    return vec_norm(v, COMPATIBLE[parse_q(q)][0])


def mat_norm_q(A, q) -> float:
    return mat_norm(A, COMPATIBLE[parse_q(q)][1])


def within(lhs: float, rhs: float, rel: float = 1e-12, abs_: float = 1e-12) -> bool:
    return lhs <= rhs * (1.0 + rel) + abs_


@dataclass(frozen=True)
class CompatibilityReport:
    q: float
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["q"] = "inf" if np.isinf(self.q) else int(self.q)
        return d


def check_compatibility(A, x, q) -> CompatibilityReport:
    """Evaluate both sides of ``||Ax||_q <= |||A|||_q ||x||_q``.

    The matrix norm is column-sum for q=1, Frobenius for q=2 and row-sum
    for q=inf.
    """
    q = parse_q(q)
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[1] != x.shape[0]:
        raise DimensionError(f"A has shape {A.shape}, x has length {x.shape[0]}")
    lhs = vec_norm_q(A @ x, q)
    rhs = mat_norm_q(A, q) * vec_norm_q(x, q)
    return CompatibilityReport(q=q, lhs=lhs, rhs=rhs, holds=within(lhs, rhs))


def random_compatibility_suite(trials: int = 1000, seed: int = 0, max_dim: int = 40) -> dict:
    """Run ``check_compatibility`` on random Gaussian (A, x) for every q.

    Returns ``{q: number_of_violations}`` plus the symmetric-matrix check
    ``|||A|||_2 <= p * max|a_ij|`` under the key ``"symmetric"``.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for q in COMPATIBLE:
        bad = 0
        for _ in range(trials):
            m, p = rng.integers(1, max_dim + 1, size=2)
            A = rng.standard_normal((m, p)) * rng.exponential()
            x = rng.standard_normal(p)
            bad += not check_compatibility(A, x, q).holds
        out["inf" if np.isinf(q) else str(int(q))] = bad
    bad = 0
    for _ in range(trials):
        p = int(rng.integers(1, max_dim + 1))
        B = rng.standard_normal((p, p))
        S = B + B.T
        bad += not within(mat_norm(S, NormKind.FROBENIUS), p * mat_norm(S, NormKind.MAX_ABS))
    out["symmetric"] = bad
    return out
