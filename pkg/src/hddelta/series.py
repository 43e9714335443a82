"""Power-series regression and the pointwise bound |h(x0)'(b - b*)| <= zeta(p) ||b - b*||_2."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimators import Dataset, Estimate, ols
from .exceptions import DimensionError, DomainError

DEFAULT_GRID = 1001
N_ORACLE = 100_000

TEST_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin2x": lambda x: np.sin(2.0 * x),
    "linear": lambda x: 1.0 + 2.0 * x,
    "cubic": lambda x: x ** 3 - x,
    "exp": np.exp,
}


@dataclass(frozen=True)
class BasisSpec:
    p: int
    a: float = -1.0
    b: float = 1.0
    kind: str = "power"

    def __post_init__(self):
        if self.kind != "power":
            raise ValueError(f"unsupported basis {self.kind!r}")
        if self.p < 1:
            raise DomainError("basis needs p >= 1")
        if not self.a < self.b:
            raise DomainError(f"empty domain [{self.a}, {self.b}]")

    def to_unit(self, x):
        return (2.0 * np.asarray(x, dtype=float) - self.a - self.b) / (self.b - self.a)

    def grid(self, size: int = DEFAULT_GRID) -> np.ndarray:
        return np.linspace(self.a, self.b, size)


def basis_eval(spec: BasisSpec, x) -> np.ndarray:
    """``(1, t, ..., t^{p-1})`` with t the image of x in [-1, 1]; rows for array input."""
    x = np.asarray(x, dtype=float)
    span = spec.b - spec.a
    if np.any(x < spec.a - 1e-12 * span) or np.any(x > spec.b + 1e-12 * span):
        raise DomainError(f"x outside [{spec.a}, {spec.b}]")
    t = np.clip(spec.to_unit(x), -1.0, 1.0)
    return t[..., None] ** np.arange(spec.p)


def zeta(spec: BasisSpec, grid_size: int = DEFAULT_GRID) -> float:
    """Max over a uniform grid of ``||h(x)||_2``."""
    if grid_size < 2:
        raise DomainError("grid_size must be >= 2")
    H = basis_eval(spec, spec.grid(grid_size))
    return float(np.sqrt((H * H).sum(axis=1)).max())


def fit_series(x, y, spec: BasisSpec) -> Estimate:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise DimensionError("x and y differ in length")
    est = ols(Dataset(basis_eval(spec, x), y))
    est.method = "series"
    return est


def pseudo_true(g: Callable, spec: BasisSpec, n_oracle: int = N_ORACLE) -> np.ndarray:
    """L2 proxy for the best sup-norm approximation: OLS on noiseless values over a fine grid."""
    x = spec.grid(n_oracle)
    return ols(Dataset(basis_eval(spec, x), g(x))).beta_hat


def predict_error_bound(estimate, beta_pseudo, x0, spec: BasisSpec,
                        grid_size: int = DEFAULT_GRID) -> float:
    """Return ``zeta(p) ||b - b*||_2`` after checking it dominates ``|h(x0)'(b - b*)|``.

    ``x0`` may be a scalar or an array of points; every point is checked.
    """
    b = estimate.beta_hat if isinstance(estimate, Estimate) else np.asarray(estimate, float)
    d = b - np.asarray(beta_pseudo, dtype=float)
    bound = zeta(spec, grid_size) * float(np.linalg.norm(d))
    err = np.abs(np.atleast_2d(basis_eval(spec, x0)) @ d)
    if np.any(err > bound * (1 + 1e-12) + 1e-15):
        raise ArithmeticError("pointwise error exceeds zeta(p) * ||b - b*||_2")
    return bound


def sup_grid_error(beta, g: Callable, spec: BasisSpec, grid_size: int = DEFAULT_GRID) -> float:
    x = spec.grid(grid_size)
    return float(np.abs(basis_eval(spec, x) @ np.asarray(beta, float) - g(x)).max())


def series_report(function: str = "sin2x", n: int = 2000, p: int = 8, noise_sd: float = 0.1,
                  seed: int = 0, a: float = -1.0, b: float = 1.0,
                  grid_size: int = DEFAULT_GRID) -> dict:
    if function not in TEST_FUNCTIONS:
        raise DomainError(f"unknown function {function!r}; choose from {sorted(TEST_FUNCTIONS)}")
    g = TEST_FUNCTIONS[function]
    spec = BasisSpec(p=p, a=a, b=b)
    rng = np.random.default_rng(seed)
    x = rng.uniform(a, b, n)
    y = g(x) + noise_sd * rng.standard_normal(n)
    est = fit_series(x, y, spec)
    beta_star = pseudo_true(g, spec)
    grid = spec.grid(grid_size)
    bound = predict_error_bound(est, beta_star, grid, spec, grid_size)
    diff = basis_eval(spec, grid) @ (est.beta_hat - beta_star)
    return {
        "function": function, "n": n, "p": p, "noise_sd": noise_sd, "seed": seed,
        "domain": [a, b],
        "zeta": zeta(spec, grid_size),
        "beta_hat": est.beta_hat.tolist(),
        "beta_pseudo": beta_star.tolist(),
        "coef_error_l2": float(np.linalg.norm(est.beta_hat - beta_star)),
        "pointwise_bound": bound,
        "max_pointwise_error": float(np.abs(diff).max()),
        "bound_holds": True,
        "sup_error_vs_truth": sup_grid_error(est.beta_hat, g, spec, grid_size),
        "pseudo_true_approx_error": sup_grid_error(beta_star, g, spec, grid_size),
        "sigma2_hat": est.sigma2_hat,
    }
