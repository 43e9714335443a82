"""Lasso simulation study: DGP, IC-tuned lambda, and the bound-tightness ratio table."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .estimators import Dataset, lasso_path
from .exceptions import DomainError

DEFAULT_LAMBDA_COEFS = (0.1, 0.25, 0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
SIGMA2_FLOOR = 1e-12

# published averages over 1000 replications, keyed by (n, s0) -> {p: value}
TABLE1 = {
    (100, 5): {50: 5.23, 100: 5.09, 200: 5.04, 300: 5.02},
    (200, 5): {50: 5.20, 100: 5.11, 200: 5.06, 300: 5.05},
    (300, 5): {50: 5.15, 100: 5.08, 200: 5.06, 300: 5.04},
    (100, 10): {50: 10.26, 100: 10.11, 200: 11.64, 300: 13.40},
    (200, 10): {50: 10.45, 100: 10.20, 200: 10.09, 300: 10.07},
    (300, 10): {50: 10.41, 100: 10.22, 200: 10.13, 300: 10.10},
}


class ZeroDenominator(Exception):
    """The restricted error D(b - b0) is exactly zero; the ratio is undefined."""


# --------------------------------------------------------------------------
# random numbers
# --------------------------------------------------------------------------

def replication_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by the master seed and integer labels."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, key)])
    return np.random.Generator(np.random.Philox(ss))


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals from uniform pairs via the Box-Muller transform."""
    m = (size + 1) // 2
    u = rng.random(2 * m)
    u1 = 1.0 - u[:m]  # in (0, 1]
    u2 = u[m:]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:size]


def dgp_sample(n: int, p: int, s0: int, seed: int = 0, *, rng=None) -> Dataset:
    """x_i ~ N(0, I_p), u_i ~ N(0, s0), beta0 = (1_{s0}, 0), y = X beta0 + u."""
    if not 0 < s0 <= p:
        raise DomainError(f"need 0 < s0 <= p, got s0={s0}, p={p}")
    if rng is None:
        rng = replication_rng(seed)
    z = box_muller(rng, n * p + n)
    X = z[: n * p].reshape(n, p)
    u = math.sqrt(s0) * z[n * p:]
    beta0 = np.zeros(p)
    beta0[:s0] = 1.0
    return Dataset(X, X @ beta0 + u, beta0)


# --------------------------------------------------------------------------
# tuning and the ratio statistic
# --------------------------------------------------------------------------

@dataclass
class ICDiagnostics:
    lambdas: list
    coefs: list
    ic: list
    support_sizes: list
    sigma2: list
    floored: list
    selected_index: int


def information_criterion(sigma2: float, s_hat: int, n: int, p: int) -> tuple[float, bool]:
    floored = sigma2 < SIGMA2_FLOOR
    return math.log(max(sigma2, SIGMA2_FLOOR)) + s_hat / n * math.log(n) * math.log(math.log(p)), floored


def select_lambda_ic(data: Dataset, lambda_coefs: Sequence[float] = DEFAULT_LAMBDA_COEFS,
                     **opts):
    """Pick lambda = c * sqrt(log p / n) over ``lambda_coefs`` by the IC

        log sigma2(lam) + s(lam)/n * log(n) * log(log(p)).

    Fits run from the largest lambda down with warm starts.  Ties go to the
    smaller lambda.  Returns ``(lambda_star, estimate, diagnostics)``.
    """
    n, p = data.n, data.p
    if p < 3:
        raise DomainError("the information criterion uses log(log(p)); need p >= 3")
    coefs = np.asarray(lambda_coefs, dtype=float)
    if coefs.size == 0 or np.any(coefs <= 0):
        raise DomainError("lambda coefficients must be positive")
    base = math.sqrt(math.log(p) / n)
    order = np.argsort(-coefs, kind="stable")
    lambdas = coefs[order] * base
    fits = lasso_path(data, lambdas, **opts)
    ics, floored = zip(*(information_criterion(f.sigma2_hat, f.support.size, n, p) for f in fits))
    best = None
    for i in range(len(fits)):
        # descending lambdas: "<=" lets later (smaller) lambdas win ties
        if best is None or ics[i] <= ics[best]:
            best = i
    diag = ICDiagnostics(
        lambdas=lambdas.tolist(),
        coefs=coefs[order].tolist(),
        ic=list(ics),
        support_sizes=[int(f.support.size) for f in fits],
        sigma2=[f.sigma2_hat for f in fits],
        floored=list(floored),
        selected_index=best,
    )
    return float(lambdas[best]), fits[best], diag


def ratio_statistic(beta_hat, beta0, s0: int, *, fd_norm: Optional[float] = None) -> float:
    """``fd_norm * ||b - b0||_2 / ||D(b - b0)||_2`` with ``D = (I_{s0}, 0)``.

    ``fd_norm`` defaults to ``s0``, the factor used in the published table;
    pass ``sqrt(s0)`` for the Frobenius norm of D.  Never below ``fd_norm``.
    """
    h = np.asarray(beta_hat, dtype=float) - np.asarray(beta0, dtype=float)
    head = float(h[:s0] @ h[:s0])
    if head == 0.0:
        raise ZeroDenominator("D(beta_hat - beta0) = 0")
    tail = float(h[s0:] @ h[s0:])
    # sqrt(head + tail) >= sqrt(head) survives rounding, so the ratio never drops below fd_norm
    return (s0 if fd_norm is None else fd_norm) * (math.sqrt(head + tail) / math.sqrt(head))


# --------------------------------------------------------------------------
# table
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SimCell:
    n: int
    p: int
    s0: int
    reps: int = 1000
    seed: int = 0
    lambda_coefs: tuple = DEFAULT_LAMBDA_COEFS

    def __post_init__(self):
        if not 0 < self.s0 <= self.p:
            raise DomainError(f"need 0 < s0 <= p, got {self.s0}, {self.p}")
        if self.reps < 1:
            raise DomainError("reps must be >= 1")
        if self.p < 3:
            raise DomainError("p must be >= 3 for log(log(p))")


@dataclass
class SimResult:
    cell: SimCell
    mean_ratio: float
    ratio_min: float
    mean_ratio_sqrt: float
    mean_selected_c: float
    excluded: int
    per_rep_ratios: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def published(self) -> Optional[float]:
        return TABLE1.get((self.cell.n, self.cell.s0), {}).get(self.cell.p)

    def to_dict(self) -> dict:
        d = asdict(self.cell)
        d["lambda_coefs"] = list(self.cell.lambda_coefs)
        d.update(mean_ratio=self.mean_ratio, ratio_min=self.ratio_min,
                 mean_ratio_sqrt_s0=self.mean_ratio_sqrt,
                 mean_selected_c=self.mean_selected_c, excluded=self.excluded,
                 published=self.published)
        return d


def run_replication(cell: SimCell, rep: int) -> tuple[float, float]:
    """Return ``(ratio, selected_c)``; ratio is NaN when the replication is excluded."""
    rng = replication_rng(cell.seed, cell.n, cell.p, cell.s0, rep)
    data = dgp_sample(cell.n, cell.p, cell.s0, rng=rng)
    _, est, diag = select_lambda_ic(data, cell.lambda_coefs)
    c = diag.coefs[diag.selected_index]
    try:
        return ratio_statistic(est.beta_hat, data.beta_true, cell.s0), c
    except ZeroDenominator:
        return math.nan, c


def run_cell(cell: SimCell, threads: int = 1, keep_ratios: bool = True) -> SimResult:
    reps = range(cell.reps)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(lambda r: run_replication(cell, r), reps))
    else:
        out = [run_replication(cell, r) for r in reps]
    ratios = np.array([o[0] for o in out])
    cs = np.array([o[1] for o in out])
    ok = ~np.isnan(ratios)
    kept = ratios[ok]
    # sqrt(s0) variant rescales the same per-rep ratio
    scale = math.sqrt(cell.s0) / cell.s0
    mean = float(np.mean(kept)) if kept.size else math.nan
    return SimResult(
        cell=cell,
        mean_ratio=mean,
        ratio_min=float(np.min(kept)) if kept.size else math.nan,
        mean_ratio_sqrt=mean * scale,
        mean_selected_c=float(np.mean(cs)),
        excluded=int((~ok).sum()),
        per_rep_ratios=ratios if keep_ratios else None,
    )


@dataclass
class SimTable:
    results: list

    def rows(self) -> list:
        """Group results into a grid: one row per (n, s0), one column per p."""
        ps = sorted({r.cell.p for r in self.results})
        keys = []
        for r in self.results:
            k = (r.cell.n, r.cell.s0)
            if k not in keys:
                keys.append(k)
        keys.sort(key=lambda k: (k[1], k[0]))
        lookup = {(r.cell.n, r.cell.s0, r.cell.p): r for r in self.results}
        return ps, [(k, [lookup.get((*k, p)) for p in ps]) for k in keys]

    def to_csv(self, digits: int = 4) -> str:
        ps, rows = self.rows()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "s0"] + [f"p={p}" for p in ps])
        for (n, s0), cells in rows:
            w.writerow([n, s0] + ["" if r is None else f"{r.mean_ratio:.{digits}f}" for r in cells])
        return buf.getvalue()

    def diagnostics(self) -> dict:
        return {"cells": [r.to_dict() for r in self.results]}

    def to_json(self) -> str:
        return json.dumps(self.diagnostics(), indent=2, sort_keys=True, allow_nan=True)


def run_table1(cells: Sequence[SimCell], threads: int = 1, keep_ratios: bool = True,
               progress=None) -> SimTable:
    """Run every cell; per-replication streams make the output independent of ``threads``."""
    results = []
    with threadpool_limits(limits=1, user_api="blas"):
        for cell in cells:
            results.append(run_cell(cell, threads=threads, keep_ratios=keep_ratios))
            if progress is not None:
                progress(results[-1])
    return SimTable(results)


def load_config(cfg: dict) -> list[SimCell]:
    """Expand a config mapping into cells.

    Accepts either ``{"cells": [{"n":..,"p":..,"s0":..}, ...]}`` or a grid
    ``{"n": [...], "p": [...], "s0": [...]}``, plus ``reps``, ``seed`` and
    ``lambda_coefs`` applied to every cell (a cell entry may override them).
    """
    reps = int(cfg.get("reps", 1000))
    seed = int(cfg.get("seed", 0))
    coefs = tuple(float(c) for c in cfg.get("lambda_coefs", DEFAULT_LAMBDA_COEFS))
    if "cells" in cfg:
        specs = cfg["cells"]
    else:
        specs = [{"n": n, "p": p, "s0": s0}
                 for s0 in cfg["s0"] for n in cfg["n"] for p in cfg["p"]]
    cells = []
    for s in specs:
        cells.append(SimCell(
            n=int(s["n"]), p=int(s["p"]), s0=int(s["s0"]),
            reps=int(s.get("reps", reps)), seed=int(s.get("seed", seed)),
            lambda_coefs=tuple(float(c) for c in s.get("lambda_coefs", coefs)),
        ))
    return cells
