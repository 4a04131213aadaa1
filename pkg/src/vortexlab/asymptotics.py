"""Distance between computed ring profiles and the shifted 1D soliton.

For large spin m the profile approaches Q_c(r - rbar) with rbar = alpha0 m;
the H^2-type error (r dr measure) decays like m^(-1/2) and the uniform error
like m^(-1).  This module measures both and fits the rates over a list of m.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData
from .profile_solver import Profile, require_converged, solve
from .soliton1d import eval_q

__all__ = ["ErrorNorms", "RateFit", "error_norms", "errors_table",
           "rate_fit", "rate_fit_from_table"]


@dataclass(frozen=True)
class ErrorNorms:
    m: int
    h2_err: float
    linf_err: float
    peak_offset: float


@dataclass(frozen=True)
class RateFit:
    rate_h2: float
    rate_linf: float
    r2_h2: float
    r2_linf: float


def error_norms(profile: Profile) -> ErrorNorms:
    """H^2_r and L-infinity distance from the uncut shifted soliton.

    The H^2 norm is the discrete ||(1 - D_r) d||_{L^2_r} with
    D_r = d^2/dr^2 + (1/r) d/dr (no centrifugal term), Dirichlet-extended by
    zero at both ends; the comparison profile is the full sech tail, not the
    cutoff ansatz.
    """
    require_converged(profile)
    grid = profile.grid
    params = profile.params
    r, h = grid.nodes, grid.h
    d = profile.values - eval_q(params, r - params.rbar(profile.m))
    lap = np.zeros_like(d)
    lap[1:-1] = (d[2:] - 2.0 * d[1:-1] + d[:-2]) / h ** 2 \
        + (d[2:] - d[:-2]) / (2.0 * h * r[1:-1])
    lap[0] = (d[1] - 2.0 * d[0]) / h ** 2 + d[1] / (2.0 * h * r[0])
    lap[-1] = (d[-2] - 2.0 * d[-1]) / h ** 2 - d[-2] / (2.0 * h * r[-1])
    h2 = grid.l2r_norm(d - lap)
    linf = float(np.max(np.abs(d)))
    peak_offset = float(r[int(np.argmax(profile.values))] - params.rbar(profile.m))
    return ErrorNorms(m=profile.m, h2_err=h2, linf_err=linf,
                      peak_offset=peak_offset)


def errors_table(p: float, omega: float, m_list, tol: float = 1e-10,
                 cache_dir: str | None = None,
                 workers: int | None = None) -> list[ErrorNorms]:
    """error_norms for each m, solving profiles as needed (cache-backed)."""
    ms = [int(m) for m in m_list]
    if not ms:
        raise InsufficientData("empty m list")
    nworkers = workers if workers is not None else min(4, len(ms))

    def run(m: int) -> ErrorNorms:
        return error_norms(solve(p, omega, m, tol=tol, cache_dir=cache_dir))

    if nworkers <= 1 or len(ms) == 1:
        return [run(m) for m in ms]
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        return list(pool.map(run, ms))


def _loglog_fit(ms: np.ndarray, errs: np.ndarray) -> tuple[float, float]:
    x, y = np.log(ms), np.log(errs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), r2


def rate_fit_from_table(table: list[ErrorNorms]) -> RateFit:
    if len(table) < 3:
        raise InsufficientData(f"rate fit needs >= 3 spins, got {len(table)}")
    ms = np.array([row.m for row in table], dtype=float)
    rate_h2, r2_h2 = _loglog_fit(ms, np.array([row.h2_err for row in table]))
    rate_linf, r2_linf = _loglog_fit(ms, np.array([row.linf_err for row in table]))
    return RateFit(rate_h2=rate_h2, rate_linf=rate_linf, r2_h2=r2_h2,
                   r2_linf=r2_linf)


def rate_fit(p: float, omega: float, m_list, tol: float = 1e-10,
             cache_dir: str | None = None, workers: int | None = None) -> RateFit:
    """Least-squares slopes of log(error) vs log(m); needs >= 3 spins."""
    if len(list(m_list)) < 3:
        raise InsufficientData("rate fit needs >= 3 spins")
    return rate_fit_from_table(errors_table(p, omega, m_list, tol=tol,
                                            cache_dir=cache_dir, workers=workers))
