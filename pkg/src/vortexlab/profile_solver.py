"""Vortex ring profiles: cutoff-soliton ansatz, damped Newton solve, residual
diagnostics, and a disk cache with bit-exact JSON serialization.

The profile phi(r) of a spin-m standing wave solves the singular BVP

    phi'' + phi'/r - (omega + m^2/r^2) phi + |phi|^(p-1) phi = 0,
    phi ~ r^m at the origin,  phi -> 0 as r -> infinity.

For large m the solution is a ring: the sech soliton Q_c centered at
rbar = alpha0 m, cut off by a smooth bump of half-width l ~ log(m).  Newton
iteration from that ansatz converges in a handful of steps.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .errors import (InvalidParameter, NewtonDiverged, NotConverged,
                     NotPositive)
from .operators import RadialGrid, build_radial_schroedinger, default_radial_grid
from .soliton1d import SolitonParams, balance_constants, eval_dq, eval_q

__all__ = [
    "Profile",
    "ansatz",
    "bvp_residual",
    "solve",
    "residual_decomposition",
    "profile_to_json",
    "profile_from_json",
    "cache_path",
    "fmt17",
]

DEFAULT_TOL = 1e-10
MAX_NEWTON_ITERS = 50
PROFILE_SCHEMA = "vortexlab-profile-v1"


@dataclass(frozen=True)
class Profile:
    """Radial samples of a profile plus provenance.

    provenance is one of "ansatz", "newton-converged", "loaded".
    residual_norm is the discrete L^2_r norm of the BVP residual.
    """

    grid: RadialGrid
    values: np.ndarray
    p: float
    omega: float
    m: int
    converged: bool
    residual_norm: float
    provenance: str
    step_norms: tuple[float, ...] = ()

    @property
    def params(self) -> SolitonParams:
        return balance_constants(self.p, self.omega)

    @property
    def peak_radius(self) -> float:
        return float(self.grid.nodes[int(np.argmax(self.values))])

    @property
    def peak_value(self) -> float:
        return float(np.max(self.values))


def _f(u: np.ndarray, p: float) -> np.ndarray:
    # sign-preserving power |u|^(p-1) u
    return np.abs(u) ** (p - 1.0) * u


def _fprime(u: np.ndarray, p: float) -> np.ndarray:
    return p * np.abs(u) ** (p - 1.0)


# --- smooth cutoff -----------------------------------------------------------

def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, exp(-1/t) glue between."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lo, hi = t <= 0.02, t >= 0.98
    out[lo], out[hi] = 0.0, 1.0
    mid = ~(lo | hi)
    tm = t[mid]
    g, gc = np.exp(-1.0 / tm), np.exp(-1.0 / (1.0 - tm))
    out[mid] = g / (g + gc)
    return out


def _step_d1_d2(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of the smooth step (0 outside (0,1))."""
    t = np.asarray(t, dtype=float)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    mid = (t > 0.02) & (t < 0.98)
    tm = t[mid]
    u = 1.0 - tm
    g, gc = np.exp(-1.0 / tm), np.exp(-1.0 / u)
    gp, gcp = g / tm ** 2, gc / u ** 2
    gpp = g * (1.0 - 2.0 * tm) / tm ** 4
    gcpp = gc * (1.0 - 2.0 * u) / u ** 4
    D = g + gc
    Dp = gp - gcp
    Dpp = gpp + gcpp
    d1[mid] = gp / D - g * Dp / D ** 2
    d2[mid] = (gpp / D - 2.0 * gp * Dp / D ** 2
               - g * Dpp / D ** 2 + 2.0 * g * Dp ** 2 / D ** 3)
    return d1, d2


def _bump(s: np.ndarray) -> np.ndarray:
    """chi(s): 1 on |s| <= 2, 0 on |s| >= 3, smooth in between."""
    return 1.0 - _smooth_step(np.abs(s) - 2.0)


def _bump_d1_d2(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=float)
    d1, d2 = _step_d1_d2(np.abs(s) - 2.0)
    return -np.sign(s) * d1, -d2


def cutoff_halfwidth(params: SolitonParams, m: int) -> float:
    """l = (2/sqrt(c)) max(1, 1/(p-1)) log(m); the cutoff spans 3 l."""
    return 2.0 / math.sqrt(params.c) * max(1.0, 1.0 / (params.p - 1.0)) * math.log(m)


def _cutoff_soliton(params: SolitonParams, m: int, rho: float,
                    grid: RadialGrid) -> np.ndarray:
    """chi_l(r - rho) Q_c(r - rho) with c = omega + (rho/m)^-2 sampled on the grid."""
    s = grid.nodes - rho
    l = cutoff_halfwidth(params, m)
    vals = _bump(s / l) * eval_q(params, s)
    if m < 8:
        # keep the support inside (0, inf) for small m, where 3l can reach rho
        vals *= _smooth_step((grid.nodes - rho / 4.0) / (rho / 8.0))
    return vals


def _params_at_rho(p: float, omega: float, m: int, rho: float) -> SolitonParams:
    """Constants with the ring frequency evaluated at radius rho:
    c = omega + (rho/m)^-2."""
    base = balance_constants(p, omega)
    c = omega + (m / rho) ** 2
    A = ((p + 1.0) * c / 2.0) ** (1.0 / (p - 1.0))
    return replace(base, c=c, alpha0=rho / m, A=A)


def ansatz(p: float, omega: float, m: int, grid: RadialGrid) -> Profile:
    """Cutoff-soliton initial guess centered on the ring radius rbar = alpha0 m."""
    if m < 2:
        raise InvalidParameter(f"ansatz needs m >= 2, got {m}")
    params = balance_constants(p, omega)
    grid.require_resolves(max(float(m), math.sqrt(params.c)))
    vals = _cutoff_soliton(params, m, params.rbar(m), grid)
    prof = Profile(grid=grid, values=vals, p=p, omega=omega, m=m,
                   converged=False, residual_norm=math.nan, provenance="ansatz")
    res = bvp_residual(prof)
    return replace(prof, residual_norm=grid.l2r_norm(res))


def bvp_residual(profile: Profile) -> np.ndarray:
    """Pointwise discrete residual of the BVP at the profile's samples."""
    grid, v = profile.grid, profile.values
    r, h = grid.nodes, grid.h
    lap = np.zeros_like(v)
    lap[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h ** 2 \
        + (v[2:] - v[:-2]) / (2.0 * h * r[1:-1])
    # Dirichlet ghost values are zero at r=0 and r=r_max
    lap[0] = (v[1] - 2.0 * v[0]) / h ** 2 + v[1] / (2.0 * h * r[0])
    lap[-1] = (v[-2] - 2.0 * v[-1]) / h ** 2 - v[-2] / (2.0 * h * r[-1])
    m2 = float(profile.m) ** 2
    return lap - (profile.omega + m2 / r ** 2) * v + _f(v, profile.p)


def _residual_vec(grid: RadialGrid, v: np.ndarray, p: float, omega: float,
                  m: int) -> np.ndarray:
    prof = Profile(grid=grid, values=v, p=p, omega=omega, m=m,
                   converged=False, residual_norm=math.nan, provenance="ansatz")
    return bvp_residual(prof)


def solve(p: float, omega: float, m: int, grid: RadialGrid | None = None,
          tol: float = DEFAULT_TOL, cache_dir: str | None = None,
          use_cache: bool = True) -> Profile:
    """Damped Newton iteration from the cutoff-soliton ansatz.

    Convergence is declared on the residual norm relative to ||phi||_{L2_r}.
    Raises NewtonDiverged if no step is accepted within 50 iterations,
    NotPositive if the converged profile changes sign.
    """
    params = balance_constants(p, omega)
    if grid is None:
        grid = default_radial_grid(params, m)
    if use_cache:
        cached = _cache_load(p, omega, m, grid, cache_dir)
        if cached is not None and cached.residual_norm <= tol * grid.l2r_norm(cached.values):
            return cached

    start = ansatz(p, omega, m, grid)
    v = start.values.copy()
    res = _residual_vec(grid, v, p, omega, m)
    rnorm = grid.l2r_norm(res)
    step_norms: list[float] = []
    converged = False
    for _ in range(MAX_NEWTON_ITERS):
        phinorm = grid.l2r_norm(v)
        if rnorm <= tol * max(phinorm, 1e-30):
            converged = True
            break
        jac = build_radial_schroedinger(grid, m, omega, _fprime(v, p))
        step = solve_banded((1, 1), jac.lapack_banded(), -res)
        # Armijo backtracking on the residual norm
        lam, accepted = 1.0, False
        while lam >= 2.0 ** -30:
            trial = v + lam * step
            tres = _residual_vec(grid, trial, p, omega, m)
            tnorm = grid.l2r_norm(tres)
            if tnorm <= (1.0 - 1e-4 * lam) * rnorm:
                v, res, rnorm = trial, tres, tnorm
                step_norms.append(lam * grid.l2r_norm(step))
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            raise NewtonDiverged(
                f"no acceptable step at residual {rnorm:.3e} "
                f"(p={p}, omega={omega}, m={m})")
    if not converged:
        phinorm = grid.l2r_norm(v)
        if rnorm <= tol * max(phinorm, 1e-30):
            converged = True
        else:
            raise NewtonDiverged(
                f"residual {rnorm:.3e} after {MAX_NEWTON_ITERS} iterations")
    if np.min(v) < -1e-8 * np.max(v):
        raise NotPositive(
            f"converged profile changes sign: min={np.min(v):.3e} "
            f"(p={p}, omega={omega}, m={m})")
    prof = Profile(grid=grid, values=v, p=p, omega=omega, m=m, converged=True,
                   residual_norm=rnorm, provenance="newton-converged",
                   step_norms=tuple(step_norms))
    if use_cache:
        _cache_store(prof, cache_dir)
    return prof


def residual_decomposition(p: float, omega: float, m: int, rho: float,
                           grid: RadialGrid) -> dict[str, float]:
    """L^2_r norms of the three pieces of the ansatz residual.

    R21 is the cutoff-nonlinearity mismatch f(chi Q) - chi f(Q); R22 collects
    the centrifugal and first-derivative mismatch; R23 the cutoff-derivative
    terms.  Requires rho within (alpha0 m / 2, 2 alpha0 m).
    """
    base = balance_constants(p, omega)
    rbar = base.rbar(m)
    if not (0.5 * rbar < rho < 2.0 * rbar):
        raise InvalidParameter(
            f"rho={rho:.4g} outside (alpha0 m/2, 2 alpha0 m) = "
            f"({0.5 * rbar:.4g}, {2 * rbar:.4g})")
    params = _params_at_rho(p, omega, m, rho)
    grid.require_resolves(max(float(m), math.sqrt(params.c)))
    r = grid.nodes
    s = r - rho
    l = cutoff_halfwidth(params, m)
    chi = _bump(s / l)
    chi1, chi2 = _bump_d1_d2(s / l)
    chi1, chi2 = chi1 / l, chi2 / l ** 2
    q = eval_q(params, s)
    dq = eval_dq(params, s)
    r21 = _f(chi * q, p) - chi * _f(q, p)
    r22 = (params.c - omega - float(m) ** 2 / r ** 2) * chi * q + chi * dq / r
    r23 = chi2 * q + 2.0 * chi1 * dq + chi1 * q / r
    return {
        "R21_norm": grid.l2r_norm(r21),
        "R22_norm": grid.l2r_norm(r22),
        "R23_norm": grid.l2r_norm(r23),
    }


# --- serialization and cache -------------------------------------------------

def fmt17(x: float) -> str:
    """Decimal float with 17 significant digits (bit-exact round trip)."""
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        raise InvalidParameter(f"cannot serialize non-finite value {x}")
    return format(float(x), ".17g")


_fmt = fmt17


def profile_to_json(profile: Profile) -> str:
    """Canonical profile JSON (LF, 17 significant digits)."""
    vals = ",".join(_fmt(v) for v in profile.values)
    return (
        '{"schema":"%s",' % PROFILE_SCHEMA
        + '"p":%s,"omega":%s,"m":%d,' % (_fmt(profile.p), _fmt(profile.omega), profile.m)
        + '"grid":{"r_max":%s,"n":%d},' % (_fmt(profile.grid.r_max), profile.grid.n)
        + '"values":[%s],' % vals
        + '"residual_norm":%s}' % _fmt(profile.residual_norm)
        + "\n"
    )


def profile_from_json(text: str) -> Profile:
    obj = json.loads(text)
    if obj.get("schema") != PROFILE_SCHEMA:
        raise InvalidParameter(f"unexpected profile schema {obj.get('schema')!r}")
    grid = RadialGrid(r_max=float(obj["grid"]["r_max"]), n=int(obj["grid"]["n"]))
    vals = np.asarray(obj["values"], dtype=float)
    if vals.shape != (grid.n,):
        raise InvalidParameter("profile value count does not match grid")
    prof = Profile(grid=grid, values=vals, p=float(obj["p"]),
                   omega=float(obj["omega"]), m=int(obj["m"]),
                   converged=False, residual_norm=float(obj["residual_norm"]),
                   provenance="loaded")
    # trust but verify: recompute the residual for the converged flag
    rnorm = grid.l2r_norm(bvp_residual(prof))
    return replace(prof, residual_norm=rnorm,
                   converged=bool(rnorm <= 1e-8 * grid.l2r_norm(vals)))


def resolve_cache_dir(cache_dir: str | None = None) -> str:
    if cache_dir:
        return cache_dir
    return os.environ.get("VORTEXLAB_CACHE", os.path.join(".", "vortexlab-cache"))


def cache_path(p: float, omega: float, m: int, grid: RadialGrid,
               cache_dir: str | None = None) -> str:
    key = "|".join([_fmt(p), _fmt(omega), str(m), str(grid.n), _fmt(grid.r_max)])
    digest = hashlib.sha256(key.encode()).hexdigest()[:20]
    return os.path.join(resolve_cache_dir(cache_dir), f"profile-{digest}.json")


def _cache_load(p, omega, m, grid, cache_dir) -> Profile | None:
    path = cache_path(p, omega, m, grid, cache_dir)
    if not os.path.exists(path):
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            prof = profile_from_json(fh.read())
    except (OSError, ValueError, KeyError, InvalidParameter):
        return None
    if (prof.grid.n != grid.n or prof.m != m
            or prof.p != p or prof.omega != omega
            or abs(prof.grid.r_max - grid.r_max) > 1e-12 * grid.r_max):
        return None
    return prof


def _cache_store(profile: Profile, cache_dir) -> None:
    path = cache_path(profile.p, profile.omega, profile.m, profile.grid, cache_dir)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    # atomic write-rename so concurrent writers never expose partial files
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(profile_to_json(profile))
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def require_converged(profile: Profile) -> None:
    if not profile.converged:
        raise NotConverged(
            f"operation requires a converged profile (provenance={profile.provenance})")
