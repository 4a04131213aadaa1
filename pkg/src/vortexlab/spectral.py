"""Sector spectra and the 4x4 reduced model for long-wave ring instability.

Perturbations e^{i(m+j)theta} v(r) of a spin-m ring couple pairwise into the
sector operator built in :mod:`vortexlab.operators`.  Projecting onto the
four-dimensional generalized kernel of the delta = j/m -> 0 limit yields an
explicit 4x4 matrix whose unstable eigenvalue grows like (gamma/alpha0) delta;
this module provides that matrix in closed form, dense/shift-invert sector
eigensolves, the kernel-structure check, and the scan over j.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EigensolveFailure, InvalidParameter, OutOfValidityRange
from .operators import (LineGrid, SectorOperator, build_Lplus_Lminus,
                        build_sector_operator, default_line_grid)
from .profile_solver import Profile, require_converged
from .soliton1d import (SolitonParams, eval_dcq, eval_dq, eval_q, gamma_growth,
                        q_norms)

__all__ = [
    "ReducedModel",
    "SpectrumReport",
    "KernelReport",
    "ScanRow",
    "ScanResult",
    "reduced_matrix",
    "reduced_eigenvalues",
    "predicted_growth",
    "kernel_check",
    "sector_spectrum",
    "unstable_scan",
    "canonical_index",
]

DENSE_EIG_LIMIT = 4000  # dense eigensolve up to this total dimension 2n
DELTA_CEILING = 0.5     # bracket statements are only quoted for delta <= 0.5


def _require_reduced_range(p: float) -> None:
    if not (1.0 < p < 5.0):
        raise OutOfValidityRange(
            f"reduced model requires 1 < p < 5, got p={p}")


@dataclass(frozen=True)
class ReducedModel:
    """The 4x4 projection of the sector operator onto the generalized kernel.

    matrix = -2i alpha0^-2 delta I + [[0, 1+b2 d^2, 0, 0],
                                      [b1 d^2, 0, 0, 0],
                                      [0, 0, 0, 1+b4 d^2],
                                      [0, 0, b3 d^2, 0]]
    with b1 = alpha0^-2 theta1 ||Q||^2,  b2 = -alpha0^-2 theta1 ||d_c Q||^2,
         b3 = -4 alpha0^-4,              b4 = alpha0^-2 ||s Q||^2 / ||Q||^2,
         theta1 = 2 (d/dc ||Q||^2)^-1,   theta2 = 4 ||Q||^-2.
    """

    params: SolitonParams
    delta: float
    b1: float
    b2: float
    b3: float
    b4: float
    theta1: float
    theta2: float
    matrix: np.ndarray


def reduced_matrix(params: SolitonParams, delta: float) -> ReducedModel:
    """Assemble the reduced 4x4 matrix at scaled index delta = j/m."""
    _require_reduced_range(params.p)
    if delta < 0.0:
        raise InvalidParameter(f"need delta >= 0, got {delta}")
    n = q_norms(params)
    a2 = params.alpha0 ** -2
    th1 = 2.0 / n.dNdc
    th2 = 4.0 / n.L2_sq
    b1 = a2 * th1 * n.L2_sq
    b2 = -a2 * th1 * n.dcq_L2_sq
    b3 = -4.0 * a2 ** 2
    b4 = a2 * n.xq_L2_sq / n.L2_sq
    d2 = delta ** 2
    mat = np.array([
        [0.0, 1.0 + b2 * d2, 0.0, 0.0],
        [b1 * d2, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0 + b4 * d2],
        [0.0, 0.0, b3 * d2, 0.0],
    ], dtype=complex)
    mat += -2.0j * a2 * delta * np.eye(4)
    return ReducedModel(params=params, delta=delta, b1=b1, b2=b2, b3=b3, b4=b4,
                        theta1=th1, theta2=th2, matrix=mat)


def reduced_eigenvalues(model: ReducedModel) -> np.ndarray:
    """Closed-form roots of the reduced characteristic quartic, sorted by
    descending real part:

        lambda = -2i alpha0^-2 delta +- delta sqrt(b1 (1 + b2 delta^2))
        lambda = -2i alpha0^-2 delta +- delta sqrt(b3 (1 + b4 delta^2))
    """
    d = model.delta
    shift = -2.0j * model.params.alpha0 ** -2 * d
    s1 = np.lib.scimath.sqrt(model.b1 * (1.0 + model.b2 * d ** 2))
    s3 = np.lib.scimath.sqrt(model.b3 * (1.0 + model.b4 * d ** 2))
    roots = np.array([shift + d * s1, shift - d * s1,
                      shift + d * s3, shift - d * s3])
    return roots[sort_by_growth(roots)]


def sort_by_growth(lams: np.ndarray, re_tol: float = 1e-11) -> np.ndarray:
    """Indices sorting eigenvalues by descending real part, with real parts
    within re_tol of zero treated as exact ties (broken by descending
    imaginary part)."""
    re = np.where(np.abs(lams.real) < re_tol, 0.0, lams.real)
    return np.lexsort((-lams.imag, -re))


@dataclass(frozen=True)
class Predicted:
    """Leading-order growth rate alpha0^-1 gamma delta and its bracket
    [3/4, 5/4] * value."""

    value: float
    lo: float
    hi: float


def predicted_growth(params: SolitonParams, delta: float) -> Predicted:
    """Predicted unstable growth rate at scaled index delta, with the
    factor-of-5/4 bracket.  Valid for 1 < p < 5 and delta <= 0.5."""
    _require_reduced_range(params.p)
    if not (0.0 <= delta <= DELTA_CEILING):
        raise OutOfValidityRange(
            f"bracket only quoted for delta in [0, {DELTA_CEILING}], got {delta}")
    g = gamma_growth(params)
    val = g * delta / params.alpha0
    return Predicted(value=val, lo=0.75 * val, hi=1.25 * val)


# --- generalized kernel of the delta = 0 line operator -----------------------

@dataclass(frozen=True)
class KernelReport:
    """Residuals of the Jordan-chain identities of the delta=0 operator and
    the biorthogonality Gram matrix of the kernel/cokernel vectors."""

    chain_residuals: tuple[float, float, float, float]
    gram: np.ndarray

    @property
    def max_gram_error(self) -> float:
        return float(np.max(np.abs(self.gram - np.eye(4))))


def _h0_apply(lp, lm, w: np.ndarray) -> np.ndarray:
    """delta=0 sector action on stacked (w1, w2): i (L_minus w2, L_plus w1)."""
    n = lp.n
    return 1j * np.concatenate([lm.apply(w[n:]), lp.apply(w[:n])])


def kernel_check(params: SolitonParams, grid: LineGrid | None = None) -> KernelReport:
    """Verify the four-vector Jordan structure of the delta=0 operator.

    The chain is  H Phi1 = 0, H Phi2 = Phi1, H Phi3 = 0, H Phi4 = Phi3  with
    Phi1 = (0, Q), Phi2 = -i (d_c Q, 0), Phi3 = (Q', 0), Phi4 = -(i/2)(0, s Q),
    and the dual vectors are theta1/theta2-scaled swaps of the chain.
    """
    if params.p == 5.0:
        raise OutOfValidityRange("kernel structure degenerates at p = 5")
    if grid is None:
        grid = default_line_grid(params)
    lp, lm = build_Lplus_Lminus(grid, params)
    s = grid.nodes
    q = eval_q(params, s)
    dq = eval_dq(params, s)
    dcq = eval_dcq(params, s)
    zero = np.zeros_like(q)

    def stack(top, bot):
        return np.concatenate([top.astype(complex), bot.astype(complex)])

    phi = [stack(zero, q),
           -1j * stack(dcq, zero),
           stack(dq, zero),
           -0.5j * stack(zero, s * q)]
    targets = [None, phi[0], None, phi[2]]

    def norm(w):
        return math.sqrt(grid.h * float(np.sum(np.abs(w) ** 2)))

    residuals = []
    for w, tgt in zip(phi, targets):
        hv = _h0_apply(lp, lm, w)
        if tgt is None:
            residuals.append(norm(hv) / norm(w))
        else:
            residuals.append(norm(hv - tgt) / norm(tgt))

    nrm = q_norms(params)
    th1 = 2.0 / nrm.dNdc
    th2 = 4.0 / nrm.L2_sq

    def sigma2(w):
        n = grid.n
        return np.concatenate([-1j * w[n:], 1j * w[:n]])

    phi_star = [th1 * sigma2(phi[1]), th1 * sigma2(phi[0]),
                th2 * sigma2(phi[3]), th2 * sigma2(phi[2])]
    gram = np.empty((4, 4), dtype=complex)
    for i in range(4):
        for k in range(4):
            gram[i, k] = grid.h * np.sum(phi[i] * np.conj(phi_star[k]))
    return KernelReport(chain_residuals=tuple(residuals), gram=gram)


# --- sector eigensolves -------------------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of a sector operator with their residual norms.

    eigenvalues are those of the physical operator i*h (instability when
    Re lambda > 0); residuals are ||i h v - lambda v|| / ||v|| in the r dr
    norm.  predicted/bracket come from the reduced model when it applies.
    """

    m: int
    j: int
    delta: float
    eigenvalues: np.ndarray
    residuals: np.ndarray
    max_re: float
    predicted: float | None
    bracket: tuple[float, float] | None
    in_bracket: bool | None

    @property
    def dominant(self) -> complex:
        return complex(self.eigenvalues[0])


def _sector_residuals(secop: SectorOperator, lams: np.ndarray,
                      vecs: np.ndarray) -> np.ndarray:
    out = np.empty(lams.size)
    for i, lam in enumerate(lams):
        v = vecs[:, i]
        out[i] = secop.norm(secop.apply(v) - lam * v) / secop.norm(v)
    return out


def _refine_eigenpair(mat_c: sp.spmatrix, mu: complex, v: np.ndarray,
                      steps: int = 3) -> tuple[complex, np.ndarray]:
    """Shifted inverse iteration to polish an eigenpair of mat_c."""
    n = mat_c.shape[0]
    ident = sp.identity(n, dtype=complex, format="csc")
    try:
        lu = spla.splu((mat_c - mu * ident).tocsc())
    except RuntimeError:
        # exactly singular shift: nudge off the eigenvalue
        lu = spla.splu((mat_c - (mu + 1e-10) * ident).tocsc())
    for _ in range(steps):
        v = lu.solve(v)
        v = v / np.linalg.norm(v)
    mu = complex(np.vdot(v, mat_c @ v) / np.vdot(v, v))
    return mu, v


def sector_spectrum(profile: Profile, j: int, k_wanted: int = 6) -> SpectrumReport:
    """Eigenvalues of largest real part of the sector operator at index j.

    Dense eigensolve when 2n <= 4000; otherwise shift-invert Arnoldi
    targeted at the reduced-model prediction.  Reported eigenpairs are
    polished until their residuals certify them.
    """
    require_converged(profile)
    params = profile.params
    m = profile.m
    secop = build_sector_operator(profile, m, j)
    delta = j / m
    pred = None
    bracket = None
    if 1.0 < params.p < 5.0 and 0.0 <= abs(delta) <= DELTA_CEILING:
        pg = predicted_growth(params, abs(delta))
        pred, bracket = pg.value, (pg.lo, pg.hi)

    mat = secop.real_matrix()
    two_n = mat.shape[0]
    if two_n <= DENSE_EIG_LIMIT:
        mu, vecs = sla.eig(mat.toarray())
        lams = 1j * mu
        take = sort_by_growth(lams)[:max(k_wanted, 1)]
        lams, vecs = lams[take], vecs[:, take]
        residuals = _sector_residuals(secop, lams, vecs)
    else:
        k = max(k_wanted, 6)
        # target the predicted eigenvalue; the spectrum's imaginary offset in
        # this sector is about -2 delta / alpha0^2
        lam0 = complex(pred if pred is not None else 0.0,
                       -2.0 * delta / params.alpha0 ** 2)
        mat_c = mat.astype(complex).tocsc()
        try:
            mu, vecs = spla.eigs(mat_c, k=k, sigma=-1j * lam0, which="LM",
                                 tol=1e-12, maxiter=5000)
        except spla.ArpackNoConvergence as exc:
            raise EigensolveFailure(f"shift-invert Arnoldi failed: {exc}") from exc
        lams = 1j * mu
        take = sort_by_growth(lams)[:max(k_wanted, 1)]
        lams, vecs = lams[take], np.ascontiguousarray(vecs[:, take])
        residuals = _sector_residuals(secop, lams, vecs)
        for i in range(lams.size):
            if residuals[i] > 1e-9:
                mu_i, v_i = _refine_eigenpair(mat_c, -1j * lams[i], vecs[:, i])
                lams[i] = 1j * mu_i
                vecs[:, i] = v_i
                residuals[i] = _sector_residuals(secop, lams[i:i + 1],
                                                 vecs[:, i:i + 1])[0]
    if np.any(~np.isfinite(residuals)):
        raise EigensolveFailure("non-finite eigenvalue residual")
    max_re = float(lams.real.max())
    in_bracket = None
    if bracket is not None and j != 0:
        in_bracket = bool(bracket[0] <= max_re <= bracket[1])
    return SpectrumReport(m=m, j=j, delta=delta, eigenvalues=lams,
                          residuals=residuals, max_re=max_re, predicted=pred,
                          bracket=bracket, in_bracket=in_bracket)


def dominant_eigenvector(profile: Profile, j: int) -> np.ndarray:
    """Eigenvector of the sector eigenvalue with largest real part
    (unit r dr norm)."""
    require_converged(profile)
    secop = build_sector_operator(profile, profile.m, j)
    mat = secop.real_matrix()
    rep = sector_spectrum(profile, j, k_wanted=1)
    lam = rep.eigenvalues[0]
    mat_c = mat.astype(complex).tocsc()
    if mat.shape[0] <= DENSE_EIG_LIMIT:
        mu, vecs = sla.eig(mat.toarray())
        i = int(np.argmax((1j * mu).real))
        v = vecs[:, i].astype(complex)
    else:
        _, v = _refine_eigenpair(mat_c, -1j * lam, _seed_vector(mat.shape[0]))
    return v / secop.norm(v)


def _seed_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(1234)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def canonical_index(m: int, p: float) -> int:
    """The flagged scan index floor(m^beta), beta = min(p-1, 1)/6.

    A tiny forward nudge keeps exact powers (e.g. 64^(1/6) = 2) from landing
    just below the integer in floating point.
    """
    beta = min(p - 1.0, 1.0) / 6.0
    return int(math.floor(m ** beta + 1e-9))


@dataclass(frozen=True)
class ScanRow:
    j: int
    delta: float
    max_re: float
    predicted: float | None
    bracket: tuple[float, float] | None
    in_bracket: bool | None
    flagged: bool


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    j_star: int


def unstable_scan(profile: Profile, j_range, k_wanted: int = 4,
                  workers: int | None = None) -> ScanResult:
    """Sector eigensolves over a range of perturbation indices j.

    Flags the canonical index j* = floor(m^beta).  j values must lie in
    [1, m-1].
    """
    require_converged(profile)
    m = profile.m
    js = [int(j) for j in j_range]
    if not js:
        raise InvalidParameter("empty scan range")
    for j in js:
        if not (1 <= j <= m - 1):
            raise InvalidParameter(f"scan index j={j} outside [1, m-1]")
    j_star = canonical_index(m, profile.p)
    nworkers = workers if workers is not None else min(4, len(js))

    def run(j: int) -> ScanRow:
        rep = sector_spectrum(profile, j, k_wanted=k_wanted)
        return ScanRow(j=j, delta=rep.delta, max_re=rep.max_re,
                       predicted=rep.predicted, bracket=rep.bracket,
                       in_bracket=rep.in_bracket, flagged=(j == j_star))

    if nworkers <= 1 or len(js) == 1:
        rows = [run(j) for j in js]
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(run, js))
    return ScanResult(rows=tuple(rows), j_star=j_star)
