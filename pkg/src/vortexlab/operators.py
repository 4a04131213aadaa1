"""Finite-difference discretizations of the radial and 1D differential operators.

Second-order central differences on uniform grids, Dirichlet at both ends.
The radial Laplacian D_r = d^2/dr^2 + (1/r) d/dr is assembled in two forms:

* ``plain``       -- the operator as written, nonsymmetric tridiagonal,
                     self-adjoint under the r dr inner product.  Its spectrum
                     is computed through the exact diag(sqrt(r)) similarity,
                     which makes the matrix symmetric to the bit.
* ``utransform``  -- the independent discretization of the unitarily
                     transformed operator on L^2(dr): conjugating by
                     phi -> r^(1/2) phi trades the first-derivative term for
                     the potential shift (nu^2 - 1/4)/r^2.

Line operators (d^2/ds^2 - c + potential) are symmetric tridiagonal as built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .errors import GridMismatch, InvalidParameter, ResolutionGuard
from .soliton1d import SolitonParams, eval_q

__all__ = [
    "GUARD_LIMIT",
    "RadialGrid",
    "LineGrid",
    "BandedOperator",
    "SectorOperator",
    "build_radial_schroedinger",
    "build_Lc",
    "build_Lplus_Lminus",
    "build_sector_operator",
    "default_radial_grid",
    "default_line_grid",
]

# h * max(index, sqrt(frequency)) must stay below this for every operator
# built on a grid.
GUARD_LIMIT = 0.35
_GUARD_SLACK = 1.0 + 1e-12


@dataclass(frozen=True)
class RadialGrid:
    """Uniform mesh on (0, r_max): interior nodes r_i = i h, h = r_max/(n+1).

    The origin and r_max are excluded; homogeneous Dirichlet values are
    imposed there (correct for centrifugal index >= 1, where solutions
    vanish like r^index).
    """

    r_max: float
    n: int
    h: float = field(init=False)

    def __post_init__(self):
        if self.n < 3 or not (self.r_max > 0.0):
            raise InvalidParameter(f"bad radial grid: n={self.n}, r_max={self.r_max}")
        object.__setattr__(self, "h", self.r_max / (self.n + 1))

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1, dtype=float)

    def require_resolves(self, scale: float) -> None:
        """Resolution guard: h * scale <= 0.35 (scale = max(index, sqrt(freq)))."""
        if self.h * scale > GUARD_LIMIT * _GUARD_SLACK:
            raise ResolutionGuard(
                f"h={self.h:.4g} too coarse for scale {scale:.4g}: "
                f"h*scale={self.h * scale:.3f} > {GUARD_LIMIT}")

    def l2r_norm(self, v: np.ndarray) -> float:
        """Discrete L^2 norm with the planar radial measure r dr."""
        v = np.asarray(v)
        return math.sqrt(self.h * float(np.sum(np.abs(v) ** 2 * self.nodes)))

    def l2r_dot(self, u: np.ndarray, v: np.ndarray):
        return self.h * np.sum(np.conj(u) * v * self.nodes)


@dataclass(frozen=True)
class LineGrid:
    """Uniform mesh on (x_min, x_max), Dirichlet-truncated at both ends."""

    x_min: float
    x_max: float
    n: int
    h: float = field(init=False)

    def __post_init__(self):
        if self.n < 3 or not (self.x_max > self.x_min):
            raise InvalidParameter(
                f"bad line grid: n={self.n}, [{self.x_min}, {self.x_max}]")
        object.__setattr__(self, "h", (self.x_max - self.x_min) / (self.n + 1))

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(1, self.n + 1, dtype=float)

    @property
    def symmetric_about_zero(self) -> bool:
        return abs(self.x_min + self.x_max) <= 1e-12 * (self.x_max - self.x_min)

    def require_resolves(self, scale: float) -> None:
        if self.h * scale > GUARD_LIMIT * _GUARD_SLACK:
            raise ResolutionGuard(
                f"h={self.h:.4g} too coarse for scale {scale:.4g}")

    def l2_norm(self, v: np.ndarray) -> float:
        return math.sqrt(self.h * float(np.sum(np.abs(v) ** 2)))

    def l2_dot(self, u: np.ndarray, v: np.ndarray):
        return self.h * np.sum(np.conj(u) * v)


@dataclass(frozen=True)
class BandedOperator:
    """Tridiagonal operator: sub/sup diagonals of length n-1 (bandwidth 1)
    or all-zero (bandwidth 0, multiplication operator).

    weight records the inner product in which the operator is self-adjoint:
    "radial" for r dr, "flat" for dr.
    """

    grid: RadialGrid | LineGrid
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    symmetric: bool
    weight: str
    bandwidth: int = 1

    @property
    def n(self) -> int:
        return self.diag.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.sup * v[1:]
        out[1:] += self.sub * v[:-1]
        return out

    def dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1))

    def sparse(self) -> sp.spmatrix:
        return sp.diags([self.sub, self.diag, self.sup], [-1, 0, 1], format="csr")

    def lapack_banded(self) -> np.ndarray:
        """(3, n) band storage for scipy.linalg.solve_banded((1, 1), ...)."""
        ab = np.zeros((3, self.n))
        ab[0, 1:] = self.sup
        ab[1, :] = self.diag
        ab[2, :-1] = self.sub
        return ab

    def sym_bands(self) -> tuple[np.ndarray, np.ndarray]:
        """(diag, offdiag) of a symmetric tridiagonal matrix with the same
        spectrum.

        For flat-weight symmetric operators this is the matrix itself.  For
        plain radial operators it is the exact diag(sqrt(r)) similarity,
        whose off-diagonal is (r_i + r_{i+1}) / (2 h^2 sqrt(r_i r_{i+1})).
        """
        if self.symmetric:
            return self.diag.copy(), self.sup.copy()
        if self.weight != "radial":
            raise InvalidParameter("no symmetric form for this operator")
        # radial off-diagonals 1/h^2 +- 1/(2 h r) stay positive because h < 2 r_1
        if np.any(self.sub <= 0.0) or np.any(self.sup <= 0.0):
            raise InvalidParameter("radial off-diagonals not positive; grid too coarse")
        return self.diag.copy(), np.sqrt(self.sub * self.sup)

    def eigvals_window(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues in (lo, hi] and their eigenvectors, via the symmetric
        form.  Eigenvectors are returned in the operator's own coordinates
        (the similarity is undone for plain radial operators)."""
        d, e = self.sym_bands()
        vals, vecs = eigh_tridiagonal(d, e, select="v", select_range=(lo, hi))
        if not self.symmetric and self.weight == "radial":
            vecs = vecs / np.sqrt(self.grid.nodes)[:, None]
        return vals, vecs

    def eigvals_topk(self, k: int) -> np.ndarray:
        """The k algebraically largest eigenvalues (ascending)."""
        d, e = self.sym_bands()
        n = d.size
        return eigvalsh_tridiagonal(d, e, select="i", select_range=(n - k, n - 1))


def _d2_bands(n: int, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    inv = 1.0 / h ** 2
    return np.full(n - 1, inv), np.full(n, -2.0 * inv), np.full(n - 1, inv)


def build_radial_schroedinger(grid: RadialGrid, nu: int, omega: float,
                              potential: np.ndarray | None = None,
                              form: str = "plain") -> BandedOperator:
    """Discretize  D_r - omega - nu^2/r^2 + V  with Dirichlet ends.

    form="plain" keeps the first-derivative term explicitly; form="utransform"
    discretizes the r^(1/2)-conjugated operator d^2/dr^2 - omega
    - (nu^2 - 1/4)/r^2 + V, which is symmetric as built.
    """
    if nu < 0 or nu != int(nu):
        raise InvalidParameter(f"centrifugal index must be a nonnegative integer, got {nu}")
    grid.require_resolves(max(float(nu), math.sqrt(omega)))
    r = grid.nodes
    n, h = grid.n, grid.h
    V = np.zeros(n) if potential is None else np.asarray(potential, dtype=float)
    if V.shape != (n,):
        raise InvalidParameter(f"potential shape {V.shape} != ({n},)")
    sub, diag, sup = _d2_bands(n, h)
    if form == "plain":
        diag = diag - omega - float(nu) ** 2 / r ** 2 + V
        sup = sup + 1.0 / (2.0 * h * r[:-1])
        sub = sub - 1.0 / (2.0 * h * r[1:])
        return BandedOperator(grid, sub, diag, sup, symmetric=False, weight="radial")
    if form == "utransform":
        diag = diag - omega - (float(nu) ** 2 - 0.25) / r ** 2 + V
        return BandedOperator(grid, sub, diag, sup, symmetric=True, weight="flat")
    raise InvalidParameter(f"unknown form {form!r}")


def _line_soliton_guard(grid: LineGrid, params: SolitonParams) -> None:
    sc = math.sqrt(params.c)
    grid.require_resolves(sc)
    if not grid.symmetric_about_zero:
        raise InvalidParameter("line grid for soliton operators must be symmetric about 0")
    if min(-grid.x_min, grid.x_max) * sc < 30.0:
        raise ResolutionGuard(
            f"line domain [{grid.x_min}, {grid.x_max}] shorter than 30/sqrt(c)")


def build_Lplus_Lminus(grid: LineGrid, params: SolitonParams
                       ) -> tuple[BandedOperator, BandedOperator]:
    """Second-variation pair about the sech soliton:

        L_plus  = d^2/ds^2 - c + p Q_c^(p-1)
        L_minus = d^2/ds^2 - c + Q_c^(p-1)
    """
    _line_soliton_guard(grid, params)
    q_pm1 = eval_q(params, grid.nodes) ** (params.p - 1.0)
    sub, diag, sup = _d2_bands(grid.n, grid.h)
    base = diag - params.c
    lp = BandedOperator(grid, sub.copy(), base + params.p * q_pm1, sup.copy(),
                        symmetric=True, weight="flat")
    lm = BandedOperator(grid, sub, base + q_pm1, sup, symmetric=True, weight="flat")
    return lp, lm


def build_Lc(grid: LineGrid, params: SolitonParams) -> BandedOperator:
    """L_c = d^2/ds^2 - c + f'(Q_c); for the pure power f this is L_plus."""
    lp, _ = build_Lplus_Lminus(grid, params)
    return lp


def _diag_op(grid: RadialGrid, values: np.ndarray) -> BandedOperator:
    z = np.zeros(grid.n - 1)
    return BandedOperator(grid, z, values, z.copy(), symmetric=True,
                          weight="radial", bandwidth=0)


@dataclass(frozen=True)
class SectorOperator:
    """Coupled operator of the azimuthal sector (m, j), acting on paired
    radial components w = (w1, w2) as  w -> i (h @ w)  with real blocks

        h11 = h22 = -2 m j / r^2                         (diagonal)
        h12 = D_r - omega - (m^2+j^2)/r^2 + phi^(p-1)
        h21 = D_r - omega - (m^2+j^2)/r^2 + p phi^(p-1)

    Blocks use the plain radial discretization, so h12 applied to the
    converged profile reproduces its Newton residual exactly; all norms are
    r dr weighted.
    """

    m: int
    j: int
    grid: RadialGrid
    h11: BandedOperator
    h12: BandedOperator
    h21: BandedOperator
    h22: BandedOperator

    @property
    def n(self) -> int:
        return self.grid.n

    def real_matrix(self) -> sp.spmatrix:
        """The 2n x 2n real block matrix h (the operator is i*h)."""
        return sp.bmat([[self.h11.sparse(), self.h12.sparse()],
                        [self.h21.sparse(), self.h22.sparse()]], format="csc")

    def apply(self, w: np.ndarray) -> np.ndarray:
        """i (h @ w) for a stacked complex vector w of length 2n."""
        n = self.n
        w1, w2 = w[:n], w[n:]
        top = self.h11.diag * w1 + self.h12.apply(w2)
        bot = self.h21.apply(w1) + self.h22.diag * w2
        return 1j * np.concatenate([top, bot])

    def norm(self, w: np.ndarray) -> float:
        n = self.n
        return math.sqrt(self.grid.l2r_norm(w[:n]) ** 2
                         + self.grid.l2r_norm(w[n:]) ** 2)


def build_sector_operator(profile, m: int, j: int,
                          include_potential: bool = True) -> SectorOperator:
    """Assemble the sector operator for perturbation index j on a profile's grid.

    include_potential=False drops the phi^(p-1) terms, leaving the skew
    (norm-preserving) core; used to validate conservative time stepping.
    """
    grid: RadialGrid = profile.grid
    if abs(j) >= m:
        raise InvalidParameter(f"need |j| < m, got j={j}, m={m}")
    params = profile.params
    try:
        grid.require_resolves(max(float(m + abs(j)), math.sqrt(params.c)))
    except ResolutionGuard as exc:
        raise GridMismatch(
            f"profile grid too coarse for sector index m+|j|={m + abs(j)}: {exc}") from exc
    r = grid.nodes
    phi_pm1 = np.abs(profile.values) ** (params.p - 1.0) if include_potential \
        else np.zeros(grid.n)
    kappa = float(m) ** 2 + float(j) ** 2
    sub, diag, sup = _d2_bands(grid.n, grid.h)
    base = diag - params.omega - kappa / r ** 2
    sup = sup + 1.0 / (2.0 * grid.h * r[:-1])
    sub = sub - 1.0 / (2.0 * grid.h * r[1:])
    h12 = BandedOperator(grid, sub, base + phi_pm1, sup,
                         symmetric=False, weight="radial")
    h21 = BandedOperator(grid, sub.copy(), base + params.p * phi_pm1, sup.copy(),
                         symmetric=False, weight="radial")
    a = _diag_op(grid, -2.0 * m * j / r ** 2)
    return SectorOperator(m=m, j=j, grid=grid, h11=a, h12=h12, h21=h21, h22=a)


def default_radial_grid(params: SolitonParams, m: int,
                        guard_index: int | None = None,
                        r_pad: float = 40.0) -> RadialGrid:
    """Grid for spin m: r_max = rbar + r_pad/sqrt(omega), spacing at the
    resolution guard for guard_index (default m), with a node placed exactly
    at the ring radius rbar = alpha0 m."""
    if m < 1:
        raise InvalidParameter(f"need m >= 1, got {m}")
    rbar = params.rbar(m)
    scale = max(float(guard_index if guard_index is not None else m),
                math.sqrt(params.c))
    h_max = GUARD_LIMIT / scale
    k = max(8, math.ceil(rbar / h_max))
    h = rbar / k
    r_max_target = rbar + r_pad / math.sqrt(params.omega)
    n = math.ceil(r_max_target / h) - 1
    return RadialGrid(r_max=(n + 1) * h, n=n)


def default_line_grid(params: SolitonParams, half_width: float | None = None,
                      h: float | None = None) -> LineGrid:
    """Symmetric line grid resolving the soliton, with a node at 0."""
    sc = math.sqrt(params.c)
    W = half_width if half_width is not None else 49.0 / sc
    h_target = h if h is not None else 0.01225 / sc
    # n = 2k-1 interior nodes puts a node exactly at 0 with spacing W/k
    k = math.ceil(W / h_target)
    return LineGrid(x_min=-W, x_max=W, n=2 * k - 1)
