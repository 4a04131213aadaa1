"""Closed-form 1D sech soliton, its exact norms, and the ring-balance constants.

The soliton

    Q_c(x) = ((p+1)c/2)^(1/(p-1)) * sech^(2/(p-1))((p-1) sqrt(c) x / 2)

solves Q'' - c Q + |Q|^(p-1) Q = 0 on the line.  A spinning ring profile of
spin m sits at radius rbar = alpha0 * m, where alpha0 is fixed by the balance
condition  int (Q_c')^2 = alpha^-2 int Q_c^2  with c = omega + alpha^-2.
Solving the balance gives c = (p+3) omega / 4 and alpha0 = 2/sqrt((p-1) omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import betaln

from .errors import InvalidParameter, OutOfValidityRange, QuadratureFailure

__all__ = [
    "SolitonParams",
    "QNorms",
    "balance_constants",
    "eval_q",
    "eval_dq",
    "eval_dcq",
    "q_norms",
    "balance_residual",
    "gamma_growth",
]

# Quadrature window: |x| <= X with X = soliton width * 60, so the sech tail
# is below 1e-20 of the peak for every p > 1.
_TAIL_WIDTHS = 60.0


@dataclass(frozen=True)
class SolitonParams:
    """Scalar constants of the 1D limiting problem.

    Attributes
    ----------
    p : nonlinearity exponent, p > 1 (free real parameter, not an integer).
    omega : frequency, omega > 0.
    c : effective 1D frequency, c = (p+3) omega / 4 = omega + alpha0^-2.
    alpha0 : scaled ring radius (ring sits at rbar = alpha0 * m).
    A : peak amplitude, A^(p-1) = (p+1) c / 2.
    lambda0 : positive-eigenvalue factor (p-1)(p+3)/4 of the scaled
        second-variation operator.
    gamma : long-wave growth coefficient (2 ||Q_c||^2 / (d/dc ||Q_c||^2))^(1/2);
        None for p >= 5 where d/dc ||Q_c||^2 <= 0.
    beta_exp : unstable-index exponent min(p-1, 1)/6.
    """

    p: float
    omega: float
    c: float
    alpha0: float
    A: float
    lambda0: float
    gamma: float | None
    beta_exp: float

    @property
    def rbar_per_m(self) -> float:
        return self.alpha0

    def rbar(self, m: int) -> float:
        return self.alpha0 * m


def balance_constants(p: float, omega: float) -> SolitonParams:
    """Solve the ring-balance condition for (c, alpha0) and derived constants.

    Raises InvalidParameter unless p > 1 and omega > 0.  gamma is populated
    only for p < 5.
    """
    if not (p > 1.0):
        raise InvalidParameter(f"need p > 1, got p={p}")
    if not (omega > 0.0):
        raise InvalidParameter(f"need omega > 0, got omega={omega}")
    c = (p + 3.0) * omega / 4.0
    alpha0 = 2.0 / math.sqrt((p - 1.0) * omega)
    A = ((p + 1.0) * c / 2.0) ** (1.0 / (p - 1.0))
    lambda0 = (p - 1.0) * (p + 3.0) / 4.0
    gamma = 2.0 * math.sqrt((p - 1.0) * c / (5.0 - p)) if p < 5.0 else None
    beta_exp = min(p - 1.0, 1.0) / 6.0
    return SolitonParams(
        p=p, omega=omega, c=c, alpha0=alpha0, A=A,
        lambda0=lambda0, gamma=gamma, beta_exp=beta_exp,
    )


def _kx(params: SolitonParams, x):
    # argument of the sech: (p-1) sqrt(c) x / 2
    return 0.5 * (params.p - 1.0) * math.sqrt(params.c) * np.asarray(x, dtype=float)


def eval_q(params: SolitonParams, x):
    """Q_c(x); accepts scalars or arrays."""
    a = 2.0 / (params.p - 1.0)
    # sech**a via cosh**-a; cosh overflows near 710, so clamp the argument
    # (the true value underflows to 0 long before that for a >= 2/(p-1)).
    z = np.minimum(np.abs(_kx(params, x)), 700.0)
    return params.A * np.cosh(z) ** (-a)


def eval_dq(params: SolitonParams, x):
    """dQ_c/dx by the analytic chain rule."""
    a = 2.0 / (params.p - 1.0)
    k = 0.5 * (params.p - 1.0) * math.sqrt(params.c)
    z = _kx(params, x)
    return -a * k * eval_q(params, x) * np.tanh(z)


def eval_dcq(params: SolitonParams, x):
    """dQ_c/dc via the scaling identity Q_c(x) = c^(1/(p-1)) g(sqrt(c) x):

        d_c Q_c(x) = Q_c(x) / ((p-1) c) + x Q_c'(x) / (2 c).
    """
    x = np.asarray(x, dtype=float)
    return eval_q(params, x) / ((params.p - 1.0) * params.c) \
        + x * eval_dq(params, x) / (2.0 * params.c)


def _beta(a: float, b: float) -> float:
    # log-gamma route: 2/(p-1) is large near p = 1 and B would overflow.
    return math.exp(betaln(a, b))


@dataclass(frozen=True)
class QNorms:
    """Exact and quadrature norms of Q_c.

    L2_sq and dL2_sq come from the closed Beta-function formulas; dNdc from
    the power law ||Q_c||^2 ~ c^((5-p)/(2(p-1))); dcq_L2_sq and xq_L2_sq
    from adaptive quadrature.
    """

    L2_sq: float
    dL2_sq: float
    dNdc: float
    dcq_L2_sq: float
    xq_L2_sq: float


def _closed_norms(p: float, c: float) -> tuple[float, float]:
    """(int Q_c^2, int (Q_c')^2) via Beta functions."""
    A_sq = ((p + 1.0) * c / 2.0) ** (2.0 / (p - 1.0))
    two_over = 2.0 / (p - 1.0)
    l2 = 2.0 * A_sq / ((p - 1.0) * math.sqrt(c)) * _beta(two_over, 0.5)
    dl2 = 2.0 * math.sqrt(c) * A_sq / (p - 1.0) * _beta(two_over, 1.5)
    return l2, dl2


def _quad_sym(f, X: float, rtol: float = 1e-12) -> float:
    val, err = quad(f, -X, X, epsabs=0.0, epsrel=rtol, limit=400)
    if not np.isfinite(val) or (val != 0.0 and err > 100.0 * rtol * abs(val)):
        raise QuadratureFailure(
            f"adaptive quadrature error {err:.3e} exceeds tolerance for value {val:.6e}")
    return val


def quad_window(params: SolitonParams) -> float:
    """Truncation half-width: 60 soliton widths."""
    return _TAIL_WIDTHS * 2.0 / ((params.p - 1.0) * math.sqrt(params.c))


def q_norms(params: SolitonParams) -> QNorms:
    """Integral norms of Q_c used throughout the reduced model."""
    p, c = params.p, params.c
    l2, dl2 = _closed_norms(p, c)
    dndc = (5.0 - p) / (2.0 * (p - 1.0)) * l2 / c
    X = quad_window(params)
    dcq = _quad_sym(lambda x: eval_dcq(params, x) ** 2, X)
    xq = _quad_sym(lambda x: (x * eval_q(params, x)) ** 2, X)
    return QNorms(L2_sq=l2, dL2_sq=dl2, dNdc=dndc, dcq_L2_sq=dcq, xq_L2_sq=xq)


def balance_residual(p: float, omega: float, alpha: float) -> float:
    """Reduced bifurcation function int (Q_c')^2 - alpha^-2 int Q_c^2
    with c = omega + alpha^-2; its root in alpha is alpha0.
    """
    if not (alpha > 0.0):
        raise InvalidParameter(f"need alpha > 0, got {alpha}")
    if not (p > 1.0) or not (omega > 0.0):
        raise InvalidParameter(f"need p > 1 and omega > 0, got p={p}, omega={omega}")
    c = omega + alpha ** -2
    l2, dl2 = _closed_norms(p, c)
    return dl2 - l2 / alpha ** 2


def gamma_growth(params: SolitonParams) -> float:
    """Growth coefficient gamma = (2 ||Q_c||^2 / (d/dc ||Q_c||^2))^(1/2).

    Equals 2 sqrt((p-1) c / (5-p)); computed here from the norms so the two
    routes can be cross-checked.  Raises OutOfValidityRange for p >= 5 where
    d/dc ||Q_c||^2 is no longer positive.
    """
    if params.p >= 5.0:
        raise OutOfValidityRange(
            f"growth coefficient requires 1 < p < 5, got p={params.p}")
    n = q_norms(params)
    return math.sqrt(2.0 * n.L2_sq / n.dNdc)
