"""Potential function q, its relatives (p, q-tilde, Q, h), landmark
constants and the oscillation roots.

All formulas are closed-form in the shape parameters (n, H, C).  The
convention throughout the package: n >= 2 is an integer, H < -1 is the
mean curvature, and C is the (negative) first-integral constant, only
meaningful inside (C0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateOscillationError,
    DomainError,
    ParameterRangeError,
)

# C closer to C0 than this (relative) is reported as degenerate rather
# than producing roots t1 ~ t2 of unreliable accuracy.
DEGENERATE_REL_GAP = 1e-12


@dataclass(frozen=True)
class ShapeParams:
    """The triple (n, H, C) parametrizing one candidate hypersurface.

    C may be omitted (None) while only H-level quantities are needed.
    """

    n: int
    H: float
    C: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not self.H < -1:
            raise DomainError(f"H must be < -1, got {self.H}")
        if self.C is not None:
            c0 = C0(self.n, self.H)
            if not (c0 < self.C < 0):
                raise ParameterRangeError(
                    f"C={self.C} outside (C0, 0) with C0={c0}: "
                    + ("violates C > C0" if self.C <= c0 else "violates C < 0")
                )


@dataclass(frozen=True)
class PotentialLandmarks:
    """Derived constants of the potential for fixed (n, H) and optional C."""

    v0: float
    C0: float
    Ctilde: float
    C1: Optional[float]  # n=2 alias of C0
    t1: Optional[float] = None
    t2: Optional[float] = None
    t1_scaled: Optional[float] = None
    t2_scaled: Optional[float] = None


def _check_positive(v):
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("q and its relatives are only defined for v > 0")
    return arr


def eval_q(params: ShapeParams, v):
    """q(v) = C - v^(2-2n) + (1-H^2) v^2 - 2 H v^(2-n)."""
    if params.C is None:
        raise DomainError("eval_q requires C to be present")
    n, H, C = params.n, params.H, params.C
    v = _check_positive(v)
    out = C - v ** (2 - 2 * n) + (1 - H * H) * v * v - 2 * H * v ** (2 - n)
    return float(out) if out.ndim == 0 else out


def eval_q_prime(params: ShapeParams, v):
    """Derivative q'(v)."""
    n, H = params.n, params.H
    v = _check_positive(v)
    out = (
        (2 * n - 2) * v ** (1 - 2 * n)
        + 2 * (1 - H * H) * v
        + 2 * H * (n - 2) * v ** (1 - n)
    )
    return float(out) if out.ndim == 0 else out


def p_coefficients(n: int, H: float, C: float) -> np.ndarray:
    """Coefficients (highest degree first) of p(v) = v^(2n-2) q(v).

    p is a degree-2n polynomial: (1-H^2) v^(2n) + C v^(2n-2) - 2H v^n - 1.
    For n = 2 the C and -2H terms share the v^2 slot.
    """
    coeffs = np.zeros(2 * n + 1)
    coeffs[0] = 1 - H * H
    coeffs[2] += C
    coeffs[n] += -2 * H
    coeffs[2 * n] += -1.0
    return coeffs


def eval_p(params: ShapeParams, v):
    """p(v) = v^(2n-2) q(v), a polynomial for integer n."""
    if params.C is None:
        raise DomainError("eval_p requires C to be present")
    v = _check_positive(v)
    out = np.polyval(p_coefficients(params.n, params.H, params.C), v)
    return float(out) if np.ndim(out) == 0 else out


def v0(n: int, H: float) -> float:
    """Unique positive critical point of q."""
    s = math.sqrt(n * n * H * H - 4 * n + 4)
    return ((H * (n - 2) + s) / (2 * H * H - 2)) ** (1.0 / n)


def C0(n: int, H: float) -> float:
    """Lower bound for C: q has two positive roots iff C0 < C < 0."""
    s = math.sqrt(n * n * H * H - 4 * n + 4)
    num = H * H * n - 2 + H * s
    den = (H * (n - 2) + s) ** ((2 * n - 2) / n)
    return n * (num / den) * (2 * H * H - 2) ** ((n - 2) / n)


def C1(H: float) -> float:
    """n = 2 closed form of the lower bound: 2 (H + sqrt(H^2 - 1))."""
    return 2 * (H + math.sqrt(H * H - 1))


def Ctilde(n: int, H: float) -> float:
    """Sign threshold for lambda: -(-H)^(-2/n)."""
    return -((-H) ** (-2.0 / n))


def landmarks(n: int, H: float, C: Optional[float] = None) -> PotentialLandmarks:
    """Compute v0, C0, Ctilde (and C1 at n=2); with C also t1, t2.

    Raises a range error naming the violated bound when C is outside
    (C0, 0).
    """
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n}")
    if not H < -1:
        raise DomainError(f"H must be < -1, got {H}")
    _v0 = v0(n, H)
    _c0 = C0(n, H)
    _ct = Ctilde(n, H)
    _c1 = C1(H) if n == 2 else None
    if C is None:
        return PotentialLandmarks(v0=_v0, C0=_c0, Ctilde=_ct, C1=_c1)
    if not _c0 < C:
        raise ParameterRangeError(f"C={C} violates the bound C > C0 = {_c0}")
    if not C < 0:
        raise ParameterRangeError(f"C={C} violates the bound C < 0")
    params = ShapeParams(n=n, H=H, C=C)
    t1, t2 = oscillation_roots(params)
    s = math.sqrt(-C)
    return PotentialLandmarks(
        v0=_v0, C0=_c0, Ctilde=_ct, C1=_c1,
        t1=t1, t2=t2, t1_scaled=t1 / s, t2_scaled=t2 / s,
    )


def oscillation_roots(params: ShapeParams) -> tuple[float, float]:
    """The two positive roots t1 < t2 of q, via the polynomial p.

    Root finding runs on p(v) = v^(2n-2) q(v) to avoid the negative-power
    cancellation of q near v -> 0: p(0) = -1 and the leading coefficient
    1 - H^2 is negative, so brackets (eps*v0, v0) and (v0, V) with V
    doubled until p(V) < 0 are guaranteed to straddle sign changes.
    """
    if params.C is None:
        raise ParameterRangeError("oscillation_roots requires C")
    n, H, C = params.n, params.H, params.C
    _v0 = v0(n, H)
    _c0 = C0(n, H)
    if C - _c0 < DEGENERATE_REL_GAP * abs(_c0):
        raise DegenerateOscillationError(
            f"C - C0 = {C - _c0:.3e} is below {DEGENERATE_REL_GAP}*|C0|; "
            "the oscillation interval is numerically degenerate"
        )
    coeffs = p_coefficients(n, H, C)

    def p(v):
        return np.polyval(coeffs, v)

    lo = 1e-9 * _v0
    t1 = brentq(p, lo, _v0, xtol=1e-15, rtol=8.9e-16)
    hi = 2 * _v0
    while p(hi) >= 0:
        hi *= 2
        if hi > 1e12:
            raise ParameterRangeError("upper root bracket expansion failed")
    t2 = brentq(p, _v0, hi, xtol=1e-15, rtol=8.9e-16)

    # One Newton polish per root pushes the relative residual of q to
    # machine level even when brentq stops on the xtol criterion.
    dcoeffs = np.polyder(coeffs)
    for _ in range(2):
        t1 -= p(t1) / np.polyval(dcoeffs, t1)
        t2 -= p(t2) / np.polyval(dcoeffs, t2)
    return float(t1), float(t2)


def eval_Q(n: int, H: float, v):
    """Q(v) = -1 + v^2 - H^2 v^2 - H^2 v^(2-2n) + 2 H^2 v^(2-n).

    The H <= -1 boundary is allowed here: xi_n is tabulated at H = -1.
    """
    v = _check_positive(v)
    H2 = H * H
    out = -1 + v * v - H2 * v * v - H2 * v ** (2 - 2 * n) + 2 * H2 * v ** (2 - n)
    return float(out) if out.ndim == 0 else out


def Q_coefficients(n: int, H: float) -> np.ndarray:
    """Coefficients (highest first) of v^(2n-2) Q(v), a degree-2n polynomial."""
    H2 = H * H
    coeffs = np.zeros(2 * n + 1)
    coeffs[0] = 1 - H2
    coeffs[2] += -1.0
    coeffs[n] += 2 * H2
    coeffs[2 * n] += -H2
    return coeffs


def eval_h(n: int, H: float, v):
    """h(v) = 2 H v^(1-n) (1 + v + ... + v^(n-1)) / (1 + v).

    Uses the factored polynomial-quotient form (Horner on the geometric
    sum) so the removable point v = 1 is regular: h(1) = n H exactly.
    """
    v = _check_positive(v)
    geom = np.polyval(np.ones(n), v)
    out = 2 * H * v ** (1 - n) * geom / (1 + v)
    return float(out) if np.ndim(out) == 0 else out


def eval_q_tilde(params: ShapeParams, v):
    """q-tilde(v) = -(1/C) q(sqrt(-C) v), the unit-normalized potential."""
    if params.C is None:
        raise DomainError("eval_q_tilde requires C to be present")
    v = _check_positive(v)
    s = math.sqrt(-params.C)
    return eval_q(params, s * v) / (-params.C)
