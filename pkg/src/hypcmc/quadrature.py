"""Double-exponential (tanh-sinh) quadrature for integrals with
inverse-square-root endpoint singularities, plus the specific integrals
of this problem: the period T, the flux K(C, H), the threshold value
xi_n(H), and the analytic limits at C0.

The central numerical idea: integrands are given a chance to receive the
*offsets* from the interval endpoints (da = x - lower, db = upper - x)
instead of recomputing them from x.  Near an endpoint, x rounds to the
endpoint long before da underflows, so offset-aware integrands keep full
relative accuracy right into the singularity.  The potential q is
evaluated there in deflated form q = da * db * s(v), where s is the
polynomial left after synthetically dividing p(v) = v^(2n-2) q(v) by its
two computed roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DomainError,
    EvaluationError,
    GuardBandError,
    LandmarkError,
)
from .potential import (
    Ctilde,
    Q_coefficients,
    ShapeParams,
    eval_h,
    oscillation_roots,
    p_coefficients,
)

DEFAULT_TOL = 1e-11
DEFAULT_MAX_LEVEL = 12
# Relative half-width of the band around Ctilde inside which flux_K
# refuses to run (the interior near-singularity at v = sqrt(-C) ruins
# convergence); the Ctilde value itself is served exactly by xi().
CTILDE_GUARD_REL = 1e-9

# abscissa cutoff: beyond this |t| the transformed node offsets underflow
_T_CUTOFF = 6.1


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class SingularIntegrand:
    """An integrand on (lower, upper), finite on the open interval.

    ``integrand`` maps a point to a value.  When ``offset_integrand`` is
    provided it is preferred: it receives (x, da, db) with da = x - lower
    and db = upper - x computed in the transformed variable, which stays
    accurate where x itself has rounded onto an endpoint.
    """

    lower: float
    upper: float
    integrand: Callable[[float], float]
    singularity_class: str = "both"
    offset_integrand: Optional[Callable[[float, float, float], float]] = None


def _call_integrand(f, x, da, db, offset_aware):
    if offset_aware:
        return np.asarray(f(x, da, db), dtype=float)
    try:
        vals = np.asarray(f(x), dtype=float)
        if vals.shape == x.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([f(xi) for xi in x], dtype=float)


def de_integrate(spec: SingularIntegrand, tol: float = DEFAULT_TOL,
                 max_level: int = DEFAULT_MAX_LEVEL) -> QuadResult:
    """Tanh-sinh quadrature with level doubling, open rule.

    Levels are doubled until two successive values agree within ``tol``
    or ``max_level`` is reached; the reported error estimate is the last
    inter-level difference.  Endpoints are never evaluated.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    a, b = float(spec.lower), float(spec.upper)
    if not a < b:
        raise DomainError(f"need lower < upper, got [{a}, {b}]")
    width = b - a
    offset_aware = spec.offset_integrand is not None
    f = spec.offset_integrand if offset_aware else spec.integrand

    total = 0.0  # running sum of F * weight (without the h factor)
    evaluations = 0
    prev_value = None
    prev_err = math.inf
    value = 0.0
    err = math.inf
    for level in range(max_level + 1):
        h = 2.0 ** (-level)
        kmax = int(_T_CUTOFF / h)
        if level == 0:
            ks = np.arange(-kmax, kmax + 1)
        else:
            ks = np.arange(-kmax, kmax + 1)
            ks = ks[ks % 2 != 0]
        t = ks * h
        u = 0.5 * np.pi * np.sinh(t)
        em = np.exp(-2.0 * np.abs(u))
        near = width * em / (1.0 + em)   # offset from the nearer endpoint
        far = width / (1.0 + em)         # offset from the farther endpoint
        da = np.where(u < 0, near, far)
        db = np.where(u < 0, far, near)
        x = np.where(u < 0, a + da, b - db)
        weight = np.pi * np.cosh(t) * da * db / width
        keep = (da > 0) & (db > 0) & np.isfinite(weight)
        if not offset_aware:
            # a plain integrand can only be evaluated at nodes that are
            # still interior after rounding; the discarded tail limits
            # attainable accuracy to ~sqrt(eps) for singular endpoints
            # away from zero (use an offset integrand to go below that)
            keep &= (x > a) & (x < b)
        x, da, db, weight = x[keep], da[keep], db[keep], weight[keep]

        vals = _call_integrand(f, x, da, db, offset_aware)
        bad = ~np.isfinite(vals)
        if np.any(bad):
            where = float(x[bad][0])
            raise EvaluationError(
                f"integrand returned a non-finite value at v={where!r}",
                abscissa=where,
            )
        evaluations += len(vals)
        # fixed ascending-t summation order keeps repeated runs bit-identical
        total += float(np.sum(vals * weight))
        value = h * total
        if prev_value is not None:
            err = abs(value - prev_value)
            # demand two consecutive quiet levels: a narrow interior
            # spike (C near Ctilde) is invisible to coarse levels and a
            # single small difference can be a false plateau
            if level >= 3 and err <= tol and prev_err <= tol:
                return QuadResult(value, err, evaluations, True)
            prev_err = err
        prev_value = value
    return QuadResult(value, err, evaluations, False)


def _synthetic_deflate(coeffs: np.ndarray, root: float) -> np.ndarray:
    """Divide a polynomial (highest-first coefficients) by (v - root)."""
    out = np.empty(len(coeffs) - 1)
    acc = coeffs[0]
    for i in range(len(coeffs) - 1):
        out[i] = acc
        acc = coeffs[i + 1] + root * acc
    return out


def _deflated_q_factory(n, H, C, t1, t2):
    """Return s(v) with q(v) = (v - t1)(t2 - v) s(v), s > 0 on (t1, t2)."""
    rem = _synthetic_deflate(p_coefficients(n, H, C), t1)
    rem = _synthetic_deflate(rem, t2)

    def s(v):
        return -np.polyval(rem, v) * v ** (2 - 2 * n)

    return s


def period_T(params: ShapeParams, tol: float = DEFAULT_TOL,
             max_level: int = DEFAULT_MAX_LEVEL) -> QuadResult:
    """Period of g: T = 2 * integral over (t1, t2) of dv / sqrt(q(v))."""
    if params.C is None:
        raise DomainError("period_T requires C")
    t1, t2 = oscillation_roots(params)
    s = _deflated_q_factory(params.n, params.H, params.C, t1, t2)

    def fo(v, da, db):
        return 1.0 / np.sqrt(da * db * s(v))

    spec = SingularIntegrand(
        lower=t1, upper=t2,
        integrand=lambda v: 1.0 / math.sqrt(max((v - t1) * (t2 - v) * s(v), 0.0)),
        singularity_class="both", offset_integrand=fo,
    )
    res = de_integrate(spec, tol=tol, max_level=max_level)
    return QuadResult(2 * res.value, 2 * res.abs_error_estimate,
                      res.evaluations, res.converged)


def _flux_ingredients(params: ShapeParams):
    """Roots, deflated potential factor and pole data for the flux.

    Returns (t1, t2, s, vc, d) with q(v) = (v - t1)(t2 - v) s(v),
    vc = sqrt(-C) the location of the pole of the angle rate, and
    d = t1 - vc its (always positive) offset from the lower root.
    """
    n, H, C = params.n, params.H, params.C
    t1, t2 = oscillation_roots(params)
    vc = math.sqrt(-C)
    s = _deflated_q_factory(n, H, C, t1, t2)
    # Direct subtraction t1 - vc cancels catastrophically when C is near
    # Ctilde (t1 -> vc there), so use the identity
    # q(vc) = -(-C) (H + (-C)^(-n/2))^2 with the deflated form of q,
    # which gives d in terms of relatively accurate quantities.
    delta = H + (-C) ** (-n / 2)
    d = (-C) * delta * delta / ((t2 - vc) * float(s(vc)))
    if d <= 0:
        raise DomainError(
            f"sqrt(-C)={vc} is not below t1={t1}; the profile would leave r >= 1"
        )
    return t1, t2, s, vc, d


def flux_K(params: ShapeParams, tol: float = DEFAULT_TOL,
           max_level: int = DEFAULT_MAX_LEVEL) -> QuadResult:
    """Flux K(C, H): total turning of theta over one period of g.

    K = integral over (t1, t2) of
        2 sqrt(-C) (1 + H v^n) v^(1-n) / ((C + v^2) sqrt(q(v))) dv.

    The pole factor C + v^2 vanishes at v = sqrt(-C) < t1; it is written
    as (da + d)(v + sqrt(-C)) with d = t1 - sqrt(-C), so the integrand
    keeps relative accuracy when d is tiny (C near Ctilde, where the
    profile passes close to the rotation axis).  Inside the guard band
    around Ctilde the computation is refused: use xi() there.
    """
    if params.C is None:
        raise DomainError("flux_K requires C")
    n, H, C = params.n, params.H, params.C
    ct = Ctilde(n, H)
    if abs(C - ct) < CTILDE_GUARD_REL * abs(ct):
        raise GuardBandError(
            f"C={C} is within the guard band around Ctilde={ct}; "
            "the flux there is xi(n, H)"
        )
    t1, t2, s, vc, d = _flux_ingredients(params)

    def fo(v, da, db):
        return (2 * vc * (1 + H * v ** n) * v ** (1 - n)
                / ((da + d) * (v + vc) * np.sqrt(da * db * s(v))))

    spec = SingularIntegrand(
        lower=t1, upper=t2,
        integrand=lambda v: (2 * vc * (1 + H * v ** n) * v ** (1 - n)
                             / ((C + v * v)
                                * math.sqrt(max((v - t1) * (t2 - v) * s(v), 0.0)))),
        singularity_class="both", offset_integrand=fo,
    )
    return de_integrate(spec, tol=tol, max_level=max_level)


def _Q_upper_root(n: int, H: float) -> float:
    """The root of Q above 1 (the scaled upper turning point at C = Ctilde)."""
    coeffs = Q_coefficients(n, H)

    def pq(v):
        return np.polyval(coeffs, v)

    delta = 1e-9
    while pq(1.0 + delta) >= 0:
        delta *= 2
        if delta > 1e13:
            raise LandmarkError(
                f"Q(n={n}, H={H}) has no root above 1; xi is not defined here"
            )
    lo = 1.0 + delta / 2 if pq(1.0 + delta / 2) > 0 else 1.0 + 1e-9
    t2 = brentq(pq, lo, 1.0 + delta, xtol=1e-15, rtol=8.9e-16)
    dcoeffs = np.polyder(coeffs)
    for _ in range(2):
        t2 -= pq(t2) / np.polyval(dcoeffs, t2)
    return float(t2)


def xi(n: int, H: float, tol: float = DEFAULT_TOL,
       max_level: int = DEFAULT_MAX_LEVEL) -> QuadResult:
    """xi_n(H): the flux at the threshold constant C = Ctilde.

    Evaluated as the integral over (1, t2~) of h(v) / sqrt(Q(v)) dv, where
    Q has a simple zero at both endpoints and h(1) = n H is finite, so
    both endpoints carry clean inverse-square-root singularities.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n}")
    if H > -1:
        raise DomainError(f"xi requires H <= -1, got {H}")
    t2 = _Q_upper_root(n, H)
    rem = _synthetic_deflate(Q_coefficients(n, H), 1.0)
    rem = _synthetic_deflate(rem, t2)

    def s(v):
        return -np.polyval(rem, v) * v ** (2 - 2 * n)

    def fo(v, da, db):
        return eval_h(n, H, v) / np.sqrt(da * db * s(v))

    spec = SingularIntegrand(
        lower=1.0, upper=t2,
        integrand=lambda v: eval_h(n, H, v)
        / math.sqrt(max((v - 1.0) * (t2 - v) * s(v), 0.0)),
        singularity_class="both", offset_integrand=fo,
    )
    return de_integrate(spec, tol=tol, max_level=max_level)


def K_limit_at_C0(n: int, H: float) -> float:
    """Closed-form limit of K(C, H) as C -> C0 (degenerate oscillation)."""
    if not H < -1:
        raise DomainError(f"H must be < -1, got {H}")
    root = math.sqrt(n * n * H * H - 4 * (n - 1))
    return -math.sqrt(2.0) * math.sqrt(1.0 - n * H / root) * math.pi


def b2(H: float) -> float:
    """n = 2 closed form of the same limit."""
    if not H < -1:
        raise DomainError(f"H must be < -1, got {H}")
    return -math.pi * math.sqrt(2.0 - 2.0 * H / math.sqrt(H * H - 1.0))
