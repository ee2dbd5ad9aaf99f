"""Projection onto the constraint sets of the variational problem.

For a sign-changing field u the pair map

    g1(s, t) = (J'(s u+ + t u-), s u+),   g2(s, t) = (J'(s u+ + t u-), t u-)

has a unique positive root (s_u, t_u); the projected field s_u u+ + t_u u-
satisfies both constraints.  Roots are localized by bisection of a square
whose corner signs certify a root (a two-dimensional intermediate-value
argument in the style of Miranda's theorem), then polished by damped Newton
with the analytic 2x2 Jacobian.  The certificate uses the monotonicity of
g1 in t and of g2 in s, which holds because every coupling term carries a
factor -K >= 0 or a product of squared gradient norms.

The scalar projection (J'(s u), s u) = 0 handles the whole-ray constraint
set; it ignores the sign structure of u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import Field, split_signs
from .energy import Problem, SplitScalars
from .errors import InvalidInputError, NumericalFailureError

_BRACKET_MIN = 2.0**-60
_BRACKET_MAX = 2.0**60


@dataclass(frozen=True)
class NehariProjection:
    """Result of a pair projection: scalings, residuals, bracket, trace."""

    s: float
    t: float
    residual_g1: float
    residual_g2: float
    bracket: tuple[float, float]
    iterations: int
    converged: bool


def g_pair(u: Field, s: float, t: float, problem: Problem) -> tuple[float, float]:
    """(g1(s,t), g2(s,t)) via the closed forms in the split scalars."""
    if not (s > 0 and t > 0):
        raise InvalidInputError("scaling factors must be positive")
    sc = SplitScalars.from_field(u, problem)
    _require_sign_changing(sc)
    return float(sc.g1(s, t)), float(sc.g2(s, t))


def _require_sign_changing(sc: SplitScalars) -> None:
    if not sc.sign_changing:
        raise InvalidInputError("field must have nonvanishing positive and negative parts")


def _diag_signs(sc: SplitScalars, s: float) -> tuple[float, float]:
    return sc.g1s(s, s), sc.g2s(s, s)


def _find_bracket_scalars(sc: SplitScalars) -> tuple[float, float]:
    # Geometric search outward from s = 1 for the diagonal sign pattern
    # g1(r,r) > 0, g2(r,r) > 0, g1(R,R) < 0, g2(R,R) < 0.
    r = 1.0
    while True:
        v1, v2 = _diag_signs(sc, r)
        if v1 > 0 and v2 > 0:
            break
        r *= 0.5
        if r < _BRACKET_MIN:
            raise NumericalFailureError("no lower bracket for the pair projection")
    R = max(1.0, 2.0 * r)
    while True:
        v1, v2 = _diag_signs(sc, R)
        if v1 < 0 and v2 < 0:
            break
        R *= 2.0
        if R > _BRACKET_MAX:
            raise NumericalFailureError("no upper bracket for the pair projection")
    return r, R


def find_bracket(u: Field, problem: Problem) -> tuple[float, float]:
    """Bracket (r, R) with the four strict diagonal sign conditions."""
    sc = SplitScalars.from_field(u, problem)
    _require_sign_changing(sc)
    return _find_bracket_scalars(sc)


def _miranda_bisect(sc: SplitScalars, square, coarse: float, max_steps: int = 200):
    """Shrink a sign-certified square; corner certificates suffice.

    Invariant: g1, g2 > 0 at the south-west corner and < 0 at the north-east
    corner.  With g1 nondecreasing in t and g2 nondecreasing in s this pins
    the full edge sign pattern, so the square always contains a root.
    """
    s_lo, s_hi, t_lo, t_hi = square

    def pair(s, t):
        return sc.g1s(s, t), sc.g2s(s, t)

    steps = 0
    for _ in range(max_steps):
        if max(s_hi - s_lo, t_hi - t_lo) <= coarse * (s_hi + t_hi):
            break
        sm = 0.5 * (s_lo + s_hi)
        tm = 0.5 * (t_lo + t_hi)
        center = pair(sm, tm)
        south = pair(sm, t_lo)
        north = pair(sm, t_hi)
        west = pair(s_lo, tm)
        east = pair(s_hi, tm)
        pos = lambda v: v[0] > 0 and v[1] > 0
        neg = lambda v: v[0] < 0 and v[1] < 0
        if neg(center):  # south-west quadrant
            s_hi, t_hi = sm, tm
        elif pos(center):  # north-east quadrant
            s_lo, t_lo = sm, tm
        elif pos(south) and neg(east):  # south-east quadrant
            s_lo, t_hi = sm, tm
        elif pos(west) and neg(north):  # north-west quadrant
            s_hi, t_lo = sm, tm
        elif neg(north):  # left half
            s_hi = sm
        elif pos(south):  # right half
            s_lo = sm
        elif neg(east):  # bottom half
            t_hi = tm
        elif pos(west):  # top half
            t_lo = tm
        else:
            break  # no certified sub-square; hand the cell to Newton
        steps += 1
    return (s_lo, s_hi, t_lo, t_hi), steps


def _pair_converged(sc: SplitScalars, s: float, t: float, g, tol: float) -> bool:
    # Term-magnitude scaling per component: rejects the degenerate cone
    # boundary, where g2 (say) vanishes linearly in t without being a root.
    s1, s2 = sc.g_scales(s, t)
    return abs(g[0]) < tol * s1 and abs(g[1]) < tol * s2


def _newton_pair(sc: SplitScalars, s: float, t: float, tol: float, max_iter: int = 80):
    """Damped Newton on (g1, g2) with backtracking on the residual norm."""
    g = np.array([sc.g1s(s, t), sc.g2s(s, t)], dtype=float)
    its = 0
    for _ in range(max_iter):
        if _pair_converged(sc, s, t, g, tol):
            return s, t, g, its, True
        jac = sc.g_jacobian(s, t)
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            return s, t, g, its, False
        gn = float(np.hypot(*g))
        gamma = 1.0
        while gamma > 2.0**-40:
            s_new, t_new = s + gamma * step[0], t + gamma * step[1]
            if s_new > 0 and t_new > 0:
                g_new = np.array([sc.g1s(s_new, t_new), sc.g2s(s_new, t_new)], dtype=float)
                if float(np.hypot(*g_new)) <= (1.0 - 1e-4 * gamma) * gn:
                    s, t, g = s_new, t_new, g_new
                    break
            gamma *= 0.5
        else:
            return s, t, g, its, False
        its += 1
    return s, t, g, its, _pair_converged(sc, s, t, g, tol)


def project_pair_scalars(sc: SplitScalars, tol: float = 1e-10) -> NehariProjection:
    """Pair projection from precomputed split scalars (see project_pair)."""
    _require_sign_changing(sc)
    r, R = _find_bracket_scalars(sc)
    square, steps = _miranda_bisect(sc, (r, R, r, R), coarse=5e-3)
    s0 = 0.5 * (square[0] + square[1])
    t0 = 0.5 * (square[2] + square[3])
    s, t, g, its, ok = _newton_pair(sc, s0, t0, tol)
    if not ok:
        # Pure bisection fallback: resume shrinking the certified square to
        # floating-point width, then retry Newton from its center.
        square, extra = _miranda_bisect(sc, square, coarse=1e-14, max_steps=300)
        steps += extra
        s0 = 0.5 * (square[0] + square[1])
        t0 = 0.5 * (square[2] + square[3])
        s, t, g, its, ok = _newton_pair(sc, s0, t0, tol)
    if not ok:
        g0 = np.array([sc.g1s(s0, t0), sc.g2s(s0, t0)], dtype=float)
        if _pair_converged(sc, s0, t0, g0, tol):
            s, t, g, ok = s0, t0, g0, True
        else:
            raise NumericalFailureError("pair projection failed to converge")
    return NehariProjection(
        s=float(s),
        t=float(t),
        residual_g1=float(g[0]),
        residual_g2=float(g[1]),
        bracket=(r, R),
        iterations=steps + its,
        converged=bool(ok),
    )


def project_pair(u: Field, problem: Problem, tol: float = 1e-10) -> NehariProjection:
    """Unique (s, t) with s u+ + t u- on the sign-changing constraint set.

    Residuals are driven below tol * (1 + |s u+ + t u-|_H^2).  Inputs with a
    vanishing sign part are rejected: the sign-changing set requires both.
    """
    sc = SplitScalars.from_field(u, problem)
    return project_pair_scalars(sc, tol)


def projected_field(u: Field, proj: NehariProjection) -> Field:
    pos, neg = split_signs(u)
    return proj.s * pos + proj.t * neg


# -- scalar (whole-ray) projection --------------------------------------------


def _scalar_fun(sc, s: float) -> float:
    # (J'(s u), s u) for the whole field u: s^2 A + b s^4 G^2 - s^p L - s^p log(s^2) P.
    A, G, P, L, b, p = sc
    return s * s * A + b * s**4 * G * G - s**p * L - s**p * 2.0 * np.log(s) * P


def _scalar_scale(sc, s: float) -> float:
    # Term-magnitude scale of the ray constraint function (see g_scales).
    A, G, P, L, b, p = sc
    sp = s**p
    return s * s * A + b * s**4 * G * G + sp * abs(L) + sp * abs(2.0 * np.log(s)) * P


def _scalar_fun_deriv(sc, s: float) -> float:
    A, G, P, L, b, p = sc
    return (
        2.0 * s * A
        + 4.0 * b * s**3 * G * G
        - p * s ** (p - 1.0) * L
        - (p * s ** (p - 1.0) * 2.0 * np.log(s) + 2.0 * s ** (p - 1.0)) * P
    )


def project_scalar(u: Field, problem: Problem, tol: float = 1e-10) -> float:
    """s > 0 with (J'(s u), s u) = 0, by bracketed bisection plus Newton.

    The constraint ignores the sign structure: u is scaled as a whole.
    """
    return project_scalar_with_level(u, problem, tol)[0]


def project_scalar_with_level(u: Field, problem: Problem, tol: float = 1e-10) -> tuple[float, float]:
    """Scalar projection plus J(s u) evaluated in closed form."""
    P = problem.p_integral(u)
    if not P > 0:
        raise InvalidInputError("cannot project the zero field")
    sc = (problem.norm_h_sq(u), problem.grad_sq(u), P, problem.plog_integral(u), problem.params.b, problem.params.p)
    s = _scalar_root(sc, tol)
    A, G, Pv, L, b, p = sc
    sp = s**p
    level = 0.5 * s * s * A + 0.25 * b * s**4 * G * G + (2.0 / p**2) * sp * Pv - (sp * L + sp * 2.0 * np.log(s) * Pv) / p
    return float(s), float(level)


def _scalar_root(sc, tol: float) -> float:
    r = 1.0
    while not _scalar_fun(sc, r) > 0:
        r *= 0.5
        if r < _BRACKET_MIN:
            raise NumericalFailureError("no lower bracket for the scalar projection")
    R = max(1.0, 2.0 * r)
    while not _scalar_fun(sc, R) < 0:
        R *= 2.0
        if R > _BRACKET_MAX:
            raise NumericalFailureError("no upper bracket for the scalar projection")

    for _ in range(60):  # bisection to a coarse cell
        if R - r <= 1e-3 * R:
            break
        m = 0.5 * (r + R)
        if _scalar_fun(sc, m) > 0:
            r = m
        else:
            R = m

    s = 0.5 * (r + R)
    for _ in range(100):
        f = _scalar_fun(sc, s)
        if abs(f) < tol * _scalar_scale(sc, s):
            return float(s)
        df = _scalar_fun_deriv(sc, s)
        s_new = s - f / df if df != 0 else 0.5 * (r + R)
        if not (r < s_new < R):
            s_new = 0.5 * (r + R)  # bisection move inside the bracket
        if _scalar_fun(sc, s_new) > 0:
            r = s_new
        else:
            R = s_new
        s = s_new
    raise NumericalFailureError("scalar projection failed to converge")


@dataclass(frozen=True)
class ShrinkReport:
    s: float
    t: float
    within_unit: bool


def shrink_property_check(u: Field, problem: Problem, tol: float = 1e-8) -> ShrinkReport:
    """Verify the contraction property of the pair projection.

    Precondition: both constraint residuals of u are <= 0 and both sign parts
    are nonzero.  The projected pair must then satisfy s, t <= 1 + tol.
    """
    from .energy import nehari_residuals

    res = nehari_residuals(u, problem)
    if res.plus_vanishes or res.minus_vanishes:
        raise InvalidInputError("both sign parts must be nonzero")
    if res.plus > 0 or res.minus > 0:
        raise InvalidInputError("precondition failed: constraint residuals must be <= 0")
    proj = project_pair(u, problem)
    return ShrinkReport(s=proj.s, t=proj.t, within_unit=bool(proj.s <= 1 + tol and proj.t <= 1 + tol))
