"""Energy functionals for the whole-lattice and potential-well problems.

Both problems share one shape,

    J(u) = 1/2 (a * |grad u|^2_R + sum_M h u^2) + b/4 (|grad u|^2_R)^2
           + 2/p^2 sum_M |u|^p - 1/p sum_M |u|^p log u^2,

differing only in the gradient region R, the mass region M, the mass
coefficient h, and where fields are allowed to be nonzero:

* whole lattice: R = M = all stored vertices, h = lam*h(x)+1, fields vanish
  on the halo ring;
* bounded well Omega: R = Omega plus its vertex boundary, M = Omega, h = 1,
  fields vanish on the boundary and outside.

Every additive term is exposed separately (the structural identities tested
against this module are relations among the terms), and the closed-form
expansions of J and its derivative pairings along the two-parameter cone
{s u+ + t u-} are provided next to direct evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import Field, cross_term, dirichlet_energy, gradient_form, laplacian, split_signs, vsum
from .errors import ConstraintViolationError, InvalidInputError, ShapeError
from .lattice import DomainSpec, LatticeGraph
from .model import ModelParams, PotentialSpec, log_force, log_term, potential_values


class Problem:
    """A concrete variational problem: graph, regions, coefficients.

    Construct via :meth:`whole_lattice` or :meth:`on_domain`.  Instances are
    immutable and shared freely; all evaluation helpers are pure.
    """

    def __init__(self, kind, graph, params, h_coef, grad_region, mass_region, free_mask, potential=None, domain=None):
        self.kind = kind
        self.graph: LatticeGraph = graph
        self.params: ModelParams = params
        self.h_coef = h_coef
        self.grad_region = grad_region  # None means all stored vertices
        self.mass_region = mass_region
        self.free_mask = free_mask
        self.free_indices = np.flatnonzero(free_mask)
        self.potential = potential
        self.domain = domain

    @classmethod
    def whole_lattice(cls, graph: LatticeGraph, params: ModelParams, potential: PotentialSpec) -> "Problem":
        h = potential_values(potential, graph)
        return cls(
            kind="lattice",
            graph=graph,
            params=params,
            h_coef=params.lam * h + 1.0,
            grad_region=None,
            mass_region=None,
            free_mask=graph.interior.copy(),
            potential=potential,
        )

    @classmethod
    def on_domain(cls, params: ModelParams, domain: DomainSpec) -> "Problem":
        graph = domain.graph
        return cls(
            kind="domain",
            graph=graph,
            params=params,
            h_coef=np.ones(graph.n),
            grad_region=domain.closure,
            mass_region=domain.omega,
            free_mask=domain.omega_mask(),
            domain=domain,
        )

    def with_params(self, params: ModelParams) -> "Problem":
        if self.kind == "lattice":
            return Problem.whole_lattice(self.graph, params, self.potential)
        return Problem.on_domain(params, self.domain)

    # -- admissibility and reductions -------------------------------------

    def check_admissible(self, u: Field) -> None:
        if u.graph is not self.graph:
            raise ShapeError("field does not live on this problem's graph")
        if np.any(u.values[~self.free_mask] != 0.0):
            where = "the halo ring" if self.kind == "lattice" else "the well boundary or beyond"
            raise ConstraintViolationError(f"field is nonzero on {where}")

    def zero_extend(self, values_free: np.ndarray) -> Field:
        u = np.zeros(self.graph.n)
        u[self.free_indices] = values_free
        return Field(self.graph, u)

    def grad_sq(self, u: Field) -> float:
        return dirichlet_energy(u, self.grad_region)

    def gradient_pairing(self, u: Field, v: Field) -> float:
        g = gradient_form(u, v).values
        return vsum(g if self.grad_region is None else g[self.grad_region])

    def _mass_sum(self, pointwise: np.ndarray) -> float:
        return vsum(pointwise if self.mass_region is None else pointwise[self.mass_region])

    def mass_pairing(self, u: Field, v: Field) -> float:
        return self._mass_sum(self.h_coef * u.values * v.values)

    def p_integral(self, u: Field) -> float:
        return self._mass_sum(np.abs(u.values) ** self.params.p)

    def plog_integral(self, u: Field) -> float:
        return self._mass_sum(log_term(u.values, self.params.p))

    def norm_h_sq(self, u: Field) -> float:
        return self.params.a * self.grad_sq(u) + self.mass_pairing(u, u)

    def cross(self, u: Field) -> float:
        return cross_term(u, self.grad_region)


@dataclass(frozen=True)
class EnergyBreakdown:
    """J split into its four additive terms (total is their exact float sum)."""

    quadratic: float
    kirchhoff: float
    p_mass: float
    log_part: float
    total: float
    grad_sq: float  # the nonlocal coefficient, reused by callers


def energy(u: Field, problem: Problem) -> EnergyBreakdown:
    """Term-by-term evaluation of J at an admissible field."""
    problem.check_admissible(u)
    p = problem.params.p
    grad = problem.grad_sq(u)
    quadratic = 0.5 * (problem.params.a * grad + problem.mass_pairing(u, u))
    kirchhoff = 0.25 * problem.params.b * grad * grad
    p_mass = (2.0 / p**2) * problem.p_integral(u)
    log_part = -problem.plog_integral(u) / p
    return EnergyBreakdown(
        quadratic=quadratic,
        kirchhoff=kirchhoff,
        p_mass=p_mass,
        log_part=log_part,
        total=quadratic + kirchhoff + p_mass + log_part,
        grad_sq=grad,
    )


def pairing(u: Field, phi: Field, problem: Problem) -> float:
    """Derivative pairing (J'(u), phi); bilinear in phi.

    Equals a*<grad u, grad phi> + sum h u phi + b |grad u|^2 <grad u, grad phi>
    - sum |u|^(p-2) u phi log u^2 over the problem's regions.
    """
    problem.check_admissible(u)
    problem.check_admissible(phi)
    gp = problem.gradient_pairing(u, phi)
    force = problem._mass_sum(log_force(u.values, problem.params.p) * phi.values)
    return (
        problem.params.a * gp
        + problem.mass_pairing(u, phi)
        + problem.params.b * problem.grad_sq(u) * gp
        - force
    )


def euler_lagrange_residual(u: Field, problem: Problem) -> Field:
    """Pointwise residual of the equation; identically zero at a solution.

    r(x) = -(a + b |grad u|^2) (Lu)(x) + h(x) u(x) - |u(x)|^(p-2) u(x) log u(x)^2
    at interior (resp. well) vertices, zero elsewhere.  For every admissible
    test vertex x, r(x) equals pairing(u, delta_x).
    """
    problem.check_admissible(u)
    coef = problem.params.a + problem.params.b * problem.grad_sq(u)
    r = -coef * laplacian(u).values + problem.h_coef * u.values - log_force(u.values, problem.params.p)
    r[~problem.free_mask] = 0.0
    return Field._wrap(problem.graph, r)


@dataclass(frozen=True)
class NehariResiduals:
    """The two sign-part pairings (J'(u), u+) and (J'(u), u-).

    A vanishing sign part is legal for whole-ray work but not for the
    sign-changing constraint set; it is reported through the flags.
    """

    plus: float
    minus: float
    plus_vanishes: bool
    minus_vanishes: bool

    def as_tuple(self) -> tuple[float, float]:
        return (self.plus, self.minus)


def nehari_residuals(u: Field, problem: Problem) -> NehariResiduals:
    """Constraint residuals via the closed form in the split quantities.

    (J'(u), u+-) = |u+-|_H^2 + b |grad u|^2 (|grad u+-|^2 - K/2) - a K / 2
                   - sum |u+-|^p log (u+-)^2,

    which agrees with pairing(u, u+-) evaluated directly.
    """
    problem.check_admissible(u)
    a, b = problem.params.a, problem.params.b
    pos, neg = split_signs(u)
    grad = problem.grad_sq(u)
    k = problem.cross(u)
    out = []
    for part in (pos, neg):
        val = (
            problem.norm_h_sq(part)
            + b * grad * (problem.grad_sq(part) - 0.5 * k)
            - 0.5 * a * k
            - problem.plog_integral(part)
        )
        out.append(val)
    return NehariResiduals(
        plus=out[0],
        minus=out[1],
        plus_vanishes=not np.any(pos.values != 0.0),
        minus_vanishes=not np.any(neg.values != 0.0),
    )


class SplitScalars:
    """Scalar data of a field's sign-part split, driving every closed form.

    Holds |u+-|_H^2, |grad u+-|^2, the sign-coupling term K, sum |u+-|^p and
    sum |u+-|^p log (u+-)^2.  All cone evaluations J(s u+ + t u-) and the
    constraint pair (g1, g2) = ((J'(s u+ + t u-), s u+), (., t u-)) are then
    polynomials in (s, t) plus s^p log s^2 terms, at no per-vertex cost.
    """

    __slots__ = ("a", "b", "p", "A_pos", "A_neg", "G_pos", "G_neg", "K", "P_pos", "P_neg", "L_pos", "L_neg")

    def __init__(self, a, b, p, A_pos, A_neg, G_pos, G_neg, K, P_pos, P_neg, L_pos, L_neg):
        self.a, self.b, self.p = a, b, p
        self.A_pos, self.A_neg = A_pos, A_neg
        self.G_pos, self.G_neg = G_pos, G_neg
        self.K = K
        self.P_pos, self.P_neg = P_pos, P_neg
        self.L_pos, self.L_neg = L_pos, L_neg

    @classmethod
    def from_field(cls, u: Field, problem: Problem) -> "SplitScalars":
        pos, neg = split_signs(u)
        return cls(
            a=problem.params.a,
            b=problem.params.b,
            p=problem.params.p,
            A_pos=problem.norm_h_sq(pos),
            A_neg=problem.norm_h_sq(neg),
            G_pos=problem.grad_sq(pos),
            G_neg=problem.grad_sq(neg),
            K=problem.cross(u),
            P_pos=problem.p_integral(pos),
            P_neg=problem.p_integral(neg),
            L_pos=problem.plog_integral(pos),
            L_neg=problem.plog_integral(neg),
        )

    @property
    def sign_changing(self) -> bool:
        return self.P_pos > 0.0 and self.P_neg > 0.0

    # Scalar fast paths (plain floats; the root finder calls these in a loop).

    def g1s(self, s: float, t: float) -> float:
        a, b, K = self.a, self.b, self.K
        gp = s * s * self.G_pos
        gn = t * t * self.G_neg
        st = s * t
        sp = s**self.p
        return (
            s * s * self.A_pos
            + b * gp * gp
            - sp * self.L_pos
            - sp * 2.0 * math.log(s) * self.P_pos
            - 0.5 * a * st * K
            + 0.5 * b * st * st * K * K
            + b * gp * gn
            - 0.5 * b * st * K * (gp + gn)
            - b * st * K * gp
        )

    def g2s(self, s: float, t: float) -> float:
        a, b, K = self.a, self.b, self.K
        gp = s * s * self.G_pos
        gn = t * t * self.G_neg
        st = s * t
        tp = t**self.p
        return (
            t * t * self.A_neg
            + b * gn * gn
            - tp * self.L_neg
            - tp * 2.0 * math.log(t) * self.P_neg
            - 0.5 * a * st * K
            + 0.5 * b * st * st * K * K
            + b * gp * gn
            - 0.5 * b * st * K * (gp + gn)
            - b * st * K * gn
        )

    def j_pairs(self, s: float, t: float) -> float:
        a, b, p, K = self.a, self.b, self.p, self.K
        gp = s * s * self.G_pos
        gn = t * t * self.G_neg
        st = s * t
        sp, tp = s**p, t**p
        j_plus = (
            0.5 * s * s * self.A_pos
            + 0.25 * b * gp * gp
            + (2.0 / p**2) * sp * self.P_pos
            - (sp * self.L_pos + sp * 2.0 * math.log(s) * self.P_pos) / p
        )
        j_minus = (
            0.5 * t * t * self.A_neg
            + 0.25 * b * gn * gn
            + (2.0 / p**2) * tp * self.P_neg
            - (tp * self.L_neg + tp * 2.0 * math.log(t) * self.P_neg) / p
        )
        coupling = -0.5 * a * st * K + 0.25 * b * st * st * K * K + 0.5 * b * gp * gn - 0.5 * b * st * K * (gp + gn)
        return j_plus + j_minus + coupling

    def _slog(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        nz = s != 0
        out[nz] = s[nz] ** self.p * (2.0 * np.log(s[nz]))
        return out if out.ndim else float(out)

    def j_ray(self, s, A, G, P, L):
        # J restricted to one sign part scaled by s (no coupling terms).
        s = np.asarray(s, dtype=float)
        sp = s**self.p
        return (
            0.5 * s**2 * A
            + 0.25 * self.b * s**4 * G * G
            + (2.0 / self.p**2) * sp * P
            - (sp * L + self._slog(s) * P) / self.p
        )

    def j_pair(self, s, t):
        """J(s u+ + t u-) via the split expansion."""
        a, b, K = self.a, self.b, self.K
        gp = s * s * self.G_pos  # |grad (s u+)|^2
        gn = t * t * self.G_neg
        st = s * t
        coupling = -0.5 * a * st * K + 0.25 * b * st * st * K * K + 0.5 * b * gp * gn - 0.5 * b * st * K * (gp + gn)
        return self.j_ray(s, self.A_pos, self.G_pos, self.P_pos, self.L_pos) + self.j_ray(
            t, self.A_neg, self.G_neg, self.P_neg, self.L_neg
        ) + coupling

    def g_ray(self, s, A, G, P, L):
        # (J'(s v), s v) for a single sign part v.
        s = np.asarray(s, dtype=float)
        return s**2 * A + self.b * s**4 * G * G - s**self.p * L - self._slog(s) * P

    def _g_coupling(self, s, t):
        a, b, K = self.a, self.b, self.K
        gp = s * s * self.G_pos
        gn = t * t * self.G_neg
        st = s * t
        return -0.5 * a * st * K + 0.5 * b * st * st * K * K + b * gp * gn - 0.5 * b * st * K * (gp + gn)

    def g1(self, s, t):
        """(J'(s u+ + t u-), s u+) in closed form."""
        extra = -self.b * s**3 * t * self.K * self.G_pos
        return self.g_ray(s, self.A_pos, self.G_pos, self.P_pos, self.L_pos) + self._g_coupling(s, t) + extra

    def g2(self, s, t):
        """(J'(s u+ + t u-), t u-) in closed form."""
        extra = -self.b * s * t**3 * self.K * self.G_neg
        return self.g_ray(t, self.A_neg, self.G_neg, self.P_neg, self.L_neg) + self._g_coupling(s, t) + extra

    def g_jacobian(self, s, t) -> np.ndarray:
        """Analytic 2x2 Jacobian of (g1, g2) in (s, t)."""
        a, b, p, K = self.a, self.b, self.p, self.K
        Gp, Gn = self.G_pos, self.G_neg
        lg_s = p * s ** (p - 1.0) * 2.0 * np.log(s) + 2.0 * s ** (p - 1.0)
        lg_t = p * t ** (p - 1.0) * 2.0 * np.log(t) + 2.0 * t ** (p - 1.0)
        d11 = (
            2.0 * s * self.A_pos
            + 4.0 * b * s**3 * Gp * Gp
            - p * s ** (p - 1.0) * self.L_pos
            - lg_s * self.P_pos
            - 0.5 * a * t * K
            + b * s * t * t * K * K
            + 2.0 * b * s * t * t * Gp * Gn
            - 0.5 * b * K * (3.0 * s * s * t * Gp + t**3 * Gn)
            - 3.0 * b * s * s * t * K * Gp
        )
        d12 = (
            -0.5 * a * s * K
            + b * s * s * t * K * K
            + 2.0 * b * s * s * t * Gp * Gn
            - 0.5 * b * K * (s**3 * Gp + 3.0 * s * t * t * Gn)
            - b * s**3 * K * Gp
        )
        d21 = (
            -0.5 * a * t * K
            + b * s * t * t * K * K
            + 2.0 * b * s * t * t * Gp * Gn
            - 0.5 * b * K * (3.0 * s * s * t * Gp + t**3 * Gn)
            - b * t**3 * K * Gn
        )
        d22 = (
            2.0 * t * self.A_neg
            + 4.0 * b * t**3 * Gn * Gn
            - p * t ** (p - 1.0) * self.L_neg
            - lg_t * self.P_neg
            - 0.5 * a * s * K
            + b * s * s * t * K * K
            + 2.0 * b * s * s * t * Gp * Gn
            - 0.5 * b * K * (s**3 * Gp + 3.0 * s * t * t * Gn)
            - 3.0 * b * s * t * t * K * Gn
        )
        return np.array([[d11, d12], [d21, d22]])

    def norm_h_sq_pair(self, s, t) -> float:
        """|s u+ + t u-|_H^2, used as the residual scale for tolerances."""
        return s * s * self.A_pos + t * t * self.A_neg - self.a * s * t * self.K

    def g_scales(self, s: float, t: float) -> tuple[float, float]:
        """Sum of the term magnitudes of g1 and of g2 at (s, t).

        The right relative-residual scale for root acceptance: it vanishes
        linearly as a scaling factor collapses to 0, so the degenerate cone
        boundary (a one-signed configuration) can never pass as a root,
        whereas any overall-norm scale stays O(1) there and can.
        """
        a, b, K = self.a, self.b, abs(self.K)
        gp = s * s * self.G_pos
        gn = t * t * self.G_neg
        st = s * t
        shared = 0.5 * a * st * K + 0.5 * b * st * st * K * K + b * gp * gn + 0.5 * b * st * K * (gp + gn)
        sp, tp = s**self.p, t**self.p
        s1 = (
            s * s * self.A_pos
            + b * gp * gp
            + sp * abs(self.L_pos)
            + sp * abs(2.0 * math.log(s)) * self.P_pos
            + shared
            + b * st * K * gp
        )
        s2 = (
            t * t * self.A_neg
            + b * gn * gn
            + tp * abs(self.L_neg)
            + tp * abs(2.0 * math.log(t)) * self.P_neg
            + shared
            + b * st * K * gn
        )
        return s1, s2


def split_expansion(u: Field, s: float, t: float, problem: Problem) -> tuple[float, float, float]:
    """(J(s u+ + t u-), (J'(.), s u+), (J'(.), t u-)) by closed forms only.

    No combined field is assembled; everything is evaluated from the split
    scalar data, which is the relation the direct-evaluation tests pin down.
    """
    if not (s > 0 and t > 0):
        raise InvalidInputError("scaling factors must be positive")
    sc = SplitScalars.from_field(u, problem)
    return (float(sc.j_pair(s, t)), float(sc.g1(s, t)), float(sc.g2(s, t)))


def level_identity(u: Field, problem: Problem) -> float:
    """(1/2 - 1/p)|u|_H^2 + (1/4 - 1/p) b |grad u|^4 + (2/p^2) sum |u|^p.

    Equals J(u) - (1/p)(J'(u), u); on the constraint set it reproduces J(u)
    itself, which is how computed levels are cross-checked.
    """
    p = problem.params.p
    grad = problem.grad_sq(u)
    return (
        (0.5 - 1.0 / p) * problem.norm_h_sq(u)
        + (0.25 - 1.0 / p) * problem.params.b * grad * grad
        + (2.0 / p**2) * problem.p_integral(u)
    )


def scaling_gap(x, p: float):
    """2 (1 - x^p) + p x^p log x^2 for x > 0.

    Vanishes exactly at x = 1 and is strictly positive elsewhere (its
    derivative is p^2 x^(p-1) log x^2); this is the coefficient that makes
    the constraint-set point the strict maximizer along its cone.
    """
    x = np.asarray(x, dtype=float)
    out = 2.0 * (1.0 - x**p)
    nz = x != 0
    out = np.where(nz, out + p * x**p * 2.0 * np.log(np.where(nz, x, 1.0)), out)
    return float(out) if out.ndim == 0 else out
