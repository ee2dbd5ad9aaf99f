"""Large-lambda asymptotics: sweeps, convergence reports, truncation studies.

As the potential scale grows, the whole-lattice levels approach the levels of
the bounded-well problem and the minimizers localize onto the well.  A sweep
solves the lattice problem along an ascending lambda grid (warm-starting each
row from the previous minimizer after re-projection), solves the well problem
once, and tabulates per row

    lambda, m_lambda, c_lambda, m - 2c, |u_lambda - u_0|_H1, lambda*sum h u^2,
    residual_sup.

Distances are taken modulo the known invariances: the equation is odd, so the
global sign is aligned first, and for symmetric wells the lattice symmetries
fixing the potential are quotiented out as well.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .calculus import Field, dirichlet_energy, vsum
from .energy import Problem
from .errors import ReportIncompleteError
from .lattice import DomainSpec, LatticeGraph, build_box
from .model import ModelParams, PotentialSpec, potential_values
from .solver import SolveReport, SolverOptions, default_seeds, minimize_ground, minimize_sign_changing, solve_limit_problem


def h1_norm(u: Field) -> float:
    """Plain first-order norm sqrt(sum |grad u|^2 + sum u^2) over the graph."""
    return float(np.sqrt(dirichlet_energy(u) + vsum(u.values**2)))


def graph_symmetries(graph: LatticeGraph, invariant: np.ndarray | None = None) -> list[np.ndarray]:
    """Index maps of the signed coordinate permutations preserving the graph.

    Each returned array ``m`` satisfies coords[m[i]] == Q(coords[i]) for one
    orthogonal symmetry Q; a field transforms by new[m] = old.  When
    ``invariant`` is given (for instance the potential), only symmetries
    leaving it fixed are kept.  The identity is always first.
    """
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            mapped = graph.coords[:, perm] * np.asarray(signs, dtype=np.int64)
            keys = graph._key_of(mapped)
            pos = np.searchsorted(graph._keys, keys)
            pos_c = np.minimum(pos, graph.n - 1)
            if not np.all((pos < graph.n) & (graph._keys[pos_c] == keys)):
                continue
            m = pos_c
            if invariant is not None and not np.array_equal(invariant[m], invariant):
                continue
            out.append(m)
    identity = np.arange(graph.n)
    out.sort(key=lambda m: not np.array_equal(m, identity))
    return out


def aligned_h1_distance(u: Field, v: Field, symmetries: list[np.ndarray] | None = None) -> float:
    """min over sign flips (and optional symmetries) of |g(u) - v|_H1."""
    graph = u.graph
    maps = symmetries if symmetries else [np.arange(graph.n)]
    best = np.inf
    for m in maps:
        moved = np.empty(graph.n)
        moved[m] = u.values
        for sgn in (1.0, -1.0):
            best = min(best, h1_norm(Field._wrap(graph, sgn * moved - v.values)))
    return float(best)


@dataclass
class SweepRow:
    lam: float
    m_level: float
    c_level: float
    gap: float  # m - 2c
    h1_dist: float
    pot_mass: float  # lambda * sum h u^2
    residual_sup: float
    certified: bool
    exterior_sup: float  # sup |u_lambda| off the well
    m_report: SolveReport = field(repr=False, default=None)
    c_report: SolveReport = field(repr=False, default=None)

    def as_tuple(self):
        return (self.lam, self.m_level, self.c_level, self.gap, self.h1_dist, self.pot_mass, self.residual_sup)


@dataclass
class SweepReport:
    rows: list[SweepRow]
    limit_row: tuple[float, float]  # (m_Omega, c_Omega)
    limit_m: SolveReport = field(repr=False, default=None)
    limit_c: SolveReport = field(repr=False, default=None)
    params: ModelParams = None
    radius: int | None = None
    rng_seed: int = 0
    seed_ids: list[str] = field(default_factory=list)

    @property
    def certified_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.certified]


def lambda_sweep(
    params_base: ModelParams,
    lambdas,
    potential: PotentialSpec,
    opts: SolverOptions | None = None,
    rng_seed: int = 0,
    seeds=None,
) -> SweepReport:
    """Solve the lattice problem along ascending lambdas against the well limit.

    Every row reuses the identical base seed list (so differences across rows
    reflect the parameter, not the multi-start), extended by the well-problem
    minimizer and by the previous row's minimizer as warm starts.
    """
    lambdas = [float(x) for x in lambdas]
    if any(l2 <= l1 for l1, l2 in zip(lambdas, lambdas[1:])) or any(x <= 0 for x in lambdas):
        raise ValueError("lambdas must be positive and ascending")
    opts = opts or SolverOptions()
    graph = potential.omega.graph
    base_seeds = list(seeds) if seeds is not None else default_seeds(rng_seed)
    seed_ids = [s.seed_id() if hasattr(s, "seed_id") else f"field-{i}" for i, s in enumerate(base_seeds)]

    limit_m = solve_limit_problem(params_base, potential.omega, base_seeds, opts, target="sign-changing")
    limit_c = solve_limit_problem(params_base, potential.omega, base_seeds, opts, target="ground")
    u0 = limit_m.minimizer

    h_vals = potential_values(potential, graph)
    sym = graph_symmetries(graph, invariant=h_vals)
    omega_mask = potential.omega.omega_mask()

    rows: list[SweepRow] = []
    warm_m: Field | None = None
    warm_c: Field | None = None
    for lam in lambdas:
        problem = Problem.whole_lattice(graph, params_base.with_lambda(lam), potential)
        seeds_m = base_seeds + [u0] + ([warm_m] if warm_m is not None else [])
        seeds_c = base_seeds + [limit_c.minimizer] + ([warm_c] if warm_c is not None else [])
        m_rep = minimize_sign_changing(problem, seeds_m, opts)
        c_rep = minimize_ground(problem, seeds_c, opts)
        u_lam = m_rep.minimizer
        pot_mass = lam * vsum(h_vals * u_lam.values**2)
        ext = np.abs(u_lam.values[~omega_mask])
        rows.append(
            SweepRow(
                lam=lam,
                m_level=m_rep.level,
                c_level=c_rep.level,
                gap=m_rep.level - 2.0 * c_rep.level,
                h1_dist=aligned_h1_distance(u_lam, u0, sym),
                pot_mass=float(pot_mass),
                residual_sup=m_rep.residual_sup,
                certified=bool(m_rep.certified and c_rep.certified),
                exterior_sup=float(ext.max()) if ext.size else 0.0,
                m_report=m_rep,
                c_report=c_rep,
            )
        )
        warm_m, warm_c = m_rep.minimizer, c_rep.minimizer
    return SweepReport(
        rows=rows,
        limit_row=(limit_m.level, limit_c.level),
        limit_m=limit_m,
        limit_c=limit_c,
        params=params_base,
        radius=graph.radius,
        rng_seed=rng_seed,
        seed_ids=seed_ids,
    )


@dataclass
class ConvergenceSummary:
    rows_used: int
    m_gap_final: float  # |m_lambda - m_Omega| at the largest lambda, relative
    h1_final: float
    pot_mass_final: float
    m_gap_decreasing: bool
    h1_decreasing: bool
    pot_mass_decreasing: bool
    gap_positive_all: bool  # m - 2c > 0 on every row
    m_below_limit_all: bool
    m_gap_slope: float  # log-log decay rate of |m_lambda - m_Omega|
    h1_slope: float
    thresholds: tuple[float, float, float]

    @property
    def ok(self) -> bool:
        return (
            self.m_gap_final < self.thresholds[0]
            and self.h1_final < self.thresholds[1]
            and self.pot_mass_final < self.thresholds[2]
        )


def _loglog_slope(xs, ys) -> float:
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    keep = ys > 0
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


def convergence_report(
    sweep: SweepReport,
    m_gap_rel: float = 1e-4,
    h1_tol: float = 1e-3,
    pot_tol: float = 1e-4,
) -> ConvergenceSummary:
    """Decay summary of a sweep; needs at least three certified rows."""
    rows = sweep.certified_rows
    if len(rows) < 3:
        raise ReportIncompleteError(f"need >= 3 certified rows, have {len(rows)}")
    m_omega = sweep.limit_row[0]
    gaps = [abs(r.m_level - m_omega) for r in rows]
    h1s = [r.h1_dist for r in rows]
    pots = [r.pot_mass for r in rows]
    lams = [r.lam for r in rows]
    return ConvergenceSummary(
        rows_used=len(rows),
        m_gap_final=gaps[-1] / abs(m_omega),
        h1_final=h1s[-1],
        pot_mass_final=pots[-1],
        m_gap_decreasing=all(b <= a * (1 + 1e-12) for a, b in zip(gaps, gaps[1:])),
        h1_decreasing=all(b <= a * (1 + 1e-12) for a, b in zip(h1s, h1s[1:])),
        pot_mass_decreasing=all(b <= a * (1 + 1e-12) for a, b in zip(pots, pots[1:])),
        gap_positive_all=all(r.gap > 0 for r in rows),
        m_below_limit_all=all(r.m_level <= m_omega + 1e-9 * (1 + abs(m_omega)) for r in rows),
        m_gap_slope=_loglog_slope(lams, gaps),
        h1_slope=_loglog_slope(lams, h1s),
        thresholds=(m_gap_rel, h1_tol, pot_tol),
    )


def embed_field(u: Field, graph: LatticeGraph) -> Field:
    """Zero-extend a field onto a larger truncation by matching coordinates."""
    keys = graph._key_of(u.graph.coords)
    pos = np.searchsorted(graph._keys, keys)
    vals = np.zeros(graph.n)
    vals[pos] = u.values
    return Field(graph, vals)


@dataclass
class RadiusRow:
    radius: int
    m_level: float
    c_level: float
    m_rel_change: float  # vs previous radius (nan for the first row)
    c_rel_change: float
    certified: bool


def radius_study(
    params: ModelParams,
    radii,
    make_potential,
    opts: SolverOptions | None = None,
    rng_seed: int = 0,
) -> list[RadiusRow]:
    """Whole-lattice levels across truncation radii (ascending).

    ``make_potential(graph)`` rebuilds the same potential on each truncation.
    Successive solves warm-start from the previous minimizer zero-extended to
    the larger box.
    """
    radii = [int(r) for r in radii]
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be ascending")
    opts = opts or SolverOptions()
    rows: list[RadiusRow] = []
    prev_m = prev_c = None
    prev_field_m = prev_field_c = None
    for r in radii:
        graph = build_box(r)
        potential = make_potential(graph)
        problem = Problem.whole_lattice(graph, params, potential)
        seeds = default_seeds(rng_seed)
        seeds_m = seeds + ([embed_field(prev_field_m, graph)] if prev_field_m is not None else [])
        seeds_c = seeds + ([embed_field(prev_field_c, graph)] if prev_field_c is not None else [])
        m_rep = minimize_sign_changing(problem, seeds_m, opts)
        c_rep = minimize_ground(problem, seeds_c, opts)
        rows.append(
            RadiusRow(
                radius=r,
                m_level=m_rep.level,
                c_level=c_rep.level,
                m_rel_change=abs(m_rep.level - prev_m) / abs(prev_m) if prev_m is not None else float("nan"),
                c_rel_change=abs(c_rep.level - prev_c) / abs(prev_c) if prev_c is not None else float("nan"),
                certified=bool(m_rep.certified and c_rep.certified),
            )
        )
        prev_m, prev_c = m_rep.level, c_rep.level
        prev_field_m, prev_field_c = m_rep.minimizer, c_rep.minimizer
    return rows
