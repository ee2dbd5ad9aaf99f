"""Constrained minimization of the energy over the Nehari-type sets.

Strategy: the pair (or scalar) projection maximizes J along each admissible
cone, so minimizing the composite map u -> J(project(u)) is a well-posed
descent problem.  Each iteration takes an l2 descent step along the residual
field (orthogonalized against the cone's scaling directions), re-projects,
and accepts by Armijo backtracking measured after re-projection, which keeps
the recorded J-history nonincreasing.  Once the tangential gradient is small
the iterate is handed to a damped Newton solve of the full pointwise system
r(u) = 0 with a matrix-free symmetric Jacobian (MINRES inner solves), whose
terminal residual is what certification rests on.

Multi-start: axis-aligned dipole seeds at several separations plus seeded
random Gaussian bump pairs (numpy PCG64 generator, seed recorded); the lowest
certified level wins, ties resolved by seed order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from .calculus import Field, laplacian, split_signs
from .energy import (
    EnergyBreakdown,
    Problem,
    SplitScalars,
    energy,
    euler_lagrange_residual,
    nehari_residuals,
)
from .errors import (
    InvalidInputError,
    NoCandidateError,
    NumericalFailureError,
    RefinementFailureError,
    StagnationError,
)
from .lattice import DomainSpec
from .model import ModelParams, log_force, log_force_deriv
from .nehari import project_pair_scalars, project_scalar_with_level


@dataclass(frozen=True)
class SolverOptions:
    project_tol: float = 1e-10
    gradient_tol: float = 1e-9
    newton_entry: float = 1e-3
    residual_tol: float = 1e-11
    certify_residual: float = 1e-8
    certify_nehari: float = 1e-10
    max_iterations: int = 100_000
    max_newton: int = 60
    stagnation_limit: int = 10
    armijo_init: float = 1.0
    armijo_shrink: float = 0.5
    armijo_decrease: float = 1e-4
    minres_rtol: float = 1e-9
    minres_maxiter: int = 4000


@dataclass(frozen=True)
class SeedSpec:
    """Starting-field recipe: axis dipole, random bump pair, or stored values."""

    kind: str  # dipole | random-bump-pair | array
    index: int = 0
    name: str = ""
    separation: int = 1
    axis: int = 0
    amplitude: float = 2.5
    rng_seed: int = 0
    values: np.ndarray | None = None

    def seed_id(self) -> str:
        return self.name or f"{self.kind}-{self.index}"


def default_seeds(rng_seed: int, dipole_separations=(1, 2, 3, 4), random_count: int = 4) -> list[SeedSpec]:
    """The standard multi-start family: 4 dipoles + 4 seeded bump pairs."""
    seeds = []
    for i, sep in enumerate(dipole_separations):
        seeds.append(SeedSpec(kind="dipole", index=i, name=f"dipole-sep{sep}", separation=int(sep)))
    for j in range(random_count):
        seeds.append(
            SeedSpec(
                kind="random-bump-pair",
                index=len(dipole_separations) + j,
                name=f"bumps-{j}",
                rng_seed=rng_seed + j,
            )
        )
    return seeds


def _support_region(problem: Problem) -> np.ndarray:
    # Seeds live inside the potential well so the same field is admissible
    # for the whole-lattice and the limit problem alike.
    if problem.kind == "lattice":
        return problem.potential.omega.omega
    return problem.domain.omega


def _dipole_endpoints(coords: np.ndarray, separation: int, axis: int) -> tuple[int, int]:
    # Prefer points on the coordinate axis; clamp the separation to what the
    # support offers, falling back to extremal coordinates.
    other = [i for i in range(3) if i != axis]
    on_line = np.flatnonzero((coords[:, other[0]] == 0) & (coords[:, other[1]] == 0))
    if on_line.size >= 2:
        vals = coords[on_line, axis]
        hi = min(int(vals.max()), (separation + 1) // 2)
        lo = max(int(vals.min()), hi - separation)
        if lo == hi:
            lo = int(vals[vals < hi].max()) if np.any(vals < hi) else int(vals.min())
        if lo != hi and np.any(vals == hi) and np.any(vals == lo):
            i_hi = on_line[np.argmax(vals == hi)]
            i_lo = on_line[np.argmax(vals == lo)]
            return int(i_hi), int(i_lo)
    vals = coords[:, axis]
    return int(np.argmax(vals)), int(np.argmin(vals))


def build_seed(spec: SeedSpec, problem: Problem) -> Field:
    region = _support_region(problem)
    coords = problem.graph.coords[region]
    vals = np.zeros(problem.graph.n)
    if spec.kind == "dipole":
        i_pos, i_neg = _dipole_endpoints(coords, spec.separation, spec.axis)
        vals[region[i_pos]] = spec.amplitude
        vals[region[i_neg]] = -spec.amplitude
    elif spec.kind == "random-bump-pair":
        rng = np.random.default_rng(spec.rng_seed)
        if len(region) < 2:
            raise InvalidInputError("bump-pair seeds need at least two support vertices")
        c_pos, c_neg = rng.choice(len(region), size=2, replace=False)
        w_pos, w_neg = rng.uniform(0.7, 1.8, size=2)
        d_pos = ((coords - coords[c_pos]) ** 2).sum(axis=1)
        d_neg = ((coords - coords[c_neg]) ** 2).sum(axis=1)
        vals[region] = spec.amplitude * (np.exp(-d_pos / w_pos**2) - np.exp(-d_neg / w_neg**2))
    elif spec.kind == "array":
        return Field(problem.graph, spec.values)
    else:
        raise InvalidInputError(f"unknown seed kind {spec.kind!r}")
    return Field(problem.graph, vals)


@dataclass
class SolveReport:
    """Certified minimization result for one constraint set."""

    minimizer: Field
    level: float
    residual_sup: float
    nehari_residuals: tuple[float, float]
    seed_id: str
    seed_index: int
    iterations: int
    newton_iterations: int
    history: list[tuple[int, float, float]]
    certified: bool
    manifold: str
    breakdown: EnergyBreakdown | None = None


# -- constraint-set adapters ---------------------------------------------------


class _PairManifold:
    name = "sign-changing"

    def __init__(self, problem: Problem, tol: float):
        self.problem = problem
        self.tol = tol

    def project(self, v: Field) -> tuple[Field, float]:
        sc = SplitScalars.from_field(v, self.problem)
        if not sc.sign_changing:
            raise InvalidInputError("iterate lost one sign part")
        proj = project_pair_scalars(sc, self.tol)
        pos, neg = split_signs(v)
        w = Field._wrap(v.graph, proj.s * pos.values + proj.t * neg.values)
        return w, sc.j_pairs(proj.s, proj.t)

    def tangent(self, w: Field, r: np.ndarray) -> np.ndarray:
        pos, neg = split_signs(w)
        out = r.copy()
        for part in (pos.values, neg.values):
            denom = float(part @ part)
            if denom > 0:
                out -= (out @ part) / denom * part
        return out

    def valid(self, w: Field) -> bool:
        return bool(np.any(w.values > 0) and np.any(w.values < 0))


class _RayManifold:
    name = "ground"

    def __init__(self, problem: Problem, tol: float):
        self.problem = problem
        self.tol = tol

    def project(self, v: Field) -> tuple[Field, float]:
        s, level = project_scalar_with_level(v, self.problem, self.tol)
        return s * v, level

    def tangent(self, w: Field, r: np.ndarray) -> np.ndarray:
        denom = float(w.values @ w.values)
        out = r.copy()
        if denom > 0:
            out -= (out @ w.values) / denom * w.values
        return out

    def valid(self, w: Field) -> bool:
        return bool(np.any(w.values != 0))


def _descend(problem: Problem, manifold, u0: Field, opts: SolverOptions):
    """Projected descent with composite Armijo; ends in Newton refinement.

    Newton is attempted as soon as the tangential gradient drops below the
    entry threshold; on failure the threshold tightens and descent resumes.
    Returns (field, history, iterations, newton_iterations).
    """
    w, j_val = manifold.project(u0)
    history: list[tuple[int, float, float]] = []
    alpha = opts.armijo_init
    entry = opts.newton_entry
    stagnant = 0
    newton_total = 0
    it = 0

    def try_newton():
        nonlocal newton_total
        try:
            refined, n_it = newton_refine_field(w, problem, opts.residual_tol, opts)
        except NumericalFailureError:
            return None
        newton_total += n_it
        j_ref = energy(refined, problem).total
        if manifold.valid(refined) and j_ref <= j_val + 1e-6 * (1.0 + abs(j_val)):
            return refined
        return None

    while it < opts.max_iterations:
        r = euler_lagrange_residual(w, problem).values
        r_tan = manifold.tangent(w, r)
        gn = float(np.linalg.norm(r_tan))
        history.append((it, j_val, gn))
        scale = 1.0 + abs(j_val)

        if gn < entry * scale:
            refined = try_newton()
            if refined is not None:
                return refined, history, it, newton_total
            if entry <= opts.gradient_tol:
                break
            entry = max(entry * 1e-2, opts.gradient_tol)

        if gn < opts.gradient_tol * scale:
            break

        gn2 = gn * gn
        alpha = min(opts.armijo_init, 4.0 * alpha)
        accepted = False
        while alpha > 1e-18:
            trial = Field._wrap(w.graph, w.values - alpha * r_tan)
            try:
                w_new, j_new = manifold.project(trial)
            except (NumericalFailureError, InvalidInputError):
                alpha *= opts.armijo_shrink
                continue
            if j_new <= j_val - opts.armijo_decrease * alpha * gn2:
                accepted = True
                break
            alpha *= opts.armijo_shrink
        if accepted:
            w, j_val = w_new, j_new
            stagnant = 0
        else:
            stagnant += 1
            alpha = opts.armijo_init
            if stagnant >= opts.stagnation_limit:
                refined = try_newton()
                if refined is not None:
                    return refined, history, it, newton_total
                raise StagnationError(
                    f"no energy decrease after projection for {stagnant} consecutive steps "
                    f"(J={j_val:.6g}, |grad_tan|={gn:.3g})"
                )
        it += 1

    # mandatory final refinement; report the unrefined iterate if it diverges
    try:
        refined, n_it = newton_refine_field(w, problem, opts.residual_tol, opts)
        newton_total += n_it
        if manifold.valid(refined):
            return refined, history, it, newton_total
    except NumericalFailureError:
        pass
    return w, history, it, newton_total


# -- Newton refinement ---------------------------------------------------------


def newton_refine_field(u: Field, problem: Problem, tol: float, opts: SolverOptions) -> tuple[Field, int]:
    """Damped Newton on the pointwise residual system; returns (field, iters).

    The Jacobian applied to a test direction v is

        H v = -(a + b E) L v - 2 b <grad u, grad v> L u + (h - W(u)) v

    with E the gradient integral of u and W the derivative of the log
    forcing; for admissible v the middle term is the rank-one form
    +2b (L u)(L u)^T v, so H is symmetric and MINRES with inverse-|diagonal|
    preconditioning applies.  Steps are damped by backtracking on the l2
    residual norm; a dead Newton direction falls back to residual
    gradient-flow steps before giving up.
    """
    free = problem.free_indices
    graph = problem.graph
    a, b, p = problem.params.a, problem.params.b, problem.params.p

    def residual_parts(uvals):
        f = Field._wrap(graph, uvals)
        e_val = problem.grad_sq(f)
        lap = laplacian(f).values
        r = -(a + b * e_val) * lap + problem.h_coef * uvals - log_force(uvals, p)
        r[~problem.free_mask] = 0.0
        return r, lap, e_val

    uv = u.values.copy()
    r_full, lap_u, e_val = residual_parts(uv)
    r_inf = float(np.max(np.abs(r_full)))
    if r_inf < tol:
        return Field._wrap(graph, uv), 0

    n_free = free.size
    for iteration in range(1, opts.max_newton + 1):
        w_diag = log_force_deriv(uv, p)
        coef = a + b * e_val
        lap_u_free = lap_u[free]
        dcoef_free = problem.h_coef[free] - w_diag[free]

        def matvec(vf):
            v = np.zeros(graph.n)
            v[free] = vf
            lap_v = (v[graph.nbr] - v[:, None]).sum(axis=1)
            return -coef * lap_v[free] + 2.0 * b * (lap_u_free @ vf) * lap_u_free + dcoef_free * vf

        diag = coef * graph.degree[free] + dcoef_free + 2.0 * b * lap_u_free**2
        inv_diag = 1.0 / np.maximum(np.abs(diag), 1e-12)
        op = LinearOperator((n_free, n_free), matvec=matvec, dtype=float)
        pre = LinearOperator((n_free, n_free), matvec=lambda x: inv_diag * x, dtype=float)

        delta, _ = minres(op, -r_full[free], rtol=opts.minres_rtol, maxiter=opts.minres_maxiter, M=pre)

        step = False
        if np.all(np.isfinite(delta)):
            step = _backtrack(uv, delta, free, residual_parts, r_full)
        if step is False:
            # residual gradient flow: descend on the residual field itself
            step = _backtrack(uv, -r_full[free], free, residual_parts, r_full)
            if step is False:
                raise RefinementFailureError(
                    f"refinement stalled at |r|_inf = {r_inf:.3g} after {iteration} iterations"
                )
        uv, (r_full, lap_u, e_val) = step
        r_inf = float(np.max(np.abs(r_full)))
        if r_inf < tol:
            return Field._wrap(graph, uv), iteration
    raise RefinementFailureError(f"no convergence within {opts.max_newton} Newton iterations")


def _backtrack(uv, delta_free, free, residual_parts, r_full):
    rn = float(np.linalg.norm(r_full))
    gamma = 1.0
    while gamma > 2.0**-30:
        trial = uv.copy()
        trial[free] += gamma * delta_free
        parts = residual_parts(trial)
        if float(np.linalg.norm(parts[0])) <= (1.0 - 1e-4 * gamma) * rn:
            return trial, parts
        gamma *= 0.5
    return False


def newton_refine(u: Field, problem: Problem, tol: float = 1e-11, opts: SolverOptions | None = None) -> SolveReport:
    """Public refinement entry point returning a full report."""
    opts = opts or SolverOptions()
    refined, iters = newton_refine_field(u, problem, tol, opts)
    manifold = "sign-changing" if (np.any(refined.values > 0) and np.any(refined.values < 0)) else "ground"
    return _make_report(refined, problem, "refined", 0, 0, [], opts, manifold, newton_iterations=iters)


# -- public solves -------------------------------------------------------------


def _make_report(w, problem, seed_id, seed_index, iterations, history, opts, manifold, newton_iterations=0):
    bd = energy(w, problem)
    res = euler_lagrange_residual(w, problem)
    res_sup = float(np.max(np.abs(res.values)))
    nr = nehari_residuals(w, problem)
    scale = 1.0 + problem.norm_h_sq(w)
    certified = res_sup < opts.certify_residual
    certified &= abs(nr.plus) < opts.certify_nehari * scale and abs(nr.minus) < opts.certify_nehari * scale
    if manifold == "sign-changing":
        # Both sign parts must carry meaningful mass: a part that survived
        # only as roundoff dust is a collapsed (one-signed) configuration.
        n_pos = float(np.linalg.norm(np.maximum(w.values, 0.0)))
        n_neg = float(np.linalg.norm(np.minimum(w.values, 0.0)))
        certified &= min(n_pos, n_neg) > 1e-6 * max(n_pos, n_neg)
    return SolveReport(
        minimizer=w,
        level=bd.total,
        residual_sup=res_sup,
        nehari_residuals=nr.as_tuple(),
        seed_id=seed_id,
        seed_index=seed_index,
        iterations=iterations,
        newton_iterations=newton_iterations,
        history=history,
        certified=certified,
        manifold=manifold,
        breakdown=bd,
    )


def _resolve_seed(entry, i, problem) -> tuple[Field, str]:
    if isinstance(entry, Field):
        return entry, f"field-{i}"
    if isinstance(entry, SeedSpec):
        spec = entry if entry.name else replace(entry, index=i)
        return build_seed(spec, problem), spec.seed_id()
    raise InvalidInputError(f"cannot interpret seed entry {entry!r}")


def _multi_start(problem: Problem, seeds, opts: SolverOptions, manifold_cls, manifold_name: str, prepare) -> SolveReport:
    best: SolveReport | None = None
    failures: list[str] = []
    man = manifold_cls(problem, opts.project_tol)
    for i, entry in enumerate(seeds):
        try:
            u0, seed_id = _resolve_seed(entry, i, problem)
            u0 = prepare(u0)
            w, history, iters, newton_its = _descend(problem, man, u0, opts)
        except (NumericalFailureError, InvalidInputError) as exc:
            failures.append(f"seed {i}: {exc}")
            continue
        report = _make_report(w, problem, seed_id, i, iters, history, opts, manifold_name, newton_its)
        if best is None:
            best = report
        elif report.certified and not best.certified:
            best = report
        elif report.certified == best.certified and report.level < best.level - 1e-10 * (1.0 + abs(best.level)):
            best = report
    if best is None:
        raise NoCandidateError("every seed failed: " + "; ".join(failures))
    return best


def minimize_sign_changing(problem: Problem, seeds=None, opts: SolverOptions | None = None) -> SolveReport:
    """Least level of J over the sign-changing constraint set (best of seeds)."""
    opts = opts or SolverOptions()
    seeds = seeds if seeds is not None else default_seeds(rng_seed=0)

    def prepare(u0: Field) -> Field:
        if not (np.any(u0.values > 0) and np.any(u0.values < 0)):
            raise InvalidInputError("sign-changing solve needs a sign-changing seed")
        return u0

    return _multi_start(problem, seeds, opts, _PairManifold, "sign-changing", prepare)


def minimize_ground(problem: Problem, seeds=None, opts: SolverOptions | None = None) -> SolveReport:
    """Ground level of J over the whole-ray constraint set (best of seeds).

    Sign-changing seed recipes are reused with their absolute value, giving
    one-signed positive starts; the radial projection preserves the sign
    pattern of whatever field it scales.
    """
    opts = opts or SolverOptions()
    seeds = seeds if seeds is not None else default_seeds(rng_seed=0)

    def prepare(u0: Field) -> Field:
        vals = np.abs(u0.values)
        if not np.any(vals != 0):
            raise InvalidInputError("ground solve needs a nonzero seed")
        return Field._wrap(u0.graph, vals)

    return _multi_start(problem, seeds, opts, _RayManifold, "ground", prepare)


def solve_limit_problem(
    params: ModelParams,
    domain: DomainSpec,
    seeds=None,
    opts: SolverOptions | None = None,
    target: str = "sign-changing",
) -> SolveReport:
    """Solve the bounded-well problem with zero boundary data.

    Fields are constrained to vanish on the vertex boundary and outside; the
    target selects the sign-changing level or the ground level.
    """
    problem = Problem.on_domain(params, domain)
    if target == "sign-changing":
        return minimize_sign_changing(problem, seeds, opts)
    if target == "ground":
        return minimize_ground(problem, seeds, opts)
    raise InvalidInputError(f"unknown target {target!r}")
