"""Command-line interface: configuration, orchestration, persistence.

Subcommands
-----------
validate : hypothesis checks for the configured potential (exit 1 on failure)
solve    : whole-lattice levels m and c at the configured lambda
limit    : bounded-well levels m and c
project  : project a stored field onto the pair or scalar constraint set
check    : recompute the invariants of a stored solution (exit 2 on violation)
sweep    : lambda sweep plus convergence report (CSV + JSON)

Config files are flat ``key = value`` text ('#' starts a comment); values are
numbers, true/false, quoted strings, or bracketed arrays.  The full schema is
listed in the README.  Exit codes: 0 success, 1 configuration or hypothesis
failure, 2 numerical failure or violated invariant.  Identical configurations
produce byte-identical outputs; the output directory can be overridden with
the LOGKIRCHHOFF_OUTDIR environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .calculus import Field, set_summation_mode
from .energy import Problem, energy, euler_lagrange_residual, level_identity, nehari_residuals
from .errors import (
    ConfigError,
    HypothesisViolationError,
    InvalidDomainError,
    InvalidInputError,
    InvalidParameterError,
    NumericalFailureError,
    ShapeError,
    SolutionFormatError,
)
from .experiments import convergence_report, lambda_sweep, radius_study
from .lattice import DomainSpec, LatticeGraph, build_box
from .model import ModelParams, PotentialSpec, validate_potential
from .nehari import project_pair, project_scalar, projected_field
from .solver import (
    SeedSpec,
    SolveReport,
    SolverOptions,
    minimize_ground,
    minimize_sign_changing,
)

SOLUTION_FORMAT = "logkirchhoff-solution"
SOLUTION_VERSION = 1
ORDERING_CONTRACT = "lexicographic-x1x2x3"
OUTDIR_ENV = "LOGKIRCHHOFF_OUTDIR"

CSV_COLUMNS = ["lambda", "m_lambda", "c_lambda", "gap", "h1_dist", "pot_mass", "residual_sup"]


# -- config --------------------------------------------------------------------

_SCHEMA = {
    "model.a": float,
    "model.b": float,
    "model.p": float,
    "model.q": float,
    "model.lambda": float,
    "potential.kind": str,
    "potential.omega_radius": int,
    "potential.omega": list,
    "potential.h0": float,
    "potential.scale": float,
    "potential.exponent": float,
    "potential.m_threshold": float,
    "truncation.radius": int,
    "solver.rng_seed": int,
    "solver.dipole_separations": list,
    "solver.random_seed_count": int,
    "solver.project_tol": float,
    "solver.gradient_tol": float,
    "solver.residual_tol": float,
    "solver.certify_residual": float,
    "solver.certify_nehari": float,
    "solver.max_iterations": int,
    "solver.compensated_sums": bool,
    "sweep.lambdas": list,
    "sweep.m_gap_rel": float,
    "sweep.h1_tol": float,
    "sweep.pot_tol": float,
    "output.directory": str,
}


def parse_config_text(text: str) -> tuple[dict, dict]:
    """Parse flat key/value lines; returns (values, line-of-key)."""
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, _, rhs = line.partition("=")
        key, rhs = key.strip(), rhs.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        try:
            val = json.loads(rhs)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse value {rhs!r}", line=lineno) from None
        want = _SCHEMA[key]
        if want is float and isinstance(val, (int, float)) and not isinstance(val, bool):
            val = float(val)
        elif want is int and isinstance(val, int) and not isinstance(val, bool):
            val = int(val)
        elif not isinstance(val, want) or (want is not bool and isinstance(val, bool)):
            raise ConfigError(f"{key} expects {want.__name__}, got {rhs!r}", line=lineno)
        values[key] = val
        lines[key] = lineno
    return values, lines


@dataclass
class RunConfig:
    """Validated run configuration; builders for graph/potential/problem."""

    a: float = 1.0
    b: float = 1.0
    p: float = 7.0
    q: float | None = None
    lam: float = 1.0
    kind: str = "step-well"
    omega_radius: int | None = 2
    omega_vertices: list | None = None
    h0: float = 1.0
    scale: float = 1.0
    exponent: float = 2.0
    m_threshold: float = 1.0
    radius: int = 12
    rng_seed: int = 0
    dipole_separations: list = field(default_factory=lambda: [1, 2, 3, 4])
    random_seed_count: int = 4
    compensated_sums: bool = False
    solver_opts: SolverOptions = field(default_factory=SolverOptions)
    max_iterations: int = 100_000
    lambdas: list = field(default_factory=lambda: [1.0, 10.0, 100.0, 1000.0, 10000.0])
    sweep_tols: tuple = (1e-4, 1e-3, 1e-4)
    outdir: str = "out"

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values, lines = parse_config_text(text)
        return cls._build(values, lines)

    @classmethod
    def _build(cls, v: dict, lines: dict) -> "RunConfig":
        def fail(key, msg):
            raise ConfigError(f"{key}: {msg}", line=lines.get(key))

        cfg = cls()
        cfg.a = v.get("model.a", cfg.a)
        cfg.b = v.get("model.b", cfg.b)
        cfg.p = v.get("model.p", cfg.p)
        cfg.q = v.get("model.q", None)
        cfg.lam = v.get("model.lambda", cfg.lam)
        try:
            params = ModelParams(cfg.a, cfg.b, cfg.p, cfg.lam, cfg.q)
        except InvalidParameterError as exc:
            raise ConfigError(str(exc), line=lines.get("model.p")) from None
        cfg.q = params.q

        cfg.kind = v.get("potential.kind", cfg.kind)
        if cfg.kind not in ("step-well", "distance-power"):
            fail("potential.kind", f"unknown potential kind {cfg.kind!r}")
        if "potential.omega" in v:
            cfg.omega_vertices = v["potential.omega"]
            cfg.omega_radius = None
            for vert in cfg.omega_vertices:
                if not (isinstance(vert, list) and len(vert) == 3 and all(isinstance(c, int) for c in vert)):
                    fail("potential.omega", f"expected integer triples, got {vert!r}")
        else:
            cfg.omega_radius = v.get("potential.omega_radius", cfg.omega_radius)
            if cfg.omega_radius < 0:
                fail("potential.omega_radius", "must be nonnegative")
        cfg.h0 = v.get("potential.h0", cfg.h0)
        if cfg.h0 <= 0:
            fail("potential.h0", "step height must be positive")
        cfg.scale = v.get("potential.scale", cfg.scale)
        cfg.exponent = v.get("potential.exponent", cfg.exponent)
        cfg.m_threshold = v.get("potential.m_threshold", cfg.m_threshold)
        if cfg.m_threshold <= 0:
            fail("potential.m_threshold", "must be positive")

        cfg.radius = v.get("truncation.radius", cfg.radius)
        if cfg.radius < 0:
            fail("truncation.radius", "must be nonnegative")
        omega_extent = (
            max(abs(c) for vert in cfg.omega_vertices for c in (sum(map(abs, vert)),))
            if cfg.omega_vertices
            else cfg.omega_radius
        )
        if cfg.radius < omega_extent + 1:
            fail("truncation.radius", f"radius must be at least {omega_extent + 1} for the declared well")

        cfg.rng_seed = v.get("solver.rng_seed", cfg.rng_seed)
        cfg.dipole_separations = v.get("solver.dipole_separations", cfg.dipole_separations)
        if not all(isinstance(x, int) and x >= 1 for x in cfg.dipole_separations):
            fail("solver.dipole_separations", "expected positive integers")
        cfg.random_seed_count = v.get("solver.random_seed_count", cfg.random_seed_count)
        cfg.compensated_sums = v.get("solver.compensated_sums", cfg.compensated_sums)
        cfg.max_iterations = v.get("solver.max_iterations", cfg.max_iterations)
        cfg.solver_opts = SolverOptions(
            project_tol=v.get("solver.project_tol", SolverOptions.project_tol),
            gradient_tol=v.get("solver.gradient_tol", SolverOptions.gradient_tol),
            residual_tol=v.get("solver.residual_tol", SolverOptions.residual_tol),
            certify_residual=v.get("solver.certify_residual", SolverOptions.certify_residual),
            certify_nehari=v.get("solver.certify_nehari", SolverOptions.certify_nehari),
            max_iterations=cfg.max_iterations,
        )

        cfg.lambdas = [float(x) for x in v.get("sweep.lambdas", cfg.lambdas)]
        if any(x <= 0 for x in cfg.lambdas) or any(
            b <= a for a, b in zip(cfg.lambdas, cfg.lambdas[1:])
        ):
            fail("sweep.lambdas", "must be positive and strictly ascending")
        cfg.sweep_tols = (
            v.get("sweep.m_gap_rel", cfg.sweep_tols[0]),
            v.get("sweep.h1_tol", cfg.sweep_tols[1]),
            v.get("sweep.pot_tol", cfg.sweep_tols[2]),
        )
        cfg.outdir = v.get("output.directory", cfg.outdir)
        return cfg

    # -- builders ---------------------------------------------------------

    def params(self) -> ModelParams:
        return ModelParams(self.a, self.b, self.p, self.lam, self.q)

    def graph(self) -> LatticeGraph:
        return build_box(self.radius)

    def domain(self, graph: LatticeGraph) -> DomainSpec:
        if self.omega_vertices is not None:
            return DomainSpec.from_vertices(graph, [tuple(v) for v in self.omega_vertices])
        return DomainSpec.ball(graph, self.omega_radius)

    def potential(self, graph: LatticeGraph) -> PotentialSpec:
        return PotentialSpec(
            kind=self.kind,
            omega=self.domain(graph),
            h0=self.h0,
            scale=self.scale,
            exponent=self.exponent,
        )

    def seeds(self) -> list[SeedSpec]:
        seeds = []
        for i, sep in enumerate(self.dipole_separations):
            seeds.append(SeedSpec(kind="dipole", index=i, name=f"dipole-sep{sep}", separation=sep))
        for j in range(self.random_seed_count):
            seeds.append(
                SeedSpec(
                    kind="random-bump-pair",
                    index=len(self.dipole_separations) + j,
                    name=f"bumps-{j}",
                    rng_seed=self.rng_seed + j,
                )
            )
        return seeds

    def potential_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.omega_vertices is not None:
            d["omega"] = [list(map(int, v)) for v in self.omega_vertices]
        else:
            d["omega_radius"] = int(self.omega_radius)
        if self.kind == "step-well":
            d["h0"] = float(self.h0)
        else:
            d["scale"] = float(self.scale)
            d["exponent"] = float(self.exponent)
        return d

    def output_dir(self) -> Path:
        return Path(os.environ.get(OUTDIR_ENV, self.outdir))


# -- solution persistence -------------------------------------------------------


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1) + "\n").encode()


def write_solution(report_or_field, path, *, kind: str, level_kind: str, config_meta: dict) -> None:
    """Write a field (or solve report) as a versioned JSON envelope.

    The value array is stored in the lexicographic vertex order as shortest
    round-trip decimals; read(write(u)) reproduces u bit-for-bit.
    """
    if isinstance(report_or_field, SolveReport):
        rep, fld = report_or_field, report_or_field.minimizer
        extra = {
            "level": float(rep.level),
            "residual_sup": float(rep.residual_sup),
            "nehari_residuals": [float(x) for x in rep.nehari_residuals],
            "seed_id": rep.seed_id,
            "iterations": int(rep.iterations),
            "certified": bool(rep.certified),
        }
    else:
        fld = report_or_field
        extra = {}
    envelope = {
        "format": SOLUTION_FORMAT,
        "version": SOLUTION_VERSION,
        "kind": kind,
        "level_kind": level_kind,
        "ordering": ORDERING_CONTRACT,
        "vertex_count": int(fld.graph.n),
        "values": [float(x) for x in fld.values],
        **config_meta,
        **extra,
    }
    Path(path).write_bytes(_json_bytes(envelope))


def read_solution(path, graph: LatticeGraph | None = None) -> tuple[Field, dict]:
    """Read a stored field; rebuilds the truncation unless a graph is given."""
    raw = Path(path).read_bytes()
    try:
        meta = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SolutionFormatError(f"malformed solution file: {exc.msg}", offset=exc.pos) from None
    if not isinstance(meta, dict) or meta.get("format") != SOLUTION_FORMAT:
        raise SolutionFormatError("not a solution file (missing format marker)")
    if meta.get("version") != SOLUTION_VERSION:
        raise SolutionFormatError(
            f"unsupported solution version {meta.get('version')!r} (supported: {SOLUTION_VERSION})"
        )
    if meta.get("ordering") != ORDERING_CONTRACT:
        raise SolutionFormatError(f"unknown vertex ordering {meta.get('ordering')!r}")
    values = meta.get("values")
    if not isinstance(values, list):
        raise SolutionFormatError("missing value array")
    if graph is None:
        if "radius" not in meta:
            raise SolutionFormatError("missing truncation radius")
        graph = build_box(int(meta["radius"]))
    if len(values) != graph.n:
        raise SolutionFormatError(f"wrong vertex count: file has {len(values)}, graph has {graph.n}")
    vals = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise SolutionFormatError("non-finite values in solution file")
    meta = dict(meta)
    meta.pop("values")
    return Field(graph, vals), meta


def _config_from_meta(meta: dict) -> RunConfig:
    cfg = RunConfig()
    params = meta.get("params", {})
    cfg.a = float(params.get("a", cfg.a))
    cfg.b = float(params.get("b", cfg.b))
    cfg.p = float(params.get("p", cfg.p))
    cfg.q = float(params["q"]) if "q" in params else None
    cfg.lam = float(params.get("lambda", cfg.lam))
    pot = meta.get("potential", {})
    cfg.kind = pot.get("kind", cfg.kind)
    if "omega" in pot:
        cfg.omega_vertices = pot["omega"]
        cfg.omega_radius = None
    else:
        cfg.omega_radius = int(pot.get("omega_radius", cfg.omega_radius))
    cfg.h0 = float(pot.get("h0", cfg.h0))
    cfg.scale = float(pot.get("scale", cfg.scale))
    cfg.exponent = float(pot.get("exponent", cfg.exponent))
    cfg.radius = int(meta.get("radius", cfg.radius))
    return cfg


def _problem_from_config(cfg: RunConfig, kind: str, graph: LatticeGraph | None = None) -> Problem:
    graph = graph or cfg.graph()
    if kind == "lattice":
        return Problem.whole_lattice(graph, cfg.params(), cfg.potential(graph))
    return Problem.on_domain(cfg.params(), cfg.domain(graph))


def _solution_meta(cfg: RunConfig) -> dict:
    return {
        "tool_version": __version__,
        "radius": int(cfg.radius),
        "params": {
            "a": float(cfg.a),
            "b": float(cfg.b),
            "p": float(cfg.p),
            "q": float(cfg.q if cfg.q is not None else cfg.p + 1.0),
            "lambda": float(cfg.lam),
        },
        "potential": cfg.potential_dict(),
        "rng_seed": int(cfg.rng_seed),
    }


# -- subcommands -----------------------------------------------------------------


def _cmd_validate(args) -> int:
    cfg = RunConfig.from_file(args.config)
    graph = cfg.graph()
    try:
        potential = cfg.potential(graph)
        report = validate_potential(potential, graph, cfg.m_threshold)
    except (HypothesisViolationError, InvalidDomainError) as exc:
        print(f"hypothesis violation: {exc}")
        return 1
    print(f"well size        : {report.omega_size}")
    print(f"well connected   : {report.omega_connected}")
    print(f"well bounded     : {report.omega_bounded}")
    print(f"sublevel {{h < {cfg.m_threshold}}}: {report.sublevel_size} vertices "
          f"({report.sublevel_interior_size} interior)")
    print(f"sublevel touches halo: {report.sublevel_touches_halo}")
    for w in report.warnings:
        print(f"warning: {w}")
    dist_to_halo = cfg.radius + 1 - (cfg.omega_radius or 0)
    if cfg.omega_radius is not None and dist_to_halo < 8:
        print(f"warning: well-to-halo distance {dist_to_halo} < 8; whole-lattice levels may be under-resolved")
    return 0


def _solve_and_write(cfg: RunConfig, problem_kind: str, prefix: str) -> int:
    if cfg.compensated_sums:
        set_summation_mode("compensated")
    try:
        graph = cfg.graph()
        problem = _problem_from_config(cfg, problem_kind, graph)
        seeds = cfg.seeds()
        m_rep = minimize_sign_changing(problem, seeds, cfg.solver_opts)
        c_rep = minimize_ground(problem, seeds, cfg.solver_opts)
    finally:
        set_summation_mode("fast")
    outdir = cfg.output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    meta = _solution_meta(cfg)
    write_solution(m_rep, outdir / f"{prefix}_m.json", kind=problem_kind, level_kind="m", config_meta=meta)
    write_solution(c_rep, outdir / f"{prefix}_c.json", kind=problem_kind, level_kind="c", config_meta=meta)
    summary = {
        "m_level": float(m_rep.level),
        "c_level": float(c_rep.level),
        "gap": float(m_rep.level - 2.0 * c_rep.level),
        "m_residual_sup": float(m_rep.residual_sup),
        "c_residual_sup": float(c_rep.residual_sup),
        "m_seed": m_rep.seed_id,
        "c_seed": c_rep.seed_id,
        "certified": bool(m_rep.certified and c_rep.certified),
    }
    (outdir / f"{prefix}_report.json").write_bytes(_json_bytes(summary))
    print(f"m = {m_rep.level!r}  (seed {m_rep.seed_id}, residual {m_rep.residual_sup:.3e})")
    print(f"c = {c_rep.level!r}  (seed {c_rep.seed_id}, residual {c_rep.residual_sup:.3e})")
    print(f"m - 2c = {summary['gap']!r}")
    if not summary["certified"]:
        print("warning: result not certified")
    return 0


def _cmd_solve(args) -> int:
    return _solve_and_write(RunConfig.from_file(args.config), "lattice", "solution")


def _cmd_limit(args) -> int:
    return _solve_and_write(RunConfig.from_file(args.config), "domain", "limit")


def _cmd_project(args) -> int:
    cfg = RunConfig.from_file(args.config)
    graph = cfg.graph()
    fld, _meta = read_solution(args.field, graph)
    problem = _problem_from_config(cfg, "domain" if args.domain else "lattice", graph)
    if args.manifold == "pair":
        proj = project_pair(fld, problem, cfg.solver_opts.project_tol)
        result = projected_field(fld, proj)
        print(f"s = {proj.s!r}")
        print(f"t = {proj.t!r}")
        print(f"residuals = ({proj.residual_g1:.3e}, {proj.residual_g2:.3e})")
        print(f"bracket = [{proj.bracket[0]!r}, {proj.bracket[1]!r}]")
    else:
        s = project_scalar(fld, problem, cfg.solver_opts.project_tol)
        result = s * fld
        print(f"s = {s!r}")
    if args.out:
        write_solution(result, args.out, kind=problem.kind, level_kind="field", config_meta=_solution_meta(cfg))
        print(f"projected field written to {args.out}")
    return 0


_CHECKED_INVARIANTS = (
    "level-consistency",
    "level-identity",
    "euler-lagrange-residual",
    "nehari-residuals",
    "sign-changing-certificate",
)


def check_solution(path, certify_residual: float = 1e-8, certify_nehari: float = 1e-10) -> list[tuple[str, bool, str]]:
    """Recompute the invariants of a stored solution; list of (name, ok, detail)."""
    fld, meta = read_solution(path)
    if meta.get("level_kind") not in ("m", "c"):
        raise SolutionFormatError(f"not a solve result (level_kind={meta.get('level_kind')!r})")
    cfg = _config_from_meta(meta)
    problem = _problem_from_config(cfg, meta.get("kind", "lattice"), fld.graph)
    results = []

    stored_level = float(meta["level"])
    bd = energy(fld, problem)
    lvl_tol = 1e-12 * (1.0 + abs(bd.total))
    results.append(
        ("level-consistency", abs(bd.total - stored_level) <= lvl_tol,
         f"stored {stored_level!r}, recomputed {bd.total!r}")
    )
    ident = level_identity(fld, problem)
    scale = 1.0 + abs(bd.total)
    results.append(
        ("level-identity", abs(ident - bd.total) <= 1e-9 * scale,
         f"identity value {ident!r} vs energy {bd.total!r}")
    )
    res_sup = float(np.max(np.abs(euler_lagrange_residual(fld, problem).values)))
    results.append(
        ("euler-lagrange-residual", res_sup < certify_residual, f"|r|_inf = {res_sup:.3e}")
    )
    nr = nehari_residuals(fld, problem)
    nsc = 1.0 + problem.norm_h_sq(fld)
    results.append(
        ("nehari-residuals",
         abs(nr.plus) < certify_nehari * nsc and abs(nr.minus) < certify_nehari * nsc,
         f"({nr.plus:.3e}, {nr.minus:.3e})")
    )
    if meta.get("level_kind") == "m":
        ok = not (nr.plus_vanishes or nr.minus_vanishes)
        results.append(("sign-changing-certificate", ok, "both sign parts nonzero" if ok else "a sign part vanishes"))
    return results


def _cmd_check(args) -> int:
    results = check_solution(args.solution)
    bad = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if bad:
        print(f"violated invariants: {', '.join(bad)}")
        return 2
    return 0


def _cmd_sweep(args) -> int:
    cfg = RunConfig.from_file(args.config)
    if cfg.compensated_sums:
        set_summation_mode("compensated")
    try:
        graph = cfg.graph()
        potential = cfg.potential(graph)
        sweep = lambda_sweep(
            cfg.params(), cfg.lambdas, potential, cfg.solver_opts, rng_seed=cfg.rng_seed, seeds=cfg.seeds()
        )
        summary = convergence_report(sweep, *cfg.sweep_tols)
    finally:
        set_summation_mode("fast")
    outdir = cfg.output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in sweep.rows:
            writer.writerow([repr(float(x)) for x in row.as_tuple()])
    out = {
        "m_omega": float(sweep.limit_row[0]),
        "c_omega": float(sweep.limit_row[1]),
        "rows_used": summary.rows_used,
        "m_gap_final_rel": summary.m_gap_final,
        "h1_final": summary.h1_final,
        "pot_mass_final": summary.pot_mass_final,
        "m_gap_decreasing": summary.m_gap_decreasing,
        "h1_decreasing": summary.h1_decreasing,
        "pot_mass_decreasing": summary.pot_mass_decreasing,
        "gap_positive_all": summary.gap_positive_all,
        "m_below_limit_all": summary.m_below_limit_all,
        "m_gap_slope": summary.m_gap_slope,
        "h1_slope": summary.h1_slope,
        "thresholds_met": summary.ok,
    }
    (outdir / "sweep_summary.json").write_bytes(_json_bytes(out))
    meta = _solution_meta(cfg)
    write_solution(sweep.limit_m, outdir / "limit_m.json", kind="domain", level_kind="m", config_meta=meta)
    last = sweep.rows[-1]
    final_meta = dict(meta)
    final_meta["params"] = dict(meta["params"], **{"lambda": float(last.lam)})
    write_solution(last.m_report, outdir / "solution_m_final.json", kind="lattice", level_kind="m", config_meta=final_meta)
    print("lambda      m_lambda        c_lambda        gap          h1_dist    pot_mass   residual")
    for row in sweep.rows:
        print(
            f"{row.lam:<10.4g} {row.m_level:<15.10g} {row.c_level:<15.10g} "
            f"{row.gap:<12.6g} {row.h1_dist:<10.3e} {row.pot_mass:<10.3e} {row.residual_sup:.2e}"
        )
    print(f"m_Omega = {sweep.limit_row[0]!r}, c_Omega = {sweep.limit_row[1]!r}")
    print(f"final |m_lambda - m_Omega| / m_Omega = {summary.m_gap_final:.3e}")
    print(f"thresholds met: {summary.ok}")
    return 0


def _cmd_radius_study(args) -> int:
    cfg = RunConfig.from_file(args.config)
    radii = [int(r) for r in args.radii]

    def make_potential(graph):
        return RunConfig.potential(cfg, graph)

    rows = radius_study(cfg.params(), radii, make_potential, cfg.solver_opts, rng_seed=cfg.rng_seed)
    print("radius  m_lambda            c_lambda            m_rel_change  c_rel_change")
    for row in rows:
        print(
            f"{row.radius:<7d} {row.m_level:<19.12g} {row.c_level:<19.12g} "
            f"{row.m_rel_change:<13.3e} {row.c_rel_change:.3e}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logkirchhoff",
        description="Sign-changing and ground levels of the discrete logarithmic Kirchhoff equation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the potential-well hypotheses")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="whole-lattice levels m and c at the configured lambda")
    p.add_argument("config")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("limit", help="bounded-well levels m and c")
    p.add_argument("config")
    p.set_defaults(func=_cmd_limit)

    p = sub.add_parser("project", help="project a stored field onto a constraint set")
    p.add_argument("config")
    p.add_argument("--field", required=True, help="stored field (solution envelope)")
    p.add_argument("--manifold", choices=["pair", "scalar"], default="pair")
    p.add_argument("--domain", action="store_true", help="project for the bounded-well problem")
    p.add_argument("--out", help="write the projected field here")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("check", help="recompute the invariants of a stored solution")
    p.add_argument("solution")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("sweep", help="lambda sweep with convergence report")
    p.add_argument("config")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("radius-study", help="truncation study across radii")
    p.add_argument("config")
    p.add_argument("radii", nargs="+", type=int)
    p.set_defaults(func=_cmd_radius_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SolutionFormatError, HypothesisViolationError, InvalidDomainError,
            InvalidParameterError, InvalidInputError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
