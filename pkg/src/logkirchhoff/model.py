"""Model parameters, potential wells, and the logarithmic nonlinearity.

The equation's data are (a, b, p, lambda) with a, b > 0 and p > 6, plus a
potential h >= 0 whose zero set Omega (the well) is nonempty, connected and
bounded, and whose sublevel sets {h < M} are finite.  Two concrete potential
families are provided: a step well (constant h0 off the well) and a
distance-power profile scale * d(x, Omega)^exponent.

The nonlinearity t -> |t|^(p-2) t log t^2 and its primitive-related terms are
extended by 0 at t = 0 (the limits exist for p > 6); no epsilon floor is
placed inside the logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisViolationError, InvalidParameterError, NumericalFailureError
from .lattice import DomainSpec, LatticeGraph, Vertex, is_connected, vertex_boundary


@dataclass(frozen=True)
class ModelParams:
    """Equation coefficients: diffusion a, nonlocal weight b, exponent p,
    potential scale lam, and comparison exponent q (> p) for the envelope
    inequality of the nonlinearity."""

    a: float = 1.0
    b: float = 1.0
    p: float = 7.0
    lam: float = 1.0
    q: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidParameterError(f"a must be positive, got {self.a}")
        if not self.b > 0:
            raise InvalidParameterError(f"b must be positive, got {self.b}")
        if not self.p > 6:
            raise InvalidParameterError(f"p must exceed 6, got {self.p}")
        if not self.lam > 0:
            raise InvalidParameterError(f"lambda must be positive, got {self.lam}")
        if self.q is None:
            object.__setattr__(self, "q", self.p + 1.0)
        if not self.q > self.p:
            raise InvalidParameterError(f"q must exceed p, got q={self.q}, p={self.p}")

    def with_lambda(self, lam: float) -> "ModelParams":
        return ModelParams(self.a, self.b, self.p, lam, self.q)


@dataclass(frozen=True)
class PotentialSpec:
    """Potential family with well Omega = {h = 0}.

    kind 'step-well': h = h0 > 0 off the well.
    kind 'distance-power': h = scale * d(x, Omega)^exponent.
    """

    kind: str
    omega: DomainSpec
    h0: float = 1.0
    scale: float = 1.0
    exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in ("step-well", "distance-power"):
            raise InvalidParameterError(f"unknown potential kind {self.kind!r}")
        if self.kind == "step-well" and not self.h0 > 0:
            raise InvalidParameterError("step-well height h0 must be positive")
        if self.kind == "distance-power" and (not self.scale > 0 or not self.exponent > 0):
            raise InvalidParameterError("distance-power needs positive scale and exponent")


def _distance_to_omega(spec: PotentialSpec, coords: np.ndarray) -> np.ndarray:
    omega_coords = spec.omega.graph.coords[spec.omega.omega]
    d = np.abs(coords[:, None, :] - omega_coords[None, :, :]).sum(axis=2)
    return d.min(axis=1)


def potential_values(spec: PotentialSpec, graph: LatticeGraph) -> np.ndarray:
    """h(x) for every stored vertex, exactly 0 on Omega and positive off it."""
    d = _distance_to_omega(spec, graph.coords)
    if spec.kind == "step-well":
        return np.where(d == 0, 0.0, spec.h0)
    return np.where(d == 0, 0.0, spec.scale * d.astype(float) ** spec.exponent)


def potential_eval(spec: PotentialSpec, x: Vertex) -> float:
    """h at a single vertex (the l1 distance to Omega needs no graph)."""
    coords = np.asarray([x], dtype=np.int64)
    d = int(_distance_to_omega(spec, coords)[0])
    if d == 0:
        return 0.0
    if spec.kind == "step-well":
        return float(spec.h0)
    return float(spec.scale * d**spec.exponent)


@dataclass
class PotentialReport:
    """Hypothesis check summary for a potential on a given truncation."""

    omega_size: int
    omega_connected: bool
    omega_bounded: bool
    sublevel_threshold: float
    sublevel_size: int
    sublevel_interior_size: int
    sublevel_touches_halo: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.omega_connected and self.omega_bounded


def validate_potential(spec: PotentialSpec, graph: LatticeGraph, M: float) -> PotentialReport:
    """Check the well hypotheses and report the sublevel set D_M = {h < M}.

    Raises on a disconnected well.  A warning is recorded when D_M reaches
    the halo ring: the truncation is then too small to contain the finite
    sublevel set for this M, and whole-lattice levels should not be trusted.
    """
    if not M > 0:
        raise InvalidParameterError("sublevel threshold M must be positive")
    omega = spec.omega.omega
    if omega.size == 0:
        raise HypothesisViolationError("well is empty")
    if not is_connected(graph, omega):
        raise HypothesisViolationError("well is not connected")
    h = potential_values(spec, graph)
    if np.any(h < 0):
        raise HypothesisViolationError("potential takes negative values")
    sub = h < M
    report = PotentialReport(
        omega_size=int(omega.size),
        omega_connected=True,
        omega_bounded=bool(np.all(graph.interior[omega])),
        sublevel_threshold=float(M),
        sublevel_size=int(sub.sum()),
        sublevel_interior_size=int((sub & graph.interior).sum()),
        sublevel_touches_halo=bool(np.any(sub & ~graph.interior)),
    )
    if not report.omega_bounded:
        report.warnings.append("well reaches the halo ring; enlarge the truncation")
    if report.sublevel_touches_halo:
        report.warnings.append(
            f"sublevel set {{h < {M}}} touches the halo ring; truncation too small for this M"
        )
    closure = np.union1d(omega, vertex_boundary(graph, omega))
    if not np.all(graph.interior[closure]):
        report.warnings.append("well boundary is not fully interior")
    return report


# -- logarithmic nonlinearity -------------------------------------------------


def log_term(t, p: float):
    """|t|^p log t^2 with value 0 at t = 0 (continuous extension)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    nz = t != 0
    at = np.abs(t[nz])
    out[nz] = at**p * (2.0 * np.log(at))
    return float(out) if out.ndim == 0 else out


def log_force(t, p: float):
    """|t|^(p-2) t log t^2 with value 0 at t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    nz = t != 0
    at = np.abs(t[nz])
    out[nz] = np.sign(t[nz]) * at ** (p - 1.0) * (2.0 * np.log(at))
    return float(out) if out.ndim == 0 else out


def log_force_deriv(t, p: float):
    """d/dt of log_force: (p-1)|t|^(p-2) log t^2 + 2|t|^(p-2), 0 at t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    nz = t != 0
    at = np.abs(t[nz])
    out[nz] = at ** (p - 2.0) * ((p - 1.0) * 2.0 * np.log(at) + 2.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NonlinearityBounds:
    """Envelope constants: |t|^(p-1) |log t^2| <= eps |t| + c_eps |t|^(q-1)."""

    epsilon: float
    c_epsilon: float
    q: float
    p: float


def _envelope_ratio(t: np.ndarray, epsilon: float, p: float, q: float) -> np.ndarray:
    # (t^(p-1) |log t^2| - eps t) / t^(q-1) for t > 0
    logt = np.log(t)
    return (t ** (p - 1.0) * np.abs(2.0 * logt) - epsilon * t) / t ** (q - 1.0)


def bound_constant(
    epsilon: float,
    p: float,
    q: float,
    *,
    t_lo: float = 1e-8,
    t_hi: float = 1e8,
    grid: int = 4096,
    verify_points: int = 1_000_000,
) -> NonlinearityBounds:
    """Smallest constant closing the envelope inequality for the log term.

    Maximizes (t^(p-1)|log t^2| - eps*t) / t^(q-1) over t > 0 on a log grid,
    refines the best bracket by golden-section to 1e-9 relative, and verifies
    the resulting bound on a dense sample.  Requires q > p > 6 and eps > 0.
    """
    if not (q > p > 6):
        raise InvalidParameterError(f"need q > p > 6, got p={p}, q={q}")
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")

    ts = np.exp(np.linspace(np.log(t_lo), np.log(t_hi), grid))
    vals = _envelope_ratio(ts, epsilon, p, q)
    k = int(np.argmax(vals))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, grid - 1)]

    # Golden-section maximization on [lo, hi] in log coordinates.
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a_, b_ = np.log(lo), np.log(hi)
    c_ = b_ - invphi * (b_ - a_)
    d_ = a_ + invphi * (b_ - a_)
    fc = _envelope_ratio(np.exp(c_), epsilon, p, q)
    fd = _envelope_ratio(np.exp(d_), epsilon, p, q)
    for _ in range(200):
        if b_ - a_ < 1e-12:
            break
        if fc > fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - invphi * (b_ - a_)
            fc = _envelope_ratio(np.exp(c_), epsilon, p, q)
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + invphi * (b_ - a_)
            fd = _envelope_ratio(np.exp(d_), epsilon, p, q)
    else:
        raise NumericalFailureError("golden-section maximization did not converge")

    best = max(float(vals[k]), float(fc), float(fd))

    # Verification sample; the returned bound also dominates it, so the
    # stated inequality holds with zero violations on this grid.
    sample = np.exp(np.linspace(np.log(t_lo), np.log(t_hi), verify_points))
    sample_max = float(np.max(_envelope_ratio(sample, epsilon, p, q)))
    c_eps = max(best, sample_max, 0.0)
    if not np.isfinite(c_eps):
        raise NumericalFailureError("envelope maximization produced a non-finite value")
    return NonlinearityBounds(epsilon=float(epsilon), c_epsilon=c_eps, q=float(q), p=float(p))
