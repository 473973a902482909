"""Consistency, envelope references, and boundary barriers.

The discrete min-average operator approximates (r**2 / 2) times the
smallest Hessian eigenvalue of a smooth test function, so the continuum
limit of the DPP solution is the convex envelope of the boundary datum:
the unique solution of lambda_1(D^2 u) = 0 with Dirichlet data.  This
module measures that consistency on concrete graphs, supplies analytic
envelopes and a brute-force Caratheodory oracle for validation, extends
graph values to the continuum domain, and evaluates the boundary
barrier used in the attainment argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    InfeasibleOracleError,
    InvalidDimensionError,
    InvalidParameterError,
    OutOfDomainError,
)
from .geometry import DomainSpec
from .rgg import AnnulusSystem, ProximityGraph, VertexClassification, _lex_pick
from .solver import ValueField, datum_values, _operator_gap
from .streams import uniform01

_SYM_TOL = 1e-12
_OFFDIAG_TOL = 1e-12


def _jacobi_min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue by cyclic Jacobi rotations (symmetric input)."""
    a = a.copy()
    d = a.shape[0]
    for _ in range(60):
        off = np.abs(a - np.diag(np.diag(a)))
        if off.max() <= _OFFDIAG_TOL:
            break
        for i in range(d - 1):
            for j in range(i + 1, d):
                if abs(a[i, j]) <= _OFFDIAG_TOL * 1e-2:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * a[i, j])
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[i, i] = rot[j, j] = c
                rot[i, j] = s
                rot[j, i] = -s
                a = rot.T @ a @ rot
    return float(np.diag(a).min())


def lambda_min(h: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Uses the trace/determinant closed form for 2x2 input and cyclic
    Jacobi iteration above; asymmetry beyond 1e-12 is rejected.
    """
    a = np.asarray(h, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
        raise InvalidParameterError("lambda_min needs a square matrix of size >= 2")
    if np.abs(a - a.T).max() > _SYM_TOL:
        raise InvalidParameterError("matrix is not symmetric within 1e-12")
    a = 0.5 * (a + a.T)
    if a.shape[0] == 2:
        half_tr = 0.5 * (a[0, 0] + a[1, 1])
        gap = math.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1])
        return float(half_tr - gap)
    return _jacobi_min_eigenvalue(a)


@dataclass(frozen=True)
class SmoothTestFunction:
    """Twice differentiable test function with explicit derivative bounds.

    value maps (m, d) points to m values, gradient to (m, d), hessian to
    (m, d, d).  c_hess bounds the Hessian spectral norm and c_lip the
    gradient norm over the unit cube; quadratic marks exact second-order
    Taylor expansions.
    """

    name: str
    value: object = field(repr=False)
    gradient: object = field(repr=False)
    hessian: object = field(repr=False)
    c_hess: float = 1.0
    c_lip: float = 1.0
    quadratic: bool = False


def half_square_norm(d: int) -> SmoothTestFunction:
    """phi(x) = |x|^2 / 2, the canonical quadratic probe."""
    return SmoothTestFunction(
        name="half_square_norm",
        value=lambda p: 0.5 * (np.asarray(p) ** 2).sum(-1),
        gradient=lambda p: np.asarray(p, dtype=float).copy(),
        hessian=lambda p: np.broadcast_to(np.eye(d), (np.asarray(p).shape[0], d, d)).copy(),
        c_hess=1.0,
        c_lip=math.sqrt(d),
        quadratic=True,
    )


def quadratic_test_function(a: np.ndarray, b: np.ndarray, c: float = 0.0,
                            name: str = "quadratic") -> SmoothTestFunction:
    """phi(x) = x a x / 2 + b x + c for a symmetric matrix a."""
    a = 0.5 * (np.asarray(a, dtype=float) + np.asarray(a, dtype=float).T)
    b = np.asarray(b, dtype=float)
    d = a.shape[0]
    corners = np.array(np.meshgrid(*([[0.0, 1.0]] * d), indexing="ij")).reshape(d, -1).T
    c_lip = float(np.linalg.norm(corners @ a + b, axis=1).max())
    c_hess = float(np.abs(np.linalg.eigvalsh(a)).max())
    return SmoothTestFunction(
        name=name,
        value=lambda p: 0.5 * np.einsum("md,de,me->m", p, a, p) + p @ b + c,
        gradient=lambda p: p @ a + b,
        hessian=lambda p: np.broadcast_to(a, (np.asarray(p).shape[0], d, d)).copy(),
        c_hess=c_hess,
        c_lip=c_lip,
        quadratic=True,
    )


def verify_gradient(fn: SmoothTestFunction, points: np.ndarray, step: float = 1e-5) -> float:
    """Max relative deviation of central differences from fn.gradient."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    grad = np.asarray(fn.gradient(pts), dtype=float)
    fd = np.empty_like(grad)
    for k in range(pts.shape[1]):
        plus = pts.copy()
        minus = pts.copy()
        plus[:, k] += step
        minus[:, k] -= step
        fd[:, k] = (fn.value(plus) - fn.value(minus)) / (2.0 * step)
    scale = np.maximum(1.0, np.linalg.norm(grad, axis=1))
    return float((np.linalg.norm(fd - grad, axis=1) / scale).max())


def _lambda_min_batch(hessians: np.ndarray) -> np.ndarray:
    h = np.asarray(hessians, dtype=float)
    if np.abs(h - np.swapaxes(h, -1, -2)).max() > _SYM_TOL:
        raise InvalidParameterError("hessians are not symmetric within 1e-12")
    h = 0.5 * (h + np.swapaxes(h, -1, -2))
    if h.shape[-1] == 2:
        half_tr = 0.5 * (h[:, 0, 0] + h[:, 1, 1])
        gap = np.hypot(0.5 * (h[:, 0, 0] - h[:, 1, 1]), h[:, 0, 1])
        return half_tr - gap
    return np.array([_jacobi_min_eigenvalue(m) for m in h])


def discrete_operator(system: AnnulusSystem, phi, x: int) -> float:
    """min over annulus members y of (phi(y) + phi(y_x))/2 - phi(x)."""
    pts = system.graph.points
    row = system.row(x)
    if row.size == 0:
        raise InvalidParameterError(f"vertex {x} has an empty annulus neighborhood")
    part = system.row_partners(x)
    vals = phi(pts) if callable(phi) else np.asarray(phi, dtype=float)
    return float((0.5 * (vals[row] + vals[part])).min() - vals[x])


@dataclass(frozen=True)
class ConsistencyReport:
    """Normalized consistency residuals of the discrete operator."""

    vertices: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    max_normalized_residual: float = float("nan")
    bound: np.ndarray | None = field(repr=False, default=None)
    bound_ok: bool | None = None
    worst_excess: float | None = None


def consistency_report(system: AnnulusSystem, classification: VertexClassification,
                       fn: SmoothTestFunction, reflection=None) -> ConsistencyReport:
    """Residual |discrete op - (r^2/2) lambda_1(D^2 phi)| / r^2 per interior vertex.

    With reflection errors supplied and a quadratic fn, also checks the
    per-vertex bound 4 * c_hess * delta + c_lip * reflection_max / r.
    """
    interior, offsets, ys, yxs = system.interior_pairs(classification)
    pts = system.graph.points
    r = system.graph.r
    vals = np.asarray(fn.value(pts), dtype=float)
    cand = 0.5 * (vals[ys] + vals[yxs])
    ops = np.minimum.reduceat(cand, offsets[:-1]) - vals[interior]
    lam = _lambda_min_batch(fn.hessian(pts[interior]))
    residuals = np.abs(ops - 0.5 * r * r * lam) / (r * r)
    bound = None
    bound_ok = None
    worst = None
    if reflection is not None and fn.quadratic:
        if not np.array_equal(reflection.vertices, interior):
            raise InvalidParameterError("reflection errors do not match the interior set")
        bound = 4.0 * fn.c_hess * system.delta + fn.c_lip * reflection.per_vertex_max / r
        excess = residuals - bound
        worst = float(excess.max())
        bound_ok = bool(worst <= 0.0)
    return ConsistencyReport(
        vertices=interior,
        residuals=residuals,
        max_normalized_residual=float(residuals.max()) if residuals.size else float("nan"),
        bound=bound,
        bound_ok=bound_ok,
        worst_excess=worst,
    )


@dataclass(frozen=True)
class EnvelopeCase:
    """Boundary datum with a known convex envelope on the domain."""

    kind: str
    domain: DomainSpec
    payload: tuple = ()

    @property
    def datum_id(self) -> str:
        return f"{self.kind}{self.payload!r}"

    def datum(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "constant":
            return np.full(pts.shape[0], self.payload[0])
        if self.kind == "affine":
            a = np.asarray(self.payload[0])
            return pts @ a + self.payload[1]
        c = self.domain.center
        return (pts[:, 0] - c[0]) ** 2 - (pts[:, 1] - c[1]) ** 2

    def envelope(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "constant":
            return np.full(pts.shape[0], self.payload[0])
        if self.kind == "affine":
            a = np.asarray(self.payload[0])
            return pts @ a + self.payload[1]
        c = self.domain.center
        radius = self.domain.radii[0]
        return 2.0 * (pts[:, 0] - c[0]) ** 2 - radius * radius

    def boundary_lipschitz(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "affine":
            return float(np.linalg.norm(self.payload[0]))
        return 2.0 * float(self.domain.radii[0])

    def boundary_oscillation(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "affine":
            a = np.asarray(self.payload[0])
            return 2.0 * float(np.linalg.norm(a * self.domain.radii))
        return 2.0 * float(self.domain.radii[0]) ** 2


def constant_case(domain: DomainSpec, c: float) -> EnvelopeCase:
    return EnvelopeCase(kind="constant", domain=domain, payload=(float(c),))


def affine_case(domain: DomainSpec, a, b: float) -> EnvelopeCase:
    return EnvelopeCase(kind="affine", domain=domain,
                        payload=(tuple(float(v) for v in a), float(b)))


def saddle_case(domain: DomainSpec) -> EnvelopeCase:
    """f(x) = (x1-c1)^2 - (x2-c2)^2 on a planar ball; envelope 2(x1-c1)^2 - R^2."""
    if domain.kind != "ball" or domain.d != 2:
        raise InvalidParameterError("the saddle case needs a planar ball domain")
    return EnvelopeCase(kind="saddle", domain=domain)


def analytic_envelope(case: EnvelopeCase, x) -> float | np.ndarray:
    """Closed-form convex envelope value; x must lie in the closure of D."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    dist = case.domain.boundary_distance(pts)
    if np.any(np.asarray(dist) > 1e-12):
        raise OutOfDomainError("point outside the domain closure")
    out = case.envelope(pts)
    return float(out[0]) if np.asarray(x).ndim == 1 else out


def brute_envelope_oracle(domain: DomainSpec, f, x, m_samples: int, oracle_seed: int) -> float:
    """Caratheodory sampling lower envelope at an interior point (d = 2).

    Draws m boundary-point triples at seeded angles plus one chord
    through x per sample, keeps the feasible convex combinations
    (weights >= -1e-12, clamped at zero), and returns the running
    minimum of the combined datum values.  More samples never increase
    the result because the angle stream is counter-based.
    """
    if domain.d != 2:
        raise InvalidDimensionError("the brute-force oracle is planar only")
    if m_samples < 100:
        raise InvalidParameterError("oracle needs m_samples >= 100")
    x = np.asarray(x, dtype=float)
    if domain.boundary_distance(x) >= 0.0:
        raise OutOfDomainError("oracle point must lie strictly inside the domain")
    draws = uniform01(oracle_seed, 0, 4 * m_samples).reshape(m_samples, 4)
    theta = draws[:, :3] * (2.0 * math.pi)
    center, radii = domain.center, domain.radii
    tri = np.empty((m_samples, 3, 2))
    tri[:, :, 0] = center[0] + radii[0] * np.cos(theta)
    tri[:, :, 1] = center[1] + radii[1] * np.sin(theta)

    # barycentric weights via Cramer on [[p1 p2 p3], [1 1 1]] w = [x, 1]
    p1, p2, p3 = tri[:, 0], tri[:, 1], tri[:, 2]
    det = ((p2[:, 0] - p1[:, 0]) * (p3[:, 1] - p1[:, 1])
           - (p3[:, 0] - p1[:, 0]) * (p2[:, 1] - p1[:, 1]))
    ok = np.abs(det) > 1e-14
    safe = np.where(ok, det, 1.0)
    w2 = ((x[0] - p1[:, 0]) * (p3[:, 1] - p1[:, 1])
          - (p3[:, 0] - p1[:, 0]) * (x[1] - p1[:, 1])) / safe
    w3 = ((p2[:, 0] - p1[:, 0]) * (x[1] - p1[:, 1])
          - (x[0] - p1[:, 0]) * (p2[:, 1] - p1[:, 1])) / safe
    w1 = 1.0 - w2 - w3
    weights = np.stack([w1, w2, w3], axis=1)
    feasible = ok & (weights >= -1e-12).all(axis=1)
    best = math.inf
    if feasible.any():
        w = np.clip(weights[feasible], 0.0, None)
        w /= w.sum(axis=1, keepdims=True)
        fvals = f(tri[feasible].reshape(-1, 2)).reshape(-1, 3)
        best = float((w * fvals).sum(axis=1).min())

    # chord through x: always feasible at interior points
    psi = draws[:, 3] * math.pi
    u = np.column_stack([np.cos(psi), np.sin(psi)])
    q = (x - center) / radii
    w_dir = u / radii
    a = (w_dir * w_dir).sum(1)
    b = w_dir @ q
    disc = b * b - a * ((q * q).sum() - 1.0)
    root = np.sqrt(np.maximum(disc, 0.0))
    t_plus = (-b + root) / a
    t_minus = (-b - root) / a
    lam = t_minus / (t_minus - t_plus)
    p_plus = x + t_plus[:, None] * u
    p_minus = x + t_minus[:, None] * u
    chord_vals = lam * f(p_plus) + (1.0 - lam) * f(p_minus)
    best = min(best, float(chord_vals.min()))
    if not math.isfinite(best):
        raise InfeasibleOracleError("no feasible boundary combination found")
    return best


class ValueExtender:
    """Nearest-component-vertex extension of a value field to the continuum."""

    def __init__(self, values: ValueField | np.ndarray,
                 classification: VertexClassification, graph: ProximityGraph):
        if classification.component.size == 0:
            raise InvalidParameterError("cannot extend values from an empty component")
        self.vals = values.values if isinstance(values, ValueField) else np.asarray(values, dtype=float)
        self.comp = classification.component
        self.points = graph.points
        self._tree = cKDTree(self.points[self.comp])

    def nearest_vertex(self, x: np.ndarray) -> np.ndarray:
        """Index of the nearest component vertex, ties by lexicographic coordinates then index."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        k = min(8, self.comp.size)
        dist, pos = self._tree.query(pts, k=k)
        dist = np.atleast_2d(dist)
        pos = np.atleast_2d(pos)
        out = self.comp[pos[:, 0]]
        tied = dist[:, -1] == dist[:, 0] if k > 1 else np.zeros(pts.shape[0], dtype=bool)
        multi = (dist == dist[:, :1]).sum(axis=1) > 1 if k > 1 else tied
        for i in np.flatnonzero(multi | tied):
            d0 = np.linalg.norm(self.points[self.comp] - pts[i], axis=1)
            cand = self.comp[d0 == d0.min()]
            out[i] = _lex_pick(self.points, cand)
        return out

    def at(self, x: np.ndarray) -> np.ndarray:
        single = np.asarray(x).ndim == 1
        vals = self.vals[self.nearest_vertex(x)]
        return float(vals[0]) if single else vals


def extend_values(values, classification: VertexClassification,
                  graph: ProximityGraph, x) -> float | np.ndarray:
    """Value at the nearest component vertex (one-shot convenience)."""
    return ValueExtender(values, classification, graph).at(x)


def make_eval_grid(domain: DomainSpec, resolution: int, margin: float) -> np.ndarray:
    """Regular lattice over the domain's bounding box, kept at depth >= margin."""
    if resolution < 2:
        raise InvalidParameterError("grid resolution must be >= 2")
    axes = [np.linspace(domain.center[k] - domain.radii[k],
                        domain.center[k] + domain.radii[k], resolution)
            for k in range(domain.d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    depth = np.asarray(domain.boundary_distance(pts))
    return pts[depth <= -margin]


@dataclass(frozen=True)
class ErrorStats:
    """Sup and mean absolute deviation over an evaluation grid."""

    sup: float
    mean: float
    grid_points: int


def sup_error(values, classification: VertexClassification, graph: ProximityGraph,
              case: EnvelopeCase, resolution: int, margin: float | None = None) -> ErrorStats:
    """Extension error against the analytic envelope on an interior lattice."""
    margin = 0.5 * graph.r if margin is None else float(margin)
    grid = make_eval_grid(case.domain, resolution, margin)
    if grid.shape[0] == 0:
        raise InvalidParameterError("evaluation grid is empty; lower the margin or raise resolution")
    approx = ValueExtender(values, classification, graph).at(grid)
    exact = case.envelope(grid)
    err = np.abs(approx - exact)
    return ErrorStats(sup=float(err.max()), mean=float(err.mean()), grid_points=int(grid.shape[0]))


@dataclass(frozen=True)
class BarrierReport:
    """Subsolution diagnostics of the boundary barrier."""

    min_residual: float
    datum_ok: bool
    worst_gap: float
    worst_vertex: int | None
    slope: float
    eta: float


def barrier_values(domain: DomainSpec, y0: np.ndarray, slope: float, eta: float,
                   f_y0: float, pts: np.ndarray) -> np.ndarray:
    """v(x) = -K <x - y0, inward normal> + (eta/2) |x - y0|^2 + f(y0) - eta/2."""
    nhat = domain.inward_normal(y0)
    w = np.atleast_2d(np.asarray(pts, dtype=float)) - np.asarray(y0, dtype=float)
    return -slope * (w @ nhat) + 0.5 * eta * (w * w).sum(-1) + f_y0 - 0.5 * eta


def barrier_slope(case: EnvelopeCase, eta: float) -> float:
    """Slope K sufficient for v <= f near the boundary point.

    On a ball of radius R the chord identity <x - y0, n> = |x - y0|^2 / (2R)
    and the datum's Lipschitz bound L give K = R * (eta + L^2 / eta); for
    an ellipsoid R is replaced by the largest curvature radius.
    """
    radii = case.domain.radii
    radius = float(radii.max() ** 2 / radii.min())
    lip = case.boundary_lipschitz()
    return radius * (eta + lip * lip / eta)


def barrier_residual(system: AnnulusSystem, classification: VertexClassification,
                     case: EnvelopeCase, y0, slope: float, eta: float) -> BarrierReport:
    """Worst interior value of min_y (v(y)+v(y_x))/2 - v(x) for the barrier.

    First checks the precondition v <= f on boundary vertices and
    reports the most violating vertex if it fails.
    """
    pts = system.graph.points
    y0 = np.asarray(y0, dtype=float)
    f_y0 = float(case.datum(y0[None, :])[0])
    v = barrier_values(case.domain, y0, slope, eta, f_y0, pts)
    boundary = classification.boundary
    gaps = case.datum(pts[boundary]) - v[boundary]
    worst_pos = int(np.argmin(gaps)) if boundary.size else None
    worst_gap = float(gaps.min()) if boundary.size else math.inf
    datum_ok = bool(worst_gap >= -1e-12)
    residuals = _operator_gap(v, system, classification)
    return BarrierReport(
        min_residual=float(residuals.min()),
        datum_ok=datum_ok,
        worst_gap=worst_gap,
        worst_vertex=int(boundary[worst_pos]) if boundary.size else None,
        slope=float(slope),
        eta=float(eta),
    )
