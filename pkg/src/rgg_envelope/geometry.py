"""Point clouds, domains, and graph parameter schedules.

Experiments live in the unit cube [0, 1]^d, d >= 2.  A point cloud is n
i.i.d. uniform points drawn by a counter-based generator so that clouds
are bit-identical across platforms and the first m points of a cloud
coincide with the m-point cloud of the same seed.  The obstacle-free
domain D is a ball or an axis-aligned ellipsoid whose closure must stay
inside the open cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidDimensionError, InvalidParameterError, OutOfDomainError, ScheduleUndefinedError
from .streams import uniform01


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PointCloud:
    """Sampled vertex positions chi_n in [0, 1]^d."""

    d: int
    n: int
    seed: int | None
    points: np.ndarray = field(repr=False)

    @classmethod
    def from_points(cls, points: np.ndarray) -> "PointCloud":
        """Wrap an explicit (n, d) coordinate array (hand fixtures)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise InvalidParameterError("points must be a 2-d array")
        n, d = pts.shape
        if d < 2:
            raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
        if n and (pts.min() < 0.0 or pts.max() > 1.0):
            raise InvalidParameterError("coordinates must lie in [0, 1]")
        return cls(d=d, n=n, seed=None, points=_readonly(pts))


def sample_points(d: int, n: int, seed: int) -> PointCloud:
    """Draw n uniform points in [0, 1]^d.

    Coordinate j of point i is draw i*d + j of the seed's stream, which
    makes clouds deterministic and prefix-coupled: the first m points of
    (d, n, seed) equal the cloud (d, m, seed) exactly.
    """
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    pts = uniform01(seed, 0, n * d).reshape(n, d)
    return PointCloud(d=d, n=n, seed=int(seed), points=_readonly(pts))


@dataclass(frozen=True)
class DomainSpec:
    """Ball or axis-aligned ellipsoid D with closure inside the open cube."""

    kind: str
    center: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)

    def __post_init__(self):
        center = _readonly(np.atleast_1d(self.center))
        radii = _readonly(np.atleast_1d(self.radii))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radii", radii)
        d = center.shape[0]
        if d < 2:
            raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
        if radii.shape != center.shape:
            raise InvalidParameterError("center and radii must have equal length")
        if self.kind not in ("ball", "ellipsoid"):
            raise InvalidParameterError(f"unknown domain kind {self.kind!r}")
        if np.any(radii <= 0.0):
            raise InvalidParameterError("radii must be positive")
        if self.kind == "ball" and np.ptp(radii) != 0.0:
            raise InvalidParameterError("a ball must have equal radii")
        if self.cube_margin() <= 0.0:
            raise InvalidParameterError("domain closure must lie in the open unit cube")

    @classmethod
    def ball(cls, center, radius: float) -> "DomainSpec":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(kind="ball", center=center, radii=np.full(center.shape, float(radius)))

    @classmethod
    def ellipsoid(cls, center, radii) -> "DomainSpec":
        return cls(kind="ellipsoid", center=np.asarray(center, dtype=float),
                   radii=np.asarray(radii, dtype=float))

    @property
    def d(self) -> int:
        return self.center.shape[0]

    def cube_margin(self) -> float:
        """Distance from the closure of D to the cube boundary (axis-aligned)."""
        lo = self.center - self.radii
        hi = 1.0 - (self.center + self.radii)
        return float(min(lo.min(), hi.min()))

    def contains(self, x) -> np.ndarray | bool:
        """Open-set membership test; vectorized over rows of x."""
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        q = (np.atleast_2d(pts) - self.center) / self.radii
        inside = np.einsum("ij,ij->i", q, q) < 1.0
        return bool(inside[0]) if single else inside

    def boundary_point(self, angles) -> np.ndarray:
        """Boundary point from d-1 spherical angles (a single angle when d = 2)."""
        ang = np.atleast_1d(np.asarray(angles, dtype=float))
        if ang.shape[0] != self.d - 1:
            raise InvalidParameterError(f"need {self.d - 1} angles, got {ang.shape[0]}")
        u = np.empty(self.d)
        s = 1.0
        for k in range(self.d - 1):
            u[k] = s * math.cos(ang[k])
            s *= math.sin(ang[k])
        u[self.d - 1] = s
        return self.center + self.radii * u

    def inward_normal(self, y) -> np.ndarray:
        """Unit inward normal at a boundary point y."""
        y = np.asarray(y, dtype=float)
        if abs(self.boundary_distance(y)) > 1e-9:
            raise OutOfDomainError("inward_normal requires a point on the boundary")
        grad = 2.0 * (y - self.center) / self.radii**2  # outward gradient of the level set
        return -grad / np.linalg.norm(grad)

    def boundary_distance(self, x) -> float | np.ndarray:
        """Signed distance to the boundary: negative inside, positive outside."""
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        pts2 = np.atleast_2d(pts)
        if self.kind == "ball":
            dist = np.linalg.norm(pts2 - self.center, axis=1) - self.radii[0]
        else:
            dist = np.array([self._ellipsoid_distance(p) for p in pts2])
        return float(dist[0]) if single else dist

    def _ellipsoid_distance(self, x: np.ndarray) -> float:
        p = x - self.center
        e = self.radii
        sign = 1.0 if float(np.sum((p / e) ** 2)) >= 1.0 else -1.0
        nz = p != 0.0
        if not nz.any():
            return -float(e.min())
        best = self._nearest_sq(p[nz], e[nz])
        # a zero component can leave the axis at the KKT branch t = -e_j^2
        for ej in np.unique(e[~nz]):
            denom = e[nz] ** 2 - ej**2
            if np.any(denom == 0.0):
                continue
            s = p[nz] * e[nz] ** 2 / denom
            q = 1.0 - float(np.sum((s / e[nz]) ** 2))
            if q >= 0.0:
                cand = float(np.sum((s - p[nz]) ** 2)) + ej**2 * q
                best = min(best, cand)
        return sign * math.sqrt(best)

    def _nearest_sq(self, p: np.ndarray, e: np.ndarray) -> float:
        """Squared distance from p (all components nonzero) to the ellipsoid with radii e."""
        e2 = e**2

        def f(t: float) -> float:
            return float(np.sum((e * p / (e2 + t)) ** 2)) - 1.0

        # unique root on (pole, inf): f decreases from +inf to -1
        pole = -float(e2.min())
        eps = 1e-12 * max(1.0, -pole)
        while f(pole + eps) <= 0.0:
            eps *= 0.125
        hi = pole + max(1.0, float(e.max() * np.linalg.norm(p))) + float(e2.max() - e2.min())
        while f(hi) >= 0.0:
            hi = pole + 2.0 * (hi - pole)
        t = brentq(f, pole + eps, hi, xtol=1e-18, rtol=8.9e-16, maxiter=500)
        # y - p = -p*t/(e^2+t); this form avoids cancellation near the boundary
        return float(np.sum((p * t / (e2 + t)) ** 2))


@dataclass(frozen=True)
class GraphParams:
    """Connectivity radius r, annulus width fraction delta, cone aperture alpha."""

    n: int
    r: float
    delta: float
    alpha: float

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError("n must be nonnegative")
        for name in ("r", "delta", "alpha"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvalidParameterError(f"{name} must lie in (0, 1), got {v}")


def schedule_params(n: int, d: int, mode: str = "asymptotic", explicit_r: float | None = None) -> GraphParams:
    """Parameter schedule for an n-point experiment in dimension d.

    Asymptotic mode chooses r so that sqrt(n) * r**(2*d) equals (log n)**2;
    practical mode takes r explicitly.  Both modes then set
    delta = r / sqrt(log n) and alpha = r / (log n)**(1 / (2*(d-1))).
    Natural logarithm throughout.
    """
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    if n < 3:
        raise ScheduleUndefinedError(f"schedule undefined for n = {n} (need n >= 3)")
    log_n = math.log(n)
    if mode == "asymptotic":
        if explicit_r is not None:
            raise InvalidParameterError("asymptotic mode does not take an explicit radius")
        r = (log_n**2 / math.sqrt(n)) ** (1.0 / (2 * d))
        if not (0.0 < r < 1.0):
            raise InvalidParameterError(
                f"asymptotic schedule gives r = {r:.4f} outside (0, 1); n is too small for d = {d}"
            )
    elif mode == "practical":
        if explicit_r is None:
            raise InvalidParameterError("practical mode requires an explicit radius")
        r = float(explicit_r)
        if not (0.0 < r < 1.0):
            raise InvalidParameterError(f"explicit radius must lie in (0, 1), got {r}")
    else:
        raise InvalidParameterError(f"unknown schedule mode {mode!r}")
    delta = r / math.sqrt(log_n)
    alpha = r / log_n ** (1.0 / (2 * (d - 1)))
    return GraphParams(n=n, r=r, delta=delta, alpha=alpha)
