"""Random geometric graphs, annulus neighborhoods, and quasi-reflections.

Vertices are cloud points; two vertices are adjacent when their distance
is strictly below the connectivity radius r.  Construction bins points
into a uniform grid so only nearby cells are compared.  The solver and
the game operate on the largest connected component, split by a domain
into interior vertices (inside the open set D) and boundary vertices.

The annulus neighborhood of x keeps the neighbors y with
(1-delta)*r < |x-y| < r, and the quasi-reflection of y about x is the
annulus member minimizing |z + y - 2x|, ties broken by lexicographic
order of coordinates and then by vertex index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import InvalidParameterError, MissingAnnulusError
from .geometry import DomainSpec, GraphParams, PointCloud


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)


class _Grid:
    """Uniform bucketing of points in [0, 1]^d with side `cell`."""

    def __init__(self, points: np.ndarray, cell: float):
        self.points = points
        self.cell = float(cell)
        n, d = points.shape
        self.d = d
        side = int(math.floor(1.0 / self.cell)) + 1
        self.dims = (side,) * d
        if n:
            coords = np.minimum(np.floor(points / self.cell).astype(np.int64), side - 1)
            ids = np.ravel_multi_index(tuple(coords.T), self.dims)
        else:
            ids = np.zeros(0, dtype=np.int64)
        self.order = np.argsort(ids, kind="stable")
        sorted_ids = ids[self.order]
        uniq, starts = np.unique(sorted_ids, return_index=True)
        ends = np.append(starts[1:], n)
        self._span = {int(u): (int(s), int(e)) for u, s, e in zip(uniq, starts, ends)}
        self.cell_ids = uniq

    def members(self, cid: int) -> np.ndarray:
        span = self._span.get(int(cid))
        if span is None:
            return np.zeros(0, dtype=np.int64)
        return self.order[span[0]:span[1]]

    def around(self, point: np.ndarray, reach: int = 1) -> np.ndarray:
        """Indices of all points in cells within `reach` of the point's cell."""
        side = self.dims[0]
        base = np.minimum(np.floor(point / self.cell).astype(np.int64), side - 1)
        found = []
        for off in itertools.product(range(-reach, reach + 1), repeat=self.d):
            c = base + np.asarray(off)
            if np.any(c < 0) or np.any(c >= side):
                continue
            found.append(self.members(np.ravel_multi_index(tuple(c), self.dims)))
        return np.concatenate(found) if found else np.zeros(0, dtype=np.int64)

    def iter_blocks(self, reach: int):
        """Yield (ia, ib) index arrays, one per unordered pair of nearby cells.

        Every unordered pair of distinct cells within `reach` appears once;
        ib is None for the within-cell block.
        """
        side = self.dims[0]
        offsets = [off for off in itertools.product(range(-reach, reach + 1), repeat=self.d)
                   if off > (0,) * self.d]
        for cid in self.cell_ids:
            ia = self.members(cid)
            yield ia, None
            base = np.array(np.unravel_index(int(cid), self.dims))
            for off in offsets:
                c = base + np.asarray(off)
                if np.any(c < 0) or np.any(c >= side):
                    continue
                ib = self.members(np.ravel_multi_index(tuple(c), self.dims))
                if ib.size:
                    yield ia, ib


class ProximityGraph:
    """Geometric graph with edges at distance strictly below r."""

    def __init__(self, cloud: PointCloud, r: float):
        if not (0.0 < r < 1.0):
            raise InvalidParameterError(f"radius must lie in (0, 1), got {r}")
        self.cloud = cloud
        self.r = float(r)
        self.points = cloud.points
        self.n = cloud.n
        self.d = cloud.d
        self._grid = _Grid(self.points, self.r)
        self._adjacency: tuple[np.ndarray, np.ndarray] | None = None

    def neighbors(self, i: int) -> np.ndarray:
        """Ascending indices of vertices within distance r of vertex i."""
        cand = self._grid.around(self.points[i])
        d2 = ((self.points[cand] - self.points[i]) ** 2).sum(-1)
        out = cand[(d2 < self.r * self.r) & (cand != i)]
        return np.sort(out)

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """Full adjacency in compressed offset layout (indptr, indices).

        Row i is indices[indptr[i]:indptr[i+1]], ascending.  Materialized
        on first use; large dense graphs are better served by the annulus
        structures, which stay sparse.
        """
        if self._adjacency is None:
            r2 = self.r * self.r
            src, dst = [], []
            for ia, ib in self._grid.iter_blocks(1):
                if ib is None:
                    d2 = _sq_dists(self.points[ia], self.points[ia])
                    ii, jj = np.nonzero(np.triu(d2 < r2, k=1))
                    u, v = ia[ii], ia[jj]
                else:
                    d2 = _sq_dists(self.points[ia], self.points[ib])
                    ii, jj = np.nonzero(d2 < r2)
                    u, v = ia[ii], ib[jj]
                src.append(u)
                src.append(v)
                dst.append(v)
                dst.append(u)
            src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
            dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
            order = np.lexsort((dst, src))
            src, dst = src[order], dst[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._adjacency = (indptr, dst)
        return self._adjacency


def build_graph(cloud: PointCloud, r: float) -> ProximityGraph:
    return ProximityGraph(cloud, r)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]


@dataclass(frozen=True)
class VertexClassification:
    """Component labels plus the interior/boundary split of the largest component."""

    labels: np.ndarray = field(repr=False)
    component: np.ndarray = field(repr=False)
    interior: np.ndarray | None = field(repr=False, default=None)
    boundary: np.ndarray | None = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.interior] = True
        return mask

    def component_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.component] = True
        return mask


def largest_component(graph: ProximityGraph) -> VertexClassification:
    """Connected components without materializing the dense edge list.

    A secondary grid with cell side below r/sqrt(d) makes every cell a
    clique, so one union per cell plus one union per linked cell pair
    reproduces the edge-graph connectivity exactly.  The largest
    component wins ties by its smallest contained vertex index.
    """
    n = graph.n
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return VertexClassification(labels=empty, component=empty)
    r2 = graph.r * graph.r
    cell = graph.r / (math.sqrt(graph.d) * (1.0 + 1e-9))
    reach = math.ceil(graph.r / cell)
    grid = _Grid(graph.points, cell)
    dsu = _DisjointSet(n)
    for ia, ib in grid.iter_blocks(reach):
        if ib is None:
            first = int(ia[0])
            for k in ia[1:]:
                dsu.union(first, int(k))
        else:
            d2 = _sq_dists(graph.points[ia], graph.points[ib])
            if d2.min() < r2:
                dsu.union(int(ia[0]), int(ib[0]))
    roots = np.fromiter((dsu.find(i) for i in range(n)), dtype=np.int64, count=n)
    uniq, first_pos, labels, sizes = np.unique(
        roots, return_index=True, return_inverse=True, return_counts=True
    )
    # relabel components by first appearance so ids are deterministic
    rank = np.argsort(np.argsort(first_pos))
    labels = rank[labels]
    best = max(range(uniq.shape[0]), key=lambda c: (sizes[c], -first_pos[c]))
    component = np.flatnonzero(labels == rank[best])
    return VertexClassification(labels=labels, component=component)


def classify_vertices(graph: ProximityGraph, classification: VertexClassification,
                      domain: DomainSpec) -> VertexClassification:
    """Split the largest component into interior (inside open D) and boundary."""
    if domain.d != graph.d:
        raise InvalidParameterError("domain dimension does not match the cloud")
    comp = classification.component
    inside = domain.contains(graph.points[comp]) if comp.size else np.zeros(0, dtype=bool)
    return VertexClassification(
        labels=classification.labels,
        component=comp,
        interior=comp[inside],
        boundary=comp[~inside],
    )


def classify(graph: ProximityGraph, domain: DomainSpec) -> VertexClassification:
    return classify_vertices(graph, largest_component(graph), domain)


def _band(r: float, delta: float) -> tuple[float, float]:
    if not (0.0 < delta < 1.0):
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    inner = (1.0 - delta) * r
    return inner * inner, r * r


def annulus_neighbors(graph: ProximityGraph, x: int, delta: float) -> np.ndarray:
    """Ascending indices of neighbors with (1-delta)*r < |x-y| < r."""
    inner2, r2 = _band(graph.r, delta)
    cand = graph._grid.around(graph.points[x])
    d2 = ((graph.points[cand] - graph.points[x]) ** 2).sum(-1)
    out = cand[(d2 > inner2) & (d2 < r2) & (cand != x)]
    return np.sort(out)


def _lex_pick(points: np.ndarray, candidates: np.ndarray) -> int:
    """Candidate with lexicographically smallest coordinates, then smallest index."""
    cols = points[candidates]
    keys = [candidates] + [cols[:, c] for c in range(cols.shape[1] - 1, -1, -1)]
    return int(candidates[np.lexsort(tuple(keys))[0]])


def reflect(graph: ProximityGraph, x: int, y: int, delta: float,
            return_degenerate: bool = False):
    """Quasi-reflection of annulus member y about x.

    Returns the annulus member z minimizing |z + y - 2x|; with
    return_degenerate=True also returns whether z == y (which happens on
    one-sided annuli and is legal).
    """
    ann = annulus_neighbors(graph, x, delta)
    if ann.size == 0:
        raise MissingAnnulusError(x)
    pos = np.searchsorted(ann, y)
    if pos >= ann.size or ann[pos] != y:
        raise InvalidParameterError(f"vertex {y} is not an annulus neighbor of {x}")
    w = graph.points[ann] - graph.points[x]
    vals = ((w + w[pos]) ** 2).sum(-1)
    best = vals.min()
    ties = ann[vals == best]
    z = int(ties[0]) if ties.size == 1 else _lex_pick(graph.points, ties)
    if return_degenerate:
        return z, bool(z == y)
    return z


class AnnulusSystem:
    """Annulus adjacency rows and quasi-reflection partners for every vertex.

    indptr/indices hold the annulus lists (ascending within each row);
    partners[e] is the quasi-reflection of indices[e] about the row owner.
    The structure depends only on (cloud, r, delta), so it can be cached
    and reused across domains and data.
    """

    def __init__(self, graph: ProximityGraph, delta: float,
                 indptr: np.ndarray | None = None,
                 indices: np.ndarray | None = None,
                 partners: np.ndarray | None = None):
        self.graph = graph
        self.delta = float(delta)
        self.inner2, self.r2 = _band(graph.r, delta)
        if indptr is None:
            self.indptr, self.indices = self._build_rows()
        else:
            self.indptr, self.indices = indptr, indices
        if partners is None:
            # partners are filled lazily per row: boundary rows are often
            # never consumed and can be much larger than interior ones
            self._partners = np.full(self.indices.shape, -1, dtype=np.int64)
            self._partner_done = np.zeros(self.graph.n, dtype=bool)
            self._partner_done[np.diff(self.indptr) == 0] = True
        else:
            self._partners = partners
            self._partner_done = np.ones(self.graph.n, dtype=bool)

    def _build_rows(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.graph.n
        pts = self.graph.points
        src, dst = [], []
        for ia, ib in self.graph._grid.iter_blocks(1):
            if ib is None:
                d2 = _sq_dists(pts[ia], pts[ia])
                ii, jj = np.nonzero(np.triu((d2 > self.inner2) & (d2 < self.r2), k=1))
                u, v = ia[ii], ia[jj]
            else:
                d2 = _sq_dists(pts[ia], pts[ib])
                ii, jj = np.nonzero((d2 > self.inner2) & (d2 < self.r2))
                u, v = ia[ii], ib[jj]
            src.append(u)
            src.append(v)
            dst.append(v)
            dst.append(u)
        src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
        dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst

    def ensure_partners(self, vertices: np.ndarray) -> None:
        """Compute quasi-reflection partners for the given rows if missing.

        The candidate metric |z + y - 2x|^2 is accumulated coordinate by
        coordinate so that it matches the single-vertex reflect arithmetic
        bit for bit (both sum squares in coordinate order).
        """
        pts = self.graph.points
        d = self.graph.d
        todo = np.unique(np.asarray(vertices, dtype=np.int64))
        todo = todo[~self._partner_done[todo]]
        if todo.size == 0:
            return
        counts = np.diff(self.indptr)
        order = np.argsort(counts[todo], kind="stable")
        todo = todo[order]
        cnt = counts[todo]
        lo = 0
        while lo < todo.size:
            hi = lo + 1
            while hi < todo.size and (hi - lo + 1) * int(cnt[hi]) ** 2 <= 2_000_000:
                hi += 1
            rs = todo[lo:hi]
            rc = cnt[lo:hi]
            k = int(rc[-1])
            # rows padded to the chunk maximum by repeating their last
            # member; padded z slots are masked out of the argmin
            pos = np.minimum(np.arange(k)[None, :], rc[:, None] - 1)
            gs = self.indptr[rs][:, None] + pos
            valid = np.arange(k)[None, :] < rc[:, None]
            idx = self.indices[gs]                          # (R, k)
            w = pts[idx] - pts[rs][:, None, :]              # (R, k, d)
            m = np.zeros((rs.shape[0], k, k))
            m[~valid] = np.inf
            tmp = np.empty_like(m)
            for j in range(d):
                wj = w[:, :, j]
                np.add(wj[:, :, None], wj[:, None, :], out=tmp)
                np.multiply(tmp, tmp, out=tmp)
                m += tmp
            amin = m.min(axis=1)
            pick = m.argmin(axis=1)                         # first min: lowest index
            tied = ((m == amin[:, None, :]).sum(axis=1) > 1) & valid
            for rr, yy in zip(*np.nonzero(tied)):
                cand = idx[rr][m[rr, :, yy] == amin[rr, yy]]
                pick[rr, yy] = np.searchsorted(idx[rr, :rc[rr]], _lex_pick(pts, cand))
            chosen = np.take_along_axis(idx, pick, axis=1)
            flat = (self.indptr[rs][:, None] + np.arange(k)[None, :])[valid]
            self._partners[flat] = chosen[valid]
            lo = hi
        self._partner_done[todo] = True

    @property
    def partners(self) -> np.ndarray:
        if not self._partner_done.all():
            self.ensure_partners(np.flatnonzero(~self._partner_done))
        return self._partners

    def row(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def row_partners(self, x: int) -> np.ndarray:
        self.ensure_partners(np.array([x]))
        return self._partners[self.indptr[x]:self.indptr[x + 1]]

    def empty_rows(self, vertices: np.ndarray) -> np.ndarray:
        counts = np.diff(self.indptr)
        return vertices[counts[vertices] == 0]

    def interior_pairs(self, classification: VertexClassification):
        """Solver gather table: (interior vertices, offsets, y, y_x).

        Raises MissingAnnulusError if an interior vertex has no annulus
        neighbor, naming the first offender.
        """
        interior = classification.interior
        empty = self.empty_rows(interior)
        if empty.size:
            raise MissingAnnulusError(int(empty[0]))
        self.ensure_partners(interior)
        counts = np.diff(self.indptr)[interior]
        offsets = np.zeros(interior.shape[0] + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        total = int(offsets[-1])
        gather = np.repeat(self.indptr[interior] - offsets[:-1], counts) + np.arange(total)
        return interior, offsets, self.indices[gather], self._partners[gather]


@dataclass(frozen=True)
class ReflectionErrors:
    """Normalized reflection residuals |y_x + y - 2x| / r over interior pairs."""

    vertices: np.ndarray = field(repr=False)
    per_vertex_max: np.ndarray = field(repr=False)
    per_vertex_mean: np.ndarray = field(repr=False)
    max: float = float("nan")
    mean: float = float("nan")
    pairs: int = 0


def reflection_errors(system: AnnulusSystem, classification: VertexClassification) -> ReflectionErrors:
    interior, offsets, ys, yxs = system.interior_pairs(classification)
    pts = system.graph.points
    owner = np.repeat(interior, np.diff(offsets))
    miss = pts[yxs] + pts[ys] - 2.0 * pts[owner]
    err = np.sqrt((miss * miss).sum(-1)) / system.graph.r
    if err.size == 0:
        return ReflectionErrors(interior, np.zeros(0), np.zeros(0), float("nan"), float("nan"), 0)
    per_max = np.maximum.reduceat(err, offsets[:-1])
    sums = np.add.reduceat(err, offsets[:-1])
    per_mean = sums / np.diff(offsets)
    return ReflectionErrors(
        vertices=interior,
        per_vertex_max=per_max,
        per_vertex_mean=per_mean,
        max=float(err.max()),
        mean=float(err.mean()),
        pairs=int(err.size),
    )


def direction_net(d: int, spacing: float) -> np.ndarray:
    """Finite net of unit directions with angular covering radius <= spacing."""
    if spacing <= 0.0:
        raise InvalidParameterError("direction net spacing must be positive")
    if d == 2:
        m = max(3, math.ceil(2.0 * math.pi / spacing))
        ang = np.arange(m) * (2.0 * math.pi / m)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    step = spacing / (d - 1)
    polar = [np.linspace(0.0, math.pi, max(2, math.ceil(math.pi / step) + 1))
             for _ in range(d - 2)]
    m_az = max(3, math.ceil(2.0 * math.pi / step))
    azim = np.arange(m_az) * (2.0 * math.pi / m_az)
    grids = np.meshgrid(*polar, azim, indexing="ij")
    angles = np.stack([g.ravel() for g in grids], axis=1)
    out = np.empty((angles.shape[0], d))
    s = np.ones(angles.shape[0])
    for k in range(d - 1):
        out[:, k] = s * np.cos(angles[:, k])
        s = s * np.sin(angles[:, k])
    out[:, d - 1] = s
    return out


def sector_volume(d: int, r: float, delta: float, alpha: float) -> float:
    """Lebesgue volume of the annulus-cone sector S(r, delta, alpha)."""
    psi = math.atan(alpha)
    if d == 2:
        frac = psi / math.pi
    else:
        num = quad(lambda t: math.sin(t) ** (d - 2), 0.0, psi)[0]
        den = quad(lambda t: math.sin(t) ** (d - 2), 0.0, math.pi)[0]
        frac = num / den
    ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    return frac * ball * (r**d - ((1.0 - delta) * r) ** d)


@dataclass(frozen=True)
class CoverageReport:
    """Empirical direction coverage of annulus sectors plus reflection quality."""

    sectors_tested: int
    sectors_empty: int
    max_reflection_error: float
    mean_reflection_error: float
    expected_sector_count: float


def coverage_report(system: AnnulusSystem, classification: VertexClassification,
                    params: GraphParams, direction_net_spacing: float | None = None) -> CoverageReport:
    """Scan every (interior vertex, net direction) sector for sample points.

    The reflection residual is the primary diagnostic; the sector scan
    counts how many rotated copies of S(r, delta, alpha) contain no
    sample point.
    """
    spacing = params.alpha / 2.0 if direction_net_spacing is None else float(direction_net_spacing)
    dirs = direction_net(system.graph.d, spacing)
    alpha2 = params.alpha * params.alpha
    pts = system.graph.points
    interior = classification.interior
    empty = 0
    for x in interior:
        row = system.row(int(x))
        if row.size == 0:
            empty += dirs.shape[0]
            continue
        w = pts[row] - pts[int(x)]
        rho2 = (w * w).sum(-1)
        proj = w @ dirs.T
        hit = (proj > 0.0) & (rho2[:, None] - proj * proj <= alpha2 * (proj * proj))
        empty += int((~hit.any(axis=0)).sum())
    errs = reflection_errors(system, classification)
    return CoverageReport(
        sectors_tested=int(interior.shape[0] * dirs.shape[0]),
        sectors_empty=empty,
        max_reflection_error=errs.max,
        mean_reflection_error=errs.mean,
        expected_sector_count=float(system.graph.n * sector_volume(
            system.graph.d, system.graph.r, system.delta, params.alpha)),
    )
