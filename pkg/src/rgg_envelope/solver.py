"""Value iteration for the min-average dynamic programming principle.

An assignment u on the largest component solves the DPP when u = f on
boundary vertices and, at every interior vertex x,

    u(x) = min over annulus members y of (u(y) + u(y_x)) / 2,

with y_x the quasi-reflection of y about x.  Sweeping this update from
the constant -||f||_inf produces a nondecreasing, bounded sequence whose
limit is the unique solution; sweeps use pre-sweep values everywhere
(Jacobi), so the iterates are exactly monotone in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateExperimentError, InvalidParameterError, MissingAnnulusError, NonConvergenceError
from .rgg import AnnulusSystem, VertexClassification

DEFAULT_MAX_SWEEPS = 10**6


def datum_values(datum, points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Evaluate a boundary datum on the given vertices.

    The datum is either a callable mapping an (m, d) coordinate array to
    m values or an array of per-vertex values over the whole cloud.
    """
    if callable(datum):
        vals = np.asarray(datum(points[vertices]), dtype=float)
        if vals.shape != (vertices.shape[0],):
            raise InvalidParameterError("datum callable must return one value per point")
        return vals
    arr = np.asarray(datum, dtype=float)
    if arr.shape != (points.shape[0],):
        raise InvalidParameterError("datum array must hold one value per cloud point")
    return arr[vertices]


@dataclass(frozen=True)
class ValueField:
    """Solution values on the component (NaN off it) plus solve diagnostics."""

    values: np.ndarray = field(repr=False)
    sweeps: int
    residual: float
    datum_id: str
    sup_datum: float
    min_step: float  # smallest single-sweep increment; >= 0 means monotone


def _solver_table(system: AnnulusSystem, classification: VertexClassification):
    if classification.interior is None:
        raise InvalidParameterError("classification lacks the interior/boundary split")
    if classification.interior.size == 0 or classification.boundary.size == 0:
        raise DegenerateExperimentError(
            f"need nonempty interior and boundary, got {classification.interior.size} "
            f"interior and {classification.boundary.size} boundary vertices"
        )
    return system.interior_pairs(classification)


def dpp_sweep(values: np.ndarray, system: AnnulusSystem,
              classification: VertexClassification) -> tuple[np.ndarray, float]:
    """One Jacobi sweep; returns the updated copy and the max interior change."""
    interior, offsets, ys, yxs = _solver_table(system, classification)
    new = values.copy()
    cand = 0.5 * (values[ys] + values[yxs])
    new[interior] = np.minimum.reduceat(cand, offsets[:-1])
    residual = float(np.abs(new[interior] - values[interior]).max())
    return new, residual


def solve_dpp(system: AnnulusSystem, classification: VertexClassification, datum,
              tol: float | None = None, max_sweeps: int = DEFAULT_MAX_SWEEPS,
              datum_id: str = "custom", on_sweep=None) -> ValueField:
    """Iterate Jacobi sweeps from -||f||_inf until the residual is <= tol.

    tol defaults to 1e-9 * max(1, ||f||_inf) with ||f||_inf the sup of
    |f| over boundary vertices.  Raises NonConvergenceError with the
    residual history if max_sweeps is exhausted.
    """
    interior, offsets, ys, yxs = _solver_table(system, classification)
    pts = system.graph.points
    boundary = classification.boundary
    f_bnd = datum_values(datum, pts, boundary)
    if not np.all(np.isfinite(f_bnd)):
        raise InvalidParameterError("boundary datum must be finite")
    sup_datum = float(np.abs(f_bnd).max())
    if tol is None:
        tol = 1e-9 * max(1.0, sup_datum)
    values = np.full(system.graph.n, np.nan)
    values[boundary] = f_bnd
    values[interior] = -sup_datum
    min_step = np.inf
    history: list[float] = []
    for sweep in range(1, max_sweeps + 1):
        cand = 0.5 * (values[ys] + values[yxs])
        new = np.minimum.reduceat(cand, offsets[:-1])
        delta = new - values[interior]
        residual = float(np.abs(delta).max())
        min_step = min(min_step, float(delta.min()))
        values[interior] = new
        history.append(residual)
        if on_sweep is not None:
            on_sweep(sweep, values)
        if residual <= tol:
            return ValueField(values=values, sweeps=sweep, residual=residual,
                              datum_id=datum_id, sup_datum=sup_datum,
                              min_step=float(min_step))
    raise NonConvergenceError(max_sweeps, history)


def _operator_gap(values: np.ndarray, system: AnnulusSystem,
                  classification: VertexClassification) -> np.ndarray:
    """min_y (v(y) + v(y_x))/2 - v(x) at every interior vertex."""
    interior, offsets, ys, yxs = _solver_table(system, classification)
    cand = 0.5 * (values[ys] + values[yxs])
    return np.minimum.reduceat(cand, offsets[:-1]) - values[interior]


def check_subsolution(values: np.ndarray, system: AnnulusSystem,
                      classification: VertexClassification, datum) -> float:
    """Worst signed subsolution violation; nonnegative means subsolution.

    Interior vertices contribute min_y (v(y)+v(y_x))/2 - v(x), boundary
    vertices contribute f(x) - v(x).
    """
    gaps = _operator_gap(values, system, classification)
    f_bnd = datum_values(datum, system.graph.points, classification.boundary)
    worst = float(gaps.min())
    if classification.boundary.size:
        worst = min(worst, float((f_bnd - values[classification.boundary]).min()))
    return worst


def check_supersolution(values: np.ndarray, system: AnnulusSystem,
                        classification: VertexClassification, datum) -> float:
    """Worst signed supersolution violation; nonnegative means supersolution."""
    gaps = _operator_gap(values, system, classification)
    f_bnd = datum_values(datum, system.graph.points, classification.boundary)
    worst = float((-gaps).min())
    if classification.boundary.size:
        worst = min(worst, float((values[classification.boundary] - f_bnd).min()))
    return worst


def greedy_policy(values: np.ndarray, system: AnnulusSystem, x: int) -> tuple[int, int]:
    """Annulus pair (y, y_x) minimizing (v(y)+v(y_x))/2 at x; ties pick the lowest y."""
    row = system.row(x)
    if row.size == 0:
        raise MissingAnnulusError(x)
    part = system.row_partners(x)
    cand = 0.5 * (values[row] + values[part])
    pos = int(np.argmin(cand))  # first minimum: rows are ascending
    return int(row[pos]), int(part[pos])


def greedy_moves(values: np.ndarray, system: AnnulusSystem,
                 classification: VertexClassification) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized greedy_policy over all interior vertices.

    Returns full-length arrays (move_y, move_yx) holding -1 off the
    interior.
    """
    interior, offsets, ys, yxs = _solver_table(system, classification)
    cand = 0.5 * (values[ys] + values[yxs])
    mins = np.minimum.reduceat(cand, offsets[:-1])
    flat = np.arange(cand.shape[0])
    first = np.where(cand == np.repeat(mins, np.diff(offsets)), flat, cand.shape[0])
    pick = np.minimum.reduceat(first, offsets[:-1])
    move_y = np.full(system.graph.n, -1, dtype=np.int64)
    move_yx = np.full(system.graph.n, -1, dtype=np.int64)
    move_y[interior] = ys[pick]
    move_yx[interior] = yxs[pick]
    return move_y, move_yx
