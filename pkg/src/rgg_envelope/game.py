"""One-player quasi-reflection game on the component.

From an interior vertex the player proposes an annulus member y; a fair
coin then moves the token to y or to its quasi-reflection y_x.  The game
stops at the first boundary vertex, paying f there.  The value of the
game under the greedy strategy of a converged DPP field estimates the
DPP solution; coin flips come from counter-based per-episode streams, so
single episodes and vectorized batches reproduce each other exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NonTerminationError
from .rgg import AnnulusSystem, VertexClassification
from .solver import ValueField, greedy_moves
from .streams import coin, derive_seed, derive_seeds


def default_step_cap(d: int, r: float, factor: float = 50.0) -> int:
    """Episode step cap ceil(factor * d / r**2)."""
    return math.ceil(factor * d / (r * r))


@dataclass(frozen=True)
class Episode:
    """One played game: visited vertices, stopping time, terminal payoff."""

    positions: np.ndarray = field(repr=False)
    tau: int
    payoff: float


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo aggregate over independent episodes."""

    mean: float
    stderr: float
    episodes: int
    tau_mean: float
    tau_max: int


def simulate_episode(system: AnnulusSystem, classification: VertexClassification,
                     strategy, x0: int, boundary_values: np.ndarray,
                     episode_seed: int, max_steps: int,
                     episode_label: int = 0) -> Episode:
    """Play one episode from x0 under a Markov strategy.

    The strategy receives the current vertex and must return one of its
    annulus members.  Step k resolves with the fair coin draw k of the
    episode seed's stream: 0 keeps the strategy's vertex, 1 takes the
    quasi-reflection.
    """
    inside = classification.interior_mask()
    comp = classification.component_mask()
    if not comp[x0]:
        raise InvalidParameterError(f"vertex {x0} is outside the largest component")
    positions = [int(x0)]
    x = int(x0)
    for step in range(max_steps):
        if not inside[x]:
            break
        y = int(strategy(x))
        row = system.row(x)
        pos = np.searchsorted(row, y)
        if pos >= row.size or row[pos] != y:
            raise InvalidParameterError(f"strategy returned {y}, not an annulus member of {x}")
        yx = int(system.row_partners(x)[pos])
        x = y if int(coin(episode_seed, step)) == 0 else yx
        positions.append(x)
    if inside[x]:
        raise NonTerminationError(episode_label, max_steps)
    return Episode(positions=np.asarray(positions, dtype=np.int64),
                   tau=len(positions) - 1,
                   payoff=float(boundary_values[x]))


def monte_carlo_value(system: AnnulusSystem, classification: VertexClassification,
                      values: ValueField | np.ndarray, x0: int, episodes: int,
                      seed: int, max_steps: int | None = None,
                      step_cap_factor: float = 50.0) -> McEstimate:
    """Estimate the game value at x0 with the greedy strategy of `values`.

    Episode i uses the derived seed of (seed, i); payoffs are aggregated
    in episode order, so estimates are reproducible bit for bit.  The
    standard error is the sample standard deviation over sqrt(episodes).
    """
    if episodes < 1:
        raise InvalidParameterError("episode count must be >= 1")
    vals = values.values if isinstance(values, ValueField) else np.asarray(values, dtype=float)
    graph = system.graph
    cap = default_step_cap(graph.d, graph.r, step_cap_factor) if max_steps is None else int(max_steps)
    move_y, move_yx = greedy_moves(vals, system, classification)
    inside = classification.interior_mask()
    comp = classification.component_mask()
    if not comp[x0]:
        raise InvalidParameterError(f"vertex {x0} is outside the largest component")

    pos = np.full(episodes, x0, dtype=np.int64)
    taus = np.zeros(episodes, dtype=np.int64)
    seeds = derive_seeds(seed, np.arange(episodes, dtype=np.uint64))
    active = np.flatnonzero(inside[pos])
    for step in range(cap):
        if active.size == 0:
            break
        flips = coin(seeds[active], step)
        nxt = np.where(flips == 0, move_y[pos[active]], move_yx[pos[active]])
        pos[active] = nxt
        taus[active] += 1
        active = active[inside[nxt]]
    if active.size:
        raise NonTerminationError(int(active[0]), cap)
    payoffs = vals[pos]
    stderr = float(payoffs.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return McEstimate(mean=float(payoffs.mean()), stderr=stderr, episodes=episodes,
                      tau_mean=float(taus.mean()), tau_max=int(taus.max()))


def greedy_strategy(values: ValueField | np.ndarray, system: AnnulusSystem,
                    classification: VertexClassification):
    """Markov strategy matching monte_carlo_value's precomputed greedy moves."""
    vals = values.values if isinstance(values, ValueField) else np.asarray(values, dtype=float)
    move_y, _ = greedy_moves(vals, system, classification)

    def strategy(x: int) -> int:
        return int(move_y[x])

    return strategy


def episode_seed_for(seed: int, index: int) -> int:
    """Derived per-episode seed, identical to monte_carlo_value's batch seeds."""
    return derive_seed(seed, index)
