"""Tests for the coin-flip game and its Monte Carlo estimator."""

import math

import numpy as np
import pytest

from rgg_envelope.errors import InvalidParameterError, NonTerminationError
from rgg_envelope.game import (
    default_step_cap,
    episode_seed_for,
    greedy_strategy,
    monte_carlo_value,
    simulate_episode,
)
from rgg_envelope.geometry import DomainSpec, PointCloud
from rgg_envelope.rgg import AnnulusSystem, build_graph, classify
from rgg_envelope.solver import solve_dpp


def deep_interior_vertex(classification, graph, domain) -> int:
    """Interior vertex farthest from the domain boundary."""
    interior = classification.interior
    depth = -domain.boundary_distance(graph.cloud.points[interior])
    return int(interior[np.argmax(depth)])


class TestStepCap:
    def test_formula(self):
        assert default_step_cap(2, 0.1) == 10_000
        assert default_step_cap(3, 0.19, factor=10.0) == math.ceil(30.0 / 0.0361)

    def test_factor_scales_linearly(self):
        assert default_step_cap(2, 0.5, factor=100.0) == 2 * default_step_cap(2, 0.5)


class TestSimulateEpisode:
    def test_boundary_start_pays_immediately(self, star):
        f = np.asarray(star["datum"], dtype=float)
        ep = simulate_episode(star["system"], star["classification"],
                              strategy=lambda x: 0, x0=1, boundary_values=f,
                              episode_seed=11, max_steps=5)
        assert ep.tau == 0
        assert ep.payoff == f[1]
        assert ep.positions.tolist() == [1]

    def test_star_single_step(self, star):
        # From the hub the only moves are the two satellites; whichever
        # the strategy proposes, the coin sends the token to one of them.
        f = np.asarray(star["datum"], dtype=float)
        ep = simulate_episode(star["system"], star["classification"],
                              strategy=lambda x: 1, x0=0, boundary_values=f,
                              episode_seed=0, max_steps=5)
        assert ep.tau == 1
        assert ep.positions[0] == 0
        assert int(ep.positions[1]) in (1, 2)
        assert ep.payoff == f[ep.positions[1]]

    def test_coin_resolves_strategy_vs_reflection(self, star):
        # Vertex 2 is the quasi-reflection of vertex 1 through the hub,
        # so across seeds both outcomes of the fair coin must occur.
        f = np.asarray(star["datum"], dtype=float)
        ends = {
            int(simulate_episode(star["system"], star["classification"],
                                 strategy=lambda x: 1, x0=0, boundary_values=f,
                                 episode_seed=s, max_steps=5).positions[1])
            for s in range(16)
        }
        assert ends == {1, 2}

    def test_positions_walk_annulus_edges(self, inst1200):
        cls = inst1200["classification"]
        system = inst1200["system"]
        pts = inst1200["graph"].cloud.points
        f = pts[:, 0] - pts[:, 1]
        field = solve_dpp(system, cls, f)
        x0 = deep_interior_vertex(cls, inst1200["graph"], inst1200["domain"])
        ep = simulate_episode(system, cls, greedy_strategy(field, system, cls),
                              x0=x0, boundary_values=field.values,
                              episode_seed=3, max_steps=5_000)
        inside = cls.interior_mask()
        assert ep.positions[0] == x0
        assert inside[ep.positions[:-1]].all()
        assert not inside[ep.positions[-1]]
        assert ep.tau == ep.positions.size - 1
        assert ep.payoff == field.values[ep.positions[-1]]
        for a, b in zip(ep.positions[:-1], ep.positions[1:]):
            row = system.row(int(a))
            partners = system.row_partners(int(a))
            assert int(b) in set(row.tolist()) | set(partners.tolist())

    def test_rejects_strategy_leaving_annulus(self, star):
        f = np.asarray(star["datum"], dtype=float)
        with pytest.raises(InvalidParameterError):
            simulate_episode(star["system"], star["classification"],
                             strategy=lambda x: x, x0=0, boundary_values=f,
                             episode_seed=1, max_steps=5)

    def test_step_cap_raises(self, inst1200):
        cls = inst1200["classification"]
        f = np.zeros(inst1200["graph"].n)
        x0 = deep_interior_vertex(cls, inst1200["graph"], inst1200["domain"])
        with pytest.raises(NonTerminationError) as err:
            simulate_episode(inst1200["system"], cls, lambda x: inst1200["system"].row(x)[0],
                             x0=x0, boundary_values=f, episode_seed=5,
                             max_steps=1, episode_label=42)
        assert err.value.episode == 42
        assert err.value.cap == 1


def component_outside_fixture():
    """Two connected vertices plus one isolated vertex off the component."""
    points = np.array([[0.1, 0.1], [0.14, 0.1], [0.9, 0.9]])
    graph = build_graph(PointCloud.from_points(points), r=0.05)
    domain = DomainSpec.ball((0.1, 0.1), 0.01)
    classification = classify(graph, domain)
    system = AnnulusSystem(graph, delta=0.5)
    return graph, classification, system


class TestMonteCarloValue:
    def test_boundary_start_collapses(self, star):
        f = np.asarray(star["datum"], dtype=float)
        est = monte_carlo_value(star["system"], star["classification"], f,
                                x0=2, episodes=7, seed=0)
        assert est.mean == f[2]
        assert est.stderr == 0.0
        assert est.tau_mean == 0.0
        assert est.tau_max == 0
        assert est.episodes == 7

    def test_constant_payoff_exact(self, star):
        # A dyadic constant keeps the episode mean exact in floating point.
        f = np.full(3, 0.75)
        est = monte_carlo_value(star["system"], star["classification"], f,
                                x0=0, episodes=50, seed=9)
        assert est.mean == 0.75
        assert est.stderr == 0.0
        assert est.tau_mean == 1.0
        assert est.tau_max == 1

    def test_star_binomial_mean(self, star):
        # Terminal payoffs are 0 or 2 with a fair coin, so the mean is
        # 2 * (#tails) / episodes: an exact dyadic on the lattice, within
        # five standard errors of the game value 1.
        field = solve_dpp(star["system"], star["classification"], star["datum"])
        est = monte_carlo_value(star["system"], star["classification"], field,
                                x0=0, episodes=20_000, seed=2024)
        assert est.tau_mean == 1.0
        assert est.tau_max == 1
        count = est.mean * 20_000 / 2.0
        assert count == round(count)
        assert abs(est.mean - 1.0) <= 5.0 * est.stderr
        assert est.stderr == pytest.approx(1.0 / math.sqrt(20_000), rel=0.05)

    def test_batch_matches_single_episodes_star(self, star):
        field = solve_dpp(star["system"], star["classification"], star["datum"])
        system, cls = star["system"], star["classification"]
        est = monte_carlo_value(system, cls, field, x0=0, episodes=64, seed=77)
        strategy = greedy_strategy(field, system, cls)
        episodes = [
            simulate_episode(system, cls, strategy, x0=0,
                             boundary_values=field.values,
                             episode_seed=episode_seed_for(77, i),
                             max_steps=100)
            for i in range(64)
        ]
        payoffs = np.array([ep.payoff for ep in episodes])
        taus = np.array([ep.tau for ep in episodes])
        assert est.mean == payoffs.mean()
        assert est.stderr == payoffs.std(ddof=1) / math.sqrt(64)
        assert est.tau_mean == taus.mean()
        assert est.tau_max == taus.max()

    def test_batch_matches_single_episodes_long_walks(self, inst1200):
        # Multi-step episodes exercise the per-step coin indexing: batch
        # step k and single-episode step k must draw the same flip.
        cls = inst1200["classification"]
        system = inst1200["system"]
        pts = inst1200["graph"].cloud.points
        f = (pts[:, 0] - 0.5) ** 2 - (pts[:, 1] - 0.5) ** 2
        field = solve_dpp(system, cls, f)
        x0 = deep_interior_vertex(cls, inst1200["graph"], inst1200["domain"])
        est = monte_carlo_value(system, cls, field, x0=x0, episodes=32, seed=5)
        strategy = greedy_strategy(field, system, cls)
        cap = default_step_cap(2, inst1200["graph"].r)
        payoffs = np.array([
            simulate_episode(system, cls, strategy, x0=x0,
                             boundary_values=field.values,
                             episode_seed=episode_seed_for(5, i),
                             max_steps=cap).payoff
            for i in range(32)
        ])
        assert est.mean == payoffs.mean()
        assert est.tau_max >= 1

    def test_determinism_and_seed_sensitivity(self, inst1200):
        cls = inst1200["classification"]
        system = inst1200["system"]
        pts = inst1200["graph"].cloud.points
        f = (pts[:, 0] - 0.5) ** 2 - (pts[:, 1] - 0.5) ** 2
        field = solve_dpp(system, cls, f)
        x0 = deep_interior_vertex(cls, inst1200["graph"], inst1200["domain"])
        first = monte_carlo_value(system, cls, field, x0=x0, episodes=200, seed=31)
        second = monte_carlo_value(system, cls, field, x0=x0, episodes=200, seed=31)
        assert first == second
        other = monte_carlo_value(system, cls, field, x0=x0, episodes=200, seed=32)
        assert other.mean != first.mean

    def test_agrees_with_dpp_value(self, inst1200):
        cls = inst1200["classification"]
        system = inst1200["system"]
        pts = inst1200["graph"].cloud.points
        f = (pts[:, 0] - 0.5) ** 2 - (pts[:, 1] - 0.5) ** 2
        field = solve_dpp(system, cls, f)
        x0 = deep_interior_vertex(cls, inst1200["graph"], inst1200["domain"])
        est = monte_carlo_value(system, cls, field, x0=x0, episodes=3_000, seed=7)
        assert abs(est.mean - field.values[x0]) <= 4.0 * est.stderr + 1e-12

    def test_non_termination_raises(self, inst1200):
        cls = inst1200["classification"]
        f = np.zeros(inst1200["graph"].n)
        x0 = deep_interior_vertex(cls, inst1200["graph"], inst1200["domain"])
        with pytest.raises(NonTerminationError) as err:
            monte_carlo_value(inst1200["system"], cls, f, x0=x0,
                              episodes=4, seed=0, max_steps=1)
        assert err.value.cap == 1
        assert 0 <= err.value.episode < 4

    def test_x0_outside_component(self):
        graph, cls, system = component_outside_fixture()
        f = np.zeros(graph.n)
        with pytest.raises(InvalidParameterError):
            monte_carlo_value(system, cls, f, x0=2, episodes=3, seed=0)
        with pytest.raises(InvalidParameterError):
            simulate_episode(system, cls, lambda x: x, x0=2, boundary_values=f,
                             episode_seed=0, max_steps=5)

    def test_episode_count_validated(self, star):
        f = np.asarray(star["datum"], dtype=float)
        with pytest.raises(InvalidParameterError):
            monte_carlo_value(star["system"], star["classification"], f,
                              x0=0, episodes=0, seed=0)
