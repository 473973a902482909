"""Shared fixtures: hand graphs and one mid-size random instance."""

import numpy as np
import pytest

import rgg_envelope as rg


@pytest.fixture(scope="session")
def ball():
    return rg.DomainSpec.ball(np.array([0.5, 0.5]), 0.3)


@pytest.fixture(scope="session")
def star():
    """Three-vertex hand instance whose DPP value is exact.

    The interior vertex sits at the center; the two boundary vertices are
    mutual exact reflections at dyadic coordinates, so the quasi-reflection
    residual is exactly zero and u(center) = (0 + 2) / 2 = 1.
    """
    pts = np.array([[0.5, 0.5], [0.59375, 0.5], [0.40625, 0.5]])
    cloud = rg.PointCloud.from_points(pts)
    graph = rg.build_graph(cloud, 0.1)
    domain = rg.DomainSpec.ball(np.array([0.5, 0.5]), 0.05)
    classification = rg.classify(graph, domain)
    system = rg.AnnulusSystem(graph, 0.1)
    datum = np.array([1.0, 0.0, 2.0])
    return {
        "points": pts,
        "graph": graph,
        "domain": domain,
        "classification": classification,
        "system": system,
        "datum": datum,
    }


@pytest.fixture(scope="session")
def inst1200(ball):
    """Random instance n=1200, r=0.19, seed=1 shared across test modules."""
    params = rg.schedule_params(1200, 2, mode="practical", explicit_r=0.19)
    cloud = rg.sample_points(2, 1200, 1)
    graph = rg.build_graph(cloud, params.r)
    classification = rg.classify(graph, ball)
    system = rg.AnnulusSystem(graph, params.delta)
    return {
        "params": params,
        "cloud": cloud,
        "graph": graph,
        "domain": ball,
        "classification": classification,
        "system": system,
    }
