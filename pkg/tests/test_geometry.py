"""Point sampling, domain queries, and parameter schedules."""

import math

import numpy as np
import pytest

from rgg_envelope import (
    DomainSpec,
    GraphParams,
    InvalidDimensionError,
    InvalidParameterError,
    OutOfDomainError,
    PointCloud,
    ScheduleUndefinedError,
    sample_points,
    schedule_params,
)


class TestSamplePoints:
    def test_zero_points(self):
        cloud = sample_points(2, 0, 1)
        assert cloud.points.shape == (0, 2)

    def test_deterministic_and_in_range(self):
        a = sample_points(2, 3, 42)
        b = sample_points(2, 3, 42)
        assert np.array_equal(a.points, b.points)
        assert a.points.min() >= 0.0 and a.points.max() <= 1.0

    def test_prefix_coupling(self):
        big = sample_points(2, 5, 42)
        small = sample_points(2, 3, 42)
        assert np.array_equal(big.points[:3], small.points)

    @pytest.mark.parametrize("m", [0, 1, 7, 100])
    def test_prefix_coupling_general(self, m):
        assert np.array_equal(sample_points(3, 100, 9).points[:m],
                              sample_points(3, m, 9).points)

    def test_invalid_dimension(self):
        with pytest.raises(InvalidDimensionError):
            sample_points(1, 10, 0)

    def test_negative_count(self):
        with pytest.raises(InvalidParameterError):
            sample_points(2, -1, 0)

    def test_points_are_readonly(self):
        cloud = sample_points(2, 4, 0)
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 0.5

    def test_box_counts_match_uniform_law(self):
        # seeded sanity check: count in box B within 5 sqrt(n vol(B))
        pts = sample_points(2, 100_000, 11).points
        boxes = [((0.0, 0.0), (0.5, 0.5)), ((0.2, 0.3), (0.7, 0.9)),
                 ((0.05, 0.8), (0.25, 0.95))]
        for lo, hi in boxes:
            lo, hi = np.asarray(lo), np.asarray(hi)
            vol = float(np.prod(hi - lo))
            count = int(np.all((pts >= lo) & (pts < hi), axis=1).sum())
            assert abs(count - 100_000 * vol) <= 5.0 * math.sqrt(100_000 * vol)


class TestPointCloudFromPoints:
    def test_wraps_hand_coordinates(self):
        pts = np.array([[0.1, 0.2], [0.9, 0.8]])
        cloud = PointCloud.from_points(pts)
        assert cloud.n == 2 and cloud.d == 2 and cloud.seed is None

    def test_rejects_out_of_cube(self):
        with pytest.raises(InvalidParameterError):
            PointCloud.from_points(np.array([[0.5, 1.5]]))

    def test_rejects_one_dimensional(self):
        with pytest.raises(InvalidDimensionError):
            PointCloud.from_points(np.array([[0.5], [0.7]]))


class TestDomainSpec:
    def test_ball_contains_center(self, ball):
        assert ball.contains(np.array([0.5, 0.5]))

    def test_contains_is_open(self, ball):
        assert not ball.contains(np.array([0.8, 0.5]))

    def test_boundary_distance_on_sphere(self, ball):
        assert abs(ball.boundary_distance(np.array([0.5, 0.8]))) < 1e-12

    def test_boundary_distance_signs(self, ball):
        assert ball.boundary_distance(np.array([0.5, 0.5])) == pytest.approx(-0.3)
        assert ball.boundary_distance(np.array([0.95, 0.5])) == pytest.approx(0.15)

    def test_boundary_point_at_zero_angle(self, ball):
        assert np.allclose(ball.boundary_point(0.0), [0.8, 0.5], atol=0.0)

    def test_boundary_point_lies_on_boundary(self, ball):
        for theta in np.linspace(0.0, 2 * math.pi, 17):
            y = ball.boundary_point(theta)
            assert abs(ball.boundary_distance(y)) < 1e-12

    def test_cube_margin(self, ball):
        assert ball.cube_margin() == pytest.approx(0.2)

    def test_must_fit_in_open_cube(self):
        with pytest.raises(InvalidParameterError):
            DomainSpec.ball(np.array([0.5, 0.5]), 0.5)

    def test_positive_radii_required(self):
        with pytest.raises(InvalidParameterError):
            DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.3, 0.0]))

    def test_radii_length_must_match(self):
        with pytest.raises(InvalidParameterError):
            DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.3, 0.2, 0.1]))

    def test_inward_normal_on_ball(self, ball):
        normal = ball.inward_normal(np.array([0.8, 0.5]))
        assert np.allclose(normal, [-1.0, 0.0], atol=1e-15)

    def test_inward_normal_requires_boundary_point(self, ball):
        with pytest.raises(OutOfDomainError):
            ball.inward_normal(np.array([0.5, 0.5]))

    def test_inward_normal_matches_distance_gradient(self):
        dom = DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.3, 0.2]))
        y = dom.boundary_point(0.7)
        normal = dom.inward_normal(y)
        step = 1e-6
        grad = np.array([
            (dom.boundary_distance(y + step * e) - dom.boundary_distance(y - step * e))
            / (2 * step)
            for e in np.eye(2)
        ])
        assert np.allclose(normal, -grad / np.linalg.norm(grad), atol=1e-6)


class TestEllipsoidDistance:
    @staticmethod
    def brute_distance(dom: DomainSpec, x: np.ndarray) -> float:
        # dense boundary sampling; curvature error is far below the tolerance
        theta = np.linspace(0.0, 2 * math.pi, 400_001)
        bnd = dom.center + dom.radii * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        dist = float(np.linalg.norm(bnd - x, axis=1).min())
        q = (x - dom.center) / dom.radii
        return dist if float(q @ q) >= 1.0 else -dist

    def test_matches_brute_boundary_scan(self):
        dom = DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.3, 0.2]))
        queries = [
            np.array([0.5, 0.5]),
            np.array([0.9, 0.9]),
            np.array([0.55, 0.52]),
            np.array([0.5, 0.72]),
            np.array([0.21, 0.5]),
            np.array([0.62, 0.38]),
        ]
        for x in queries:
            got = dom.boundary_distance(x)
            assert got == pytest.approx(self.brute_distance(dom, x), abs=5e-9)

    def test_center_distance_is_smallest_radius(self):
        dom = DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.3, 0.1]))
        assert dom.boundary_distance(np.array([0.5, 0.5])) == pytest.approx(-0.1)

    def test_on_axis_point_with_off_axis_nearest(self):
        # inside the evolute of the long axis the nearest point leaves the axis
        dom = DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.3, 0.1]))
        x = np.array([0.55, 0.5])
        assert dom.boundary_distance(x) == pytest.approx(self.brute_distance(dom, x), abs=5e-9)

    def test_vectorized_matches_scalar(self):
        dom = DomainSpec.ellipsoid(np.array([0.5, 0.5]), np.array([0.25, 0.35]))
        pts = sample_points(2, 40, 3).points
        batch = dom.boundary_distance(pts)
        for i in range(40):
            assert batch[i] == pytest.approx(dom.boundary_distance(pts[i]), abs=0.0)


class TestGraphParams:
    @pytest.mark.parametrize("bad", [
        dict(n=10, r=0.0, delta=0.1, alpha=0.1),
        dict(n=10, r=1.0, delta=0.1, alpha=0.1),
        dict(n=10, r=0.1, delta=1.0, alpha=0.1),
        dict(n=10, r=0.1, delta=0.1, alpha=0.0),
        dict(n=-1, r=0.1, delta=0.1, alpha=0.1),
    ])
    def test_validation(self, bad):
        with pytest.raises(InvalidParameterError):
            GraphParams(**bad)


class TestScheduleParams:
    def test_asymptotic_mode_million_points(self):
        params = schedule_params(10**6, 2, mode="asymptotic")
        assert params.r == pytest.approx(0.6610, abs=5e-4)
        assert params.delta == pytest.approx(0.1779, abs=5e-4)

    def test_practical_mode_delta(self):
        params = schedule_params(20000, 2, mode="practical", explicit_r=0.08)
        assert params.r == 0.08
        assert params.delta == pytest.approx(0.08 / math.sqrt(math.log(20000)), rel=1e-15)
        assert params.delta == pytest.approx(0.02542, abs=5e-6)

    @pytest.mark.parametrize("n", [3, 10**4, 10**5, 10**6])
    def test_asymptotic_mode_growth_identity(self, n):
        params = schedule_params(n, 2, mode="asymptotic")
        assert math.sqrt(n) * params.r**4 == pytest.approx(math.log(n) ** 2, rel=1e-12)

    def test_alpha_equals_delta_in_the_plane(self):
        params = schedule_params(5000, 2, mode="practical", explicit_r=0.12)
        assert params.alpha == pytest.approx(params.delta, rel=1e-15)

    def test_alpha_exponent_in_three_dimensions(self):
        params = schedule_params(5000, 3, mode="practical", explicit_r=0.2)
        assert params.alpha == pytest.approx(0.2 / math.log(5000) ** 0.25, rel=1e-15)

    def test_small_n_undefined(self):
        with pytest.raises(ScheduleUndefinedError):
            schedule_params(2, 2, mode="asymptotic")

    def test_practical_requires_radius(self):
        with pytest.raises(InvalidParameterError):
            schedule_params(100, 2, mode="practical")

    def test_practical_radius_range(self):
        with pytest.raises(InvalidParameterError):
            schedule_params(100, 2, mode="practical", explicit_r=1.0)

    def test_asymptotic_rejects_explicit_radius(self):
        with pytest.raises(InvalidParameterError):
            schedule_params(100, 2, mode="asymptotic", explicit_r=0.1)

    def test_unknown_mode(self):
        with pytest.raises(InvalidParameterError):
            schedule_params(100, 2, mode="auto")

    def test_asymptotic_mode_radius_overflow_rejected(self):
        # mid-size n in the plane gives r >= 1; rejected rather than returned
        with pytest.raises(InvalidParameterError):
            schedule_params(100, 2, mode="asymptotic")
