import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from tdxray.conformal import bump_factor, constant_factor
from tdxray.errors import NoExit, TangentRay
from tdxray.geometry import (GRAZING_TOL, MetricSpec, ball, ellipsoid, exit_time,
                             geodesic_trace, hamiltonian, make_ray,
                             sample_inward_bundle)


class TestExitTime:
    def test_diameter_chord(self, unit_disk):
        ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
        assert exit_time(unit_disk, ray) == pytest.approx(2.0, abs=1e-11)

    def test_oblique_chord(self, unit_disk):
        th = np.pi / 4
        ray = make_ray(unit_disk, (-1.0, 0.0), (np.cos(th), np.sin(th)))
        assert exit_time(unit_disk, ray) == pytest.approx(np.sqrt(2.0),
                                                          abs=1e-11)

    def test_ellipse_against_bisection_oracle(self):
        body = ellipsoid((2.0, 1.0))
        ray = make_ray(body, (-2.0, 0.0), (0.8, 0.6))

        def phi_line(s):
            return float(body.phi(ray.x + s * ray.omega))

        oracle = brentq(phi_line, 1e-6, 1.5 * body.diameter, xtol=1e-14)
        assert exit_time(body, ray) == pytest.approx(oracle, abs=1e-10)

    def test_tangent_ray_rejected(self, unit_disk):
        with pytest.raises(TangentRay):
            make_ray(unit_disk, (-1.0, 0.0), (0.0, 1.0))

    def test_near_grazing_rejected(self, unit_disk):
        nu = np.array([-1.0, 0.0])
        tangent = np.array([0.0, 1.0])
        omega = tangent - 0.5 * GRAZING_TOL * nu
        omega /= np.linalg.norm(omega)
        with pytest.raises(TangentRay):
            make_ray(unit_disk, (-1.0, 0.0), omega)

    def test_3d_ball_chord(self):
        body = ball(dim=3)
        ray = make_ray(body, (0.0, 0.0, -1.0), (0.0, 0.0, 1.0))
        assert exit_time(body, ray) == pytest.approx(2.0, abs=1e-11)

    @given(a=st.floats(0.5, 3.0), b=st.floats(0.5, 3.0),
           theta=st.floats(0.05, 2 * np.pi - 0.05),
           tilt=st.floats(-1.2, 1.2))
    @settings(max_examples=30, deadline=None)
    def test_exit_point_on_boundary(self, a, b, theta, tilt):
        body = ellipsoid((a, b))
        anchor = body.boundary_point(np.array([np.cos(theta),
                                               np.sin(theta)]))
        nu = body.outward_normal(anchor)
        tangent = np.array([-nu[1], nu[0]])
        omega = -np.cos(tilt) * nu + np.sin(tilt) * tangent
        ray = make_ray(body, anchor, omega)
        tau = exit_time(body, ray)
        assert 0.0 < tau <= body.diameter + 1e-9
        assert abs(body.phi(anchor + tau * ray.omega)) < 1e-8
        mid = anchor + 0.5 * tau * ray.omega
        assert body.phi(mid) < 0.0


class TestBundle:
    def test_normal_rays(self, unit_disk):
        rays = sample_inward_bundle(unit_disk, 4, 1)
        assert len(rays) == 4
        for r in rays:
            assert float(r.omega @ r.normal) == pytest.approx(-1.0,
                                                              abs=1e-12)

    def test_counts_and_inwardness(self, unit_disk):
        rays = sample_inward_bundle(unit_disk, 8, 8)
        assert len(rays) == 64
        for r in rays:
            assert float(r.omega @ r.normal) < 0.0
            assert abs(np.linalg.norm(r.omega) - 1.0) < 1e-12

    def test_ellipse_chords_below_diameter(self):
        body = ellipsoid((2.0, 1.0))
        rays = sample_inward_bundle(body, 16, 16)
        for r in rays:
            assert exit_time(body, r) <= body.diameter + 1e-9

    def test_3d_bundle(self):
        body = ball(dim=3)
        rays = sample_inward_bundle(body, 6, 5)
        assert len(rays) == 30
        for r in rays:
            assert float(r.omega @ r.normal) < 0.0


class TestGeodesicTrace:
    def test_euclidean_is_straight(self, unit_disk):
        ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
        path = geodesic_trace(MetricSpec(), unit_disk, ray, dt=1e-3)
        chord = ray.x[None, :] + path.times[:, None] * ray.omega[None, :]
        assert np.max(np.abs(path.points - chord)) < 1e-8
        assert path.exit_time == pytest.approx(2.0, abs=1e-10)

    def test_conformal_reduces_to_straight(self, unit_disk):
        metric = MetricSpec("conformal", constant_factor(1.0))
        ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
        path = geodesic_trace(metric, unit_disk, ray, dt=1e-3)
        assert np.max(np.abs(path.points[:, 1])) < 1e-8

    def test_hamiltonian_conserved(self, unit_disk):
        c = bump_factor(0.1, (0.0, 0.0), 0.8)
        metric = MetricSpec("conformal", c)
        ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
        path = geodesic_trace(metric, unit_disk, ray, dt=5e-4)
        # reconstruct momenta from velocities: p = -|dx| direction / ...
        # h along the path equals sqrt(c)|p| with |p| = |dx|/c
        hs = []
        for t, x, v in zip(path.times, path.points, path.velocities):
            cv = float(c(t, x[None, :])[0])
            p = -v / cv  # dx/dt = -h_p = -sqrt(c) p/|p|, |p| = |dx|/c
            hs.append(hamiltonian(c, t, x, p))
        hs = np.array(hs)
        assert np.max(np.abs(hs - hs[0])) < 1e-6

    def test_conformal_interior_and_richardson(self, unit_disk):
        c = bump_factor(0.1, (0.0, 0.0), 0.8)
        metric = MetricSpec("conformal", c)
        ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
        coarse = geodesic_trace(metric, unit_disk, ray, dt=2e-3)
        fine = geodesic_trace(metric, unit_disk, ray, dt=2e-4)
        assert np.isfinite(coarse.exit_time)
        assert np.all(unit_disk.phi(coarse.points[1:-1]) < 0.0)
        assert abs(coarse.exit_time - fine.exit_time) < 1e-8

    def test_unit_speed_in_ray_metric(self, unit_disk):
        c = bump_factor(0.1, (0.0, 0.0), 0.8)
        metric = MetricSpec("conformal", c)
        ray = make_ray(unit_disk, (-1.0, 0.0), (0.8, 0.6))
        path = geodesic_trace(metric, unit_disk, ray, dt=1e-3)
        cv = c(path.times, path.points)
        speeds = np.linalg.norm(path.velocities, axis=1) / np.sqrt(cv)
        assert np.max(np.abs(speeds - 1.0)) < 1e-8

    def test_reversibility(self, unit_disk):
        c = bump_factor(0.1, (0.05, -0.1), 0.7)
        metric = MetricSpec("conformal", c)
        ray = make_ray(unit_disk, (-1.0, 0.0), (0.9, np.sqrt(1 - 0.81)))
        path = geodesic_trace(metric, unit_disk, ray, dt=5e-4)
        back_dir = -path.velocities[-1]
        back_dir /= np.linalg.norm(back_dir)
        back_ray = make_ray(unit_disk, path.points[-1], back_dir)
        back = geodesic_trace(metric, unit_disk, back_ray, dt=5e-4)
        assert np.linalg.norm(back.points[-1] - ray.x) < 1e-5

    def test_no_exit_guard(self, unit_disk):
        c = bump_factor(0.1, (0.0, 0.0), 0.8)
        metric = MetricSpec("conformal", c)
        ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
        with pytest.raises(NoExit):
            geodesic_trace(metric, unit_disk, ray, dt=1e-3, t_max=0.5)


class TestConvexBody:
    def test_level_signs(self, unit_disk):
        assert unit_disk.phi(unit_disk.center) < 0
        assert unit_disk.phi(np.array([2.0, 0.0])) > 0

    def test_two_sign_changes_along_chords(self, unit_disk, rng):
        # strict convexity proxy: dense sampling along interior chords
        for _ in range(25):
            th1, th2 = rng.uniform(0, 2 * np.pi, 2)
            p1 = np.array([np.cos(th1), np.sin(th1)]) * 1.5
            p2 = np.array([np.cos(th2), np.sin(th2)]) * 1.5
            s = np.linspace(0, 1, 4001)
            pts = p1[None, :] + s[:, None] * (p2 - p1)[None, :]
            signs = np.sign(unit_disk.phi(pts))
            changes = int(np.sum(np.abs(np.diff(signs)) > 0))
            assert changes in (0, 2)


class TestMetricSpec:
    def test_validate_conformal(self, unit_disk):
        from tdxray.conformal import bump_factor
        from tdxray.errors import Inadmissible
        good = MetricSpec("conformal", bump_factor(0.1, (0.0, 0.0), 0.8))
        good.validate(unit_disk)
        bad = MetricSpec("conformal", bump_factor(-0.9, (0.0, 0.0), 0.5))
        with pytest.raises(Inadmissible):
            bad.validate(unit_disk)
        with pytest.raises(ValueError):
            MetricSpec("conformal", None).validate(unit_disk)

    def test_euclidean_validate_noop(self, unit_disk):
        MetricSpec().validate(unit_disk)
