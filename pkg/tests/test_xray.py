import numpy as np
import pytest

from tdxray.errors import QuadratureNotConverged
from tdxray.fields import SpaceTimeField, linear_combination, single_bump
from tdxray.geometry import GeodesicPath, MetricSpec, make_ray, sample_inward_bundle
from tdxray.xray import perturb_sinogram, sinogram, xray_single


def inline_field(evaluator, dim=2):
    return SpaceTimeField(evaluator, (0.0, 2.0),
                          np.array([-1.0, -1.0]), np.array([1.0, 1.0]), dim)


def diameter_path(unit_disk, n=801):
    ray = make_ray(unit_disk, (-1.0, 0.0), (1.0, 0.0))
    return GeodesicPath(np.linspace(0, 2, n),
                        ray.x[None, :]
                        + np.linspace(0, 2, n)[:, None] * ray.omega[None, :],
                        np.broadcast_to(ray.omega, (n, 2)).copy(), 2.0)


class TestXraySingle:
    def test_zero_field(self, unit_disk):
        f = inline_field(lambda t, x: np.zeros(np.broadcast(t, x[..., 0]).shape))
        assert xray_single(f, diameter_path(unit_disk)) == 0.0

    def test_constant_field_gives_chord_length(self, unit_disk):
        f = inline_field(lambda t, x: np.ones(np.broadcast(t, x[..., 0]).shape))
        assert xray_single(f, diameter_path(unit_disk)) == pytest.approx(
            2.0, abs=1e-12)

    def test_against_dense_trapezoid_oracle(self, unit_disk):
        def ev(t, x):
            return np.exp(-8.0 * np.sum(np.asarray(x) ** 2, axis=-1)) \
                * np.sin(np.asarray(t))

        f = inline_field(ev)
        val = xray_single(f, diameter_path(unit_disk))
        s = np.linspace(0.0, 2.0, 100_000)
        pts = np.stack([-1.0 + s, np.zeros_like(s)], axis=-1)
        oracle = np.trapezoid(ev(s, pts), s)
        assert val == pytest.approx(oracle, abs=1e-8)

    def test_not_converged_guard(self, unit_disk):
        def ev(t, x):
            return np.sin(60.0 * np.asarray(t))

        f = inline_field(ev)
        with pytest.raises(QuadratureNotConverged):
            xray_single(f, diameter_path(unit_disk, n=21))


class TestSinogram:
    def test_zero_field_zero_sup(self, unit_disk):
        f = inline_field(lambda t, x: np.zeros(np.broadcast(t, x[..., 0]).shape))
        rays = sample_inward_bundle(unit_disk, 6, 2)
        sino = sinogram(f, rays, MetricSpec(), unit_disk)
        assert np.all(sino.values == 0.0)
        assert sino.sup_norm == 0.0

    def test_constant_field_chord_lengths(self, unit_disk):
        f = inline_field(lambda t, x: np.ones(np.broadcast(t, x[..., 0]).shape))
        rays = sample_inward_bundle(unit_disk, 8, 1)
        sino = sinogram(f, rays, MetricSpec(), unit_disk)
        assert np.allclose(sino.values, sino.taus, atol=1e-10)
        assert np.allclose(sino.values, 2.0, atol=1e-10)

    def test_bump_sup_matches_per_ray_oracle(self, unit_disk, slice_field):
        rays = sample_inward_bundle(unit_disk, 8, 8)
        sino = sinogram(slice_field, rays, MetricSpec(), unit_disk)
        oracle = []
        for r in rays:
            from tdxray.geometry import exit_time
            tau = exit_time(unit_disk, r)
            s = np.linspace(0.0, tau, 30_000)
            pts = r.x[None, :] + s[:, None] * r.omega[None, :]
            oracle.append(np.trapezoid(slice_field(s, pts), s))
        oracle = np.asarray(oracle)
        assert np.max(np.abs(sino.values - oracle)) < 1e-8
        assert sino.sup_norm == pytest.approx(np.max(np.abs(oracle)),
                                              abs=1e-8)

    def test_sup_norm_bound(self, unit_disk, slice_field, rng):
        rays = sample_inward_bundle(unit_disk, 12, 6)
        sino = sinogram(slice_field, rays, MetricSpec(), unit_disk)
        ts = rng.uniform(0, 2, 2000)
        xs = rng.uniform(-1, 1, (2000, 2))
        fmax = np.max(np.abs(slice_field(ts, xs)))
        assert sino.sup_norm <= unit_disk.diameter * fmax
        assert np.all(np.abs(sino.values) <= sino.taus * fmax + 1e-12)

    def test_linearity(self, unit_disk):
        f1 = single_bump(amplitude=1.0, x_center=(0.1, 0.0), x_width=0.5)
        f2 = single_bump(amplitude=0.7, t_center=0.8, x_center=(-0.2, 0.1),
                         x_width=0.4)
        combo = linear_combination([f1, f2], [2.0, -3.0])
        path = diameter_path(unit_disk)
        lhs = xray_single(combo, path)
        rhs = 2.0 * xray_single(f1, path) - 3.0 * xray_single(f2, path)
        assert abs(lhs - rhs) <= 2e-9

    def test_time_shift_covariance(self, unit_disk, slice_field):
        shifted = slice_field.shifted(0.1)
        path = diameter_path(unit_disk)
        val = xray_single(shifted, path)
        s = np.linspace(0.0, 2.0, 100_000)
        pts = np.stack([-1.0 + s, np.zeros_like(s)], axis=-1)
        oracle = np.trapezoid(slice_field(s - 0.1, pts), s)
        assert val == pytest.approx(oracle, abs=1e-8)


class TestPerturb:
    def test_zero_level_identity(self, unit_disk, slice_field):
        rays = sample_inward_bundle(unit_disk, 6, 2)
        sino = sinogram(slice_field, rays, MetricSpec(), unit_disk)
        out, delta = perturb_sinogram(sino, 0.0, seed=1)
        assert delta == 0.0
        assert np.array_equal(out.values, sino.values)

    def test_bitwise_reproducible(self, unit_disk, slice_field):
        rays = sample_inward_bundle(unit_disk, 6, 2)
        sino = sinogram(slice_field, rays, MetricSpec(), unit_disk)
        a, da = perturb_sinogram(sino, 1e-3, seed=42)
        b, db = perturb_sinogram(sino, 1e-3, seed=42)
        assert np.array_equal(a.values, b.values)
        assert da == db

    def test_perturbation_sup_order_statistics(self, unit_disk, slice_field):
        rays = sample_inward_bundle(unit_disk, 8, 8)  # 64 rays
        sino = sinogram(slice_field, rays, MetricSpec(), unit_disk)
        for seed in range(5):
            _, delta = perturb_sinogram(sino, 1e-3, seed=seed)
            assert 0.5e-3 <= delta <= 1.0e-3

    def test_csv_schema(self, unit_disk, slice_field, tmp_path):
        rays = sample_inward_bundle(unit_disk, 4, 2)
        sino = sinogram(slice_field, rays, MetricSpec(), unit_disk)
        path = tmp_path / "sino.csv"
        sino.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,x2,omega1,omega2,tau,value"
        assert len(lines) == 1 + len(rays)
