import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from tdxray.errors import AliasingSuspected, CoverageError, NotVisible, ZeroXi
from tdxray.fields import SpaceTimeField, symmetric_field
from tdxray.geometry import ball
from tdxray.spectral import (SpectralGrid, classify_region, fourier_at,
                             fourier_full, hidden_bound, is_visible,
                             slice_from_sinogram, visible_direction)


def separable_gaussian():
    """Smooth separable field with near-compact support on the grid box."""
    def ev(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        gt = np.exp(-14.0 * (t - 1.0) ** 2)
        gx = np.exp(-16.0 * x[..., 0] ** 2 - 16.0 * x[..., 1] ** 2)
        return gt * gx

    return SpaceTimeField(ev, (0.0, 2.0), np.array([-0.9, -0.9]),
                          np.array([0.9, 0.9]), 2)


class TestFourierFull:
    def test_zero_field(self):
        f = SpaceTimeField(
            lambda t, x: np.zeros(np.broadcast(t, x[..., 0]).shape),
            (0.0, 2.0), np.array([-1.0, -1.0]), np.array([1.0, 1.0]), 2)
        grid = SpectralGrid.for_field(f, n_points=16)
        sf = fourier_full(f, grid)
        assert np.all(sf.values == 0.0)

    def test_separable_against_1d_quadrature(self):
        f = separable_gaussian()
        grid = SpectralGrid.for_field(f, n_points=96, pad=0.6)
        rng = np.random.default_rng(3)
        taus = rng.uniform(-5, 5, 10)
        xis = rng.uniform(-5, 5, (10, 2))
        vals = fourier_at(f, grid, taus, xis)

        def hat1d(rate, center, k):
            re = quad(lambda u: np.exp(-rate * (u - center) ** 2)
                      * np.cos(k * u), center - 3, center + 3,
                      epsabs=1e-12)[0]
            im = quad(lambda u: np.exp(-rate * (u - center) ** 2)
                      * np.sin(k * u), center - 3, center + 3,
                      epsabs=1e-12)[0]
            return re - 1j * im

        for tau, xi, got in zip(taus, xis, vals):
            want = hat1d(14.0, 1.0, tau) * hat1d(16.0, 0.0, xi[0]) \
                * hat1d(16.0, 0.0, xi[1])
            assert abs(got - want) < 1e-7

    def test_hermitian_residual(self, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=48)
        sf = fourier_full(slice_field, grid)
        assert sf.hermitian_residual() < 1e-10

    def test_hermitian_pairs_on_lattice(self, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=32)
        sf = fourier_full(slice_field, grid)
        v = sf.values[1:, 1:, 1:]
        assert np.max(np.abs(np.abs(v) - np.abs(v[::-1, ::-1, ::-1]))) < 1e-12

    def test_tau_reflection_for_symmetric_field(self):
        f = symmetric_field()
        grid = SpectralGrid.for_field(f, n_points=32)
        sf = fourier_full(f, grid)
        mags = np.abs(sf.values[1:, 1:, 1:])
        assert np.max(np.abs(mags - mags[::-1])) < 1e-10

    def test_aliasing_guard(self, slice_field):
        coarse = SpectralGrid.for_field(slice_field, n_points=12)
        with pytest.raises(AliasingSuspected):
            fourier_full(slice_field, coarse, check_aliasing=True)
        fine = SpectralGrid.for_field(slice_field, n_points=96)
        fourier_full(slice_field, fine, check_aliasing=True)

    def test_forward_inverse_roundtrip(self, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=32)
        samples = grid.sample(slice_field)
        back = grid.inverse(grid.forward(samples))
        assert np.max(np.abs(back.real - samples)) < 1e-12
        assert np.max(np.abs(back.imag)) < 1e-12

    def test_point_transform_matches_lattice(self, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=24)
        samples = grid.sample(slice_field)
        lattice = grid.forward(samples)
        i, j, k = 13, 7, 16
        val = grid.point_transform(samples, [grid.taus[i]],
                                   [[grid.xis(0)[j], grid.xis(1)[k]]])[0]
        assert abs(val - lattice[i, j, k]) < 1e-10

    def test_csv_schema(self, slice_field, tmp_path):
        grid = SpectralGrid.for_field(slice_field, n_points=8)
        sf = fourier_full(slice_field, grid)
        path = tmp_path / "spec.csv"
        sf.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "tau,xi1,xi2,re,im,region"
        assert len(lines) == 1 + 8 ** 3
        assert lines[1].endswith(("Visible", "Hidden"))


class TestRegions:
    def test_examples(self):
        assert classify_region(0.0, (1.0, 0.0)) == "Visible"
        assert classify_region(2.0, (1.0, 0.0)) == "Hidden"
        # boundary of the cone is visible (closed inequality)
        assert classify_region(1.0, (1.0, 0.0)) == "Visible"

    @given(tau=st.floats(-30, 30), x1=st.floats(-30, 30),
           x2=st.floats(-30, 30))
    @settings(max_examples=200, deadline=None)
    def test_matches_brute_force(self, tau, x1, x2):
        assert bool(is_visible(tau, (x1, x2))) == \
            (abs(tau) <= np.hypot(x1, x2))

    def test_direction_examples(self):
        assert np.allclose(visible_direction(0.0, (1.0, 0.0)), (0.0, 1.0),
                           atol=1e-14)
        assert np.allclose(visible_direction(2.0, (2.0, 0.0)), (-1.0, 0.0),
                           atol=1e-14)
        omega = visible_direction(0.5, (1.0, 0.0))
        assert float(omega @ (1.0, 0.0)) == pytest.approx(-0.5, abs=1e-14)
        assert np.linalg.norm(omega) == pytest.approx(1.0, abs=1e-14)

    def test_direction_errors(self):
        with pytest.raises(NotVisible):
            visible_direction(2.0, (1.0, 0.0))
        with pytest.raises(ZeroXi):
            visible_direction(1.0, (0.0, 0.0))

    @given(x1=st.floats(-8, 8), x2=st.floats(-8, 8), u=st.floats(-1, 1))
    @settings(max_examples=200, deadline=None)
    def test_direction_identities(self, x1, x2, u):
        xi = np.array([x1, x2])
        norm = np.linalg.norm(xi)
        if norm < 1e-6:
            return
        tau = u * norm
        omega = visible_direction(tau, xi)
        assert abs(float(omega @ xi) + tau) <= 1e-12 * max(1.0, norm)
        assert abs(np.linalg.norm(omega) - 1.0) <= 1e-12

    def test_hidden_bound(self):
        assert hidden_bound(2.0, 0.0, 3.0) == 0.0
        r = hidden_bound(4.0, 1e-3, 1.0) / hidden_bound(2.0, 1e-3, 1.0)
        assert r == pytest.approx(np.exp(2.0 / 3.0) * 2 ** (-1.0 / 3.0),
                                  rel=1e-12)
        with pytest.raises(ValueError):
            hidden_bound(0.0, 1e-3, 1.0)


class TestSlices:
    def test_zero_field(self, unit_disk):
        f = SpaceTimeField(
            lambda t, x: np.zeros(np.broadcast(t, x[..., 0]).shape),
            (0.5, 1.5), np.array([-0.5, -0.5]), np.array([0.5, 0.5]), 2)
        val = slice_from_sinogram(f, (1.0, 0.0), (0.3, -0.4), unit_disk)
        assert abs(val) < 1e-14

    def test_zero_frequency_consistency(self, unit_disk, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=96)
        ref = fourier_at(slice_field, grid, [0.0], [[0.0, 0.0]])[0]
        val = slice_from_sinogram(slice_field, (0.6, 0.8), (0.0, 0.0),
                                  unit_disk)
        assert abs(val - ref) < 1e-6

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_slice_identity(self, unit_disk, slice_field, seed):
        rng = np.random.default_rng(seed)
        ang = rng.uniform(0, 2 * np.pi)
        omega = np.array([np.cos(ang), np.sin(ang)])
        xi = rng.uniform(-6, 6, 2)
        tau = -float(omega @ xi)
        grid = SpectralGrid.for_field(slice_field, n_points=128)
        ref = fourier_at(slice_field, grid, [tau], [xi])[0]
        val = slice_from_sinogram(slice_field, omega, xi, unit_disk)
        assert abs(val - ref) <= 1e-6 * (1.0 + abs(ref))

    def test_direct_path_matches_separable_path(self, unit_disk,
                                                slice_field):
        omega = np.array([0.8, 0.6])
        xi = np.array([1.7, -2.2])
        a = slice_from_sinogram(slice_field, omega, xi, unit_disk,
                                use_separable=False)
        b = slice_from_sinogram(slice_field, omega, xi, unit_disk,
                                use_separable=True)
        assert abs(a - b) < 1e-7

    def test_coverage_error(self, slice_field):
        small = ball(0.5)
        with pytest.raises(CoverageError):
            slice_from_sinogram(slice_field, (1.0, 0.0), (1.0, 0.0), small)


class TestFrequencyPoint:
    def test_record(self):
        from tdxray.spectral import FrequencyPoint
        p = FrequencyPoint(0.5, (1.0, 0.0))
        assert p.region == "Visible"
        assert FrequencyPoint(2.0, (1.0, 0.0)).region == "Hidden"


class TestGridGuards:
    def test_undersized_extent_rejected(self, slice_field):
        with pytest.raises(ValueError):
            SpectralGrid.for_field(slice_field, n_points=16, extent=0.5)

    def test_mask_agrees_with_pointwise_classification(self, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=12)
        sf = fourier_full(slice_field, grid)
        mesh = grid.frequency_mesh()
        it = np.nditer(mesh[0], flags=["multi_index"])
        for tau in it:
            idx = it.multi_index
            xi = (float(mesh[1][idx]), float(mesh[2][idx]))
            expect = classify_region(float(tau), xi) == "Visible"
            assert bool(sf.visible[idx]) == expect


class TestThreeDimensional:
    def test_slice_identity_3d(self):
        from tdxray.fields import BumpSpec, bump_field
        f = bump_field([BumpSpec(1.0, 1.0, 0.8, (0.05, -0.1, 0.0), 0.5)],
                       dim=3, name="bump3d")
        body = ball(dim=3)
        grid = SpectralGrid.for_field(f, n_points=48, pad=0.3)
        omega = np.array([0.6, 0.64, 0.48])
        omega /= np.linalg.norm(omega)
        xi = np.array([1.5, -2.0, 0.8])
        tau = -float(omega @ xi)
        ref = fourier_at(f, grid, [tau], [xi])[0]
        val = slice_from_sinogram(f, omega, xi, body, n_launch=72, n_s=96)
        assert abs(val - ref) <= 2e-5 * (1.0 + abs(ref))
