import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdxray.errors import InfeasibleSandwich, RTooLargeForGrid
from tdxray.fields import default_recon_field, linear_combination, single_bump
from tdxray.geometry import ball
from tdxray.reconstruct import (ReconstructionPlan, SpectralSource, choose_R,
                                feasibility_threshold, hermitian_noise,
                                lattice_radius_limit, parseval_split,
                                reconstruction_errors, source_from_spectral,
                                stability_curve, tail_bound,
                                truncated_inversion, visible_slice_source)
from tdxray.spectral import SpectralGrid, fourier_full


@pytest.fixture(scope="module")
def recon_setup():
    f = default_recon_field()
    body = ball(4.0)
    grid = SpectralGrid.for_field(f, n_points=32, extent=14.0)
    return f, body, grid, fourier_full(f, grid)


class TestChooseR:
    def test_sandwich_numbers(self):
        cut = choose_R(np.exp(-100.0), 0.5, 2)
        assert cut.lower == pytest.approx(150.0, rel=1e-12)
        assert cut.upper == pytest.approx(18.75, rel=1e-12)
        assert cut.R == pytest.approx(18.75, rel=1e-12)
        assert cut.conflict

    def test_infeasible_at_large_delta(self):
        with pytest.raises(InfeasibleSandwich):
            choose_R(1e-1, 0.5, 2)

    def test_feasibility_threshold(self):
        thr = feasibility_threshold(0.5, 2)
        choose_R(0.9 * thr, 0.5, 2)
        with pytest.raises(InfeasibleSandwich):
            choose_R(1.1 * thr, 0.5, 2)

    @given(d=st.floats(1e-12, 1e-4), factor=st.floats(1.5, 100.0),
           eps=st.floats(0.05, 0.95))
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_delta(self, d, factor, eps):
        lo = choose_R(d, eps, 2)
        try:
            hi = choose_R(min(d * factor, 3e-3), eps, 2)
        except InfeasibleSandwich:
            return
        assert lo.R >= hi.R

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            choose_R(1e-6, 1.2, 2)
        with pytest.raises(ValueError):
            choose_R(-1.0, 0.5, 2)


class TestTailBound:
    def test_exponent_algebra(self):
        assert tail_bound(5.0, 4, 2, 3.0) == pytest.approx(3.0 / 5.0)
        assert tail_bound(10.0, 4, 2, 3.0) == pytest.approx(
            0.5 * tail_bound(5.0, 4, 2, 3.0))

    def test_domain(self):
        with pytest.raises(ValueError):
            tail_bound(0.5, 4, 2, 1.0)
        with pytest.raises(ValueError):
            tail_bound(2.0, 2.5, 2, 1.0)

    def test_measured_tails_dominated(self):
        from tdxray.fields import tail_field
        f = tail_field()
        grid = SpectralGrid.for_field(f, n_points=64, extent=8.0)
        sf = fourier_full(f, grid)
        radius = grid.radius_mesh()
        w = float(np.prod(grid.dk))
        tails = {R: float(np.sum(np.abs(sf.values)[radius > R]) * w)
                 for R in (4.0, 8.0, 16.0)}
        C = tails[4.0] / tail_bound(4.0, 4, 2, 1.0)
        assert tails[8.0] <= tail_bound(8.0, 4, 2, C)
        assert tails[16.0] <= tail_bound(16.0, 4, 2, C)


class TestInversion:
    def test_zero_source_zero_field(self, recon_setup):
        _, _, grid, sf = recon_setup
        src = SpectralSource(grid, np.zeros_like(sf.values),
                             np.ones(sf.values.shape, dtype=bool))
        rec, diag = truncated_inversion(src,
                                        ReconstructionPlan(R=3.0, delta=0.0,
                                                           n=2))
        assert np.all(rec == 0.0)

    def test_oracle_full_band_recovery(self, slice_field):
        grid = SpectralGrid.for_field(slice_field, n_points=96, pad=0.35)
        sf = fourier_full(slice_field, grid)
        plan = ReconstructionPlan(R=0.99 * lattice_radius_limit(grid),
                                  delta=0.0, n=2)
        rec, diag = truncated_inversion(source_from_spectral(sf), plan,
                                        keep_hidden=True)
        l2, _ = reconstruction_errors(grid, grid.sample(slice_field), rec)
        assert l2 < 1e-3
        assert diag["imag_residual"] < 1e-8

    def test_parseval_accounting(self, recon_setup):
        f, _, grid, sf = recon_setup
        truth = grid.sample(f)
        for R in (2.0, 3.0, 4.0):
            plan = ReconstructionPlan(R=R, delta=0.0, n=2)
            rec, _ = truncated_inversion(source_from_spectral(sf), plan)
            err2 = grid.discrete_l2(rec - truth) ** 2
            split = parseval_split(sf, R)
            expect = split["hidden_in_ball"] + split["out_of_ball"]
            assert abs(err2 - expect) / expect < 1e-6

    def test_r_too_large(self, recon_setup):
        _, _, grid, sf = recon_setup
        with pytest.raises(RTooLargeForGrid):
            truncated_inversion(source_from_spectral(sf),
                                ReconstructionPlan(R=100.0, delta=0.0, n=2))

    def test_linearity(self):
        f1 = single_bump(amplitude=1.0, t_center=1.0, x_center=(0.1, 0.0),
                         x_width=0.5)
        f2 = single_bump(amplitude=1.0, t_center=0.9, x_center=(-0.2, 0.1),
                         x_width=0.4)
        combo = linear_combination([f1, f2], [2.0, -1.0])
        grid = SpectralGrid.for_field(combo, n_points=32, extent=6.0)
        plan = ReconstructionPlan(R=3.0, delta=0.0, n=2)
        recs = []
        for f in (f1, f2, combo):
            sf = fourier_full(f, grid)
            rec, _ = truncated_inversion(source_from_spectral(sf), plan)
            recs.append(rec)
        assert np.max(np.abs(2.0 * recs[0] - recs[1] - recs[2])) < 1e-10


class TestSliceSource:
    def test_matches_lattice_transform(self, recon_setup):
        f, body, grid, sf = recon_setup
        src = visible_slice_source(f, body, grid, R_max=2.2,
                                   n_launch=160, n_s=128)
        mask = src.available
        assert mask.sum() > 10
        diff = np.abs(src.values - sf.values)[mask]
        rel = diff / (1.0 + np.abs(sf.values[mask]))
        # lattice sampling error dominates this comparison; the slice side
        # integrates the continuum field
        assert np.max(rel) < 2e-2
        # Hermitian structure of the filled table
        v = src.values
        core = np.s_[1:, 1:, 1:]
        flip = np.s_[::-1, ::-1, ::-1]
        masked = np.where(mask, v, 0.0)[core]
        assert np.max(np.abs(masked - np.conj(masked[flip]))) < 1e-12

    def test_available_only_visible_in_ball(self, recon_setup):
        f, body, grid, _ = recon_setup
        src = visible_slice_source(f, body, grid, R_max=1.8,
                                   n_launch=96, n_s=96)
        r = grid.radius_mesh()
        vis = grid.visible_mask()
        assert not np.any(src.available & ~vis)
        assert not np.any(src.available & (r > 1.8))


class TestHermitianNoise:
    def test_symmetry_and_amplitude(self, recon_setup):
        _, _, grid, _ = recon_setup
        mask = grid.radius_mesh() < 3.0
        rng = np.random.default_rng(0)
        eta = hermitian_noise(grid, mask, 1e-3, rng)
        core = np.s_[1:, 1:, 1:]
        flip = np.s_[::-1, ::-1, ::-1]
        assert np.max(np.abs(eta[core] - np.conj(eta[core][flip]))) < 1e-18
        assert np.max(np.abs(eta.real)) <= 1e-3
        assert np.max(np.abs(eta.imag)) <= 1e-3
        assert np.all(eta[~mask] == 0.0)


class TestStabilityCurve:
    def test_noise_free_baseline(self, recon_setup):
        f, body, grid, sf = recon_setup
        curve = stability_curve(f, body, [0.0], 0.5, 7, grid)
        row = curve.rows[0]
        plan = ReconstructionPlan(R=row.R, delta=0.0, n=2)
        rec, _ = truncated_inversion(source_from_spectral(sf), plan)
        l2, _ = reconstruction_errors(grid, grid.sample(f), rec)
        assert row.l2_error == pytest.approx(l2, rel=1e-12)

    def test_determinism_and_infeasible_rows(self, recon_setup):
        f, body, grid, _ = recon_setup
        levels = [1e-1, 1e-3, 1e-5]
        a = stability_curve(f, body, levels, 0.5, 11, grid,
                            n_launch=64, n_s=64)
        b = stability_curve(f, body, levels, 0.5, 11, grid,
                            n_launch=64, n_s=64)
        assert not a.rows[0].feasible and np.isnan(a.rows[0].R)
        assert a.rows[1].feasible and a.rows[2].feasible
        for ra, rb in zip(a.rows, b.rows):
            if ra.feasible:
                assert ra.l2_error == rb.l2_error
                assert ra.delta == rb.delta
        # deltas strictly decreasing over feasible rows
        feas = [r.delta for r in a.rows if r.feasible]
        assert all(x > y for x, y in zip(feas, feas[1:]))

    def test_csv_schema(self, recon_setup, tmp_path):
        f, body, grid, _ = recon_setup
        curve = stability_curve(f, body, [1e-3, 1e-5], 0.5, 3, grid,
                                n_launch=64, n_s=64)
        p = tmp_path / "curve.csv"
        curve.write_csv(p)
        lines = p.read_text().splitlines()
        assert lines[0] == "delta,R,l2_error,c0_error,envelope,feasible"
        assert len(lines) == 3
