import numpy as np
import pytest

from tdxray.fields import (RECON_T, bump_profile, default_recon_field,
                           default_slice_field, heldout_fields, single_bump,
                           tail_field)


class TestBumpProfile:
    def test_normalisation_and_support(self):
        assert bump_profile(np.array([0.0]))[0] == 1.0
        assert bump_profile(np.array([1.0]))[0] == 0.0
        assert bump_profile(np.array([4.0]))[0] == 0.0

    def test_smooth_vanishing_at_edge(self):
        u = np.array([0.999])
        assert bump_profile(u)[0] < 1e-300 or bump_profile(u)[0] < 1e-100


class TestFields:
    @pytest.mark.parametrize("field,T", [
        (default_slice_field(), 2.0),
        (tail_field(), 2.0),
        (default_recon_field(), RECON_T),
    ])
    def test_compact_support(self, field, T, rng):
        # vanishes outside the declared box and at the time endpoints
        xs = rng.uniform(-1.5, 1.5, (500, 2)) * np.max(np.abs(field.x_hi))
        assert np.all(field(np.zeros(500), xs) == 0.0)
        assert np.all(field(np.full(500, T), xs) == 0.0)
        outside = field.x_hi + 0.1
        ts = rng.uniform(0, T, 100)
        assert np.all(field(ts, np.tile(outside, (100, 1))) == 0.0)

    def test_separable_matches_evaluator(self, rng):
        f = default_recon_field()
        g, H = f.separable
        ts = rng.uniform(0, RECON_T, 300)
        xs = rng.uniform(-3.8, 3.8, (300, 2))
        assert np.allclose(f(ts, xs), g(ts) * H(xs), atol=1e-14)

    def test_recon_field_inside_ball4(self, rng):
        f = default_recon_field()
        xs = rng.uniform(-5, 5, (4000, 2))
        alive = np.abs(f(np.full(4000, 6.0), xs)) > 0
        assert np.all(np.linalg.norm(xs[alive], axis=1) < 4.0)

    def test_heldout_fields_distinct(self):
        a, b = heldout_fields()
        assert a.name != b.name

    def test_smoothness_budget_orders(self):
        f = single_bump()
        budget = f.smoothness_budget(order=2, n_samples=500)
        assert budget[0] <= 1.0 + 1e-12
        assert budget[1] > 0 and budget[2] > budget[1]

    def test_shift_moves_support(self):
        f = single_bump()
        g = f.shifted(0.3)
        assert g.t_support[0] == pytest.approx(f.t_support[0] + 0.3)
