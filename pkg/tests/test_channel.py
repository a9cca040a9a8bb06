import math

import numpy as np
import pytest
from scipy import stats

from irsloc.channel import (
    assign_clusters,
    build_cir,
    build_cir_series,
    cascaded_channel,
    draw_rcs,
    irs_bs_channel,
    tap_index,
    target_irs_channel,
)
from irsloc.geometry import Scene, TargetTruth, UlaGeometry, aoa_to_irs, steering


def make_scene(targets, m_i=16, m_b=4, irs=(20.0, 20.0), bs=(20.0, 15.0)):
    return Scene(
        user_pos=(0.0, 0.0),
        irs_pos=irs,
        bs_pos=bs,
        targets=tuple(TargetTruth(p) for p in targets),
        wavelength=0.1,
        near_field_radius=30.0,
        irs_array=UlaGeometry(m_i, 0.05),
        bs_array=UlaGeometry(m_b, 0.05),
    )


class TestIrsBsChannel:
    def test_near_model_unit_modulus(self):
        ch = irs_bs_channel(make_scene([(5.0, 5.0)]), delta=0.3, model="near")
        assert ch.g.shape == (4, 16)
        np.testing.assert_allclose(np.abs(ch.g), 1.0, atol=1e-12)

    def test_far_model_rank_one(self):
        ch = irs_bs_channel(make_scene([(5.0, 5.0)]), model="far")
        s = np.linalg.svd(ch.g, compute_uv=False)
        assert s[0] > 0
        assert s[1] / s[0] < 1e-14
        np.testing.assert_allclose(np.abs(ch.g), 1.0, atol=1e-12)

    def test_near_converges_to_far_factorization(self):
        # oracle: rank-1 factorization at the limiting bearing. With the BS
        # pushed to 1e6 m the residual quadratic phase is < 4e-6 rad here.
        rng = np.random.default_rng(5)
        for _ in range(5):
            alpha = rng.uniform(0.1, 1.4)
            bs = (20.0 + 1e6 * math.cos(alpha), 20.0 + 1e6 * math.sin(alpha))
            sc = make_scene([(5.0, 5.0)], m_i=8, m_b=4, bs=bs)
            near = irs_bs_channel(sc, model="near").g
            far = irs_bs_channel(sc, model="far").g
            np.testing.assert_allclose(near, far, atol=1e-5)

    def test_far_bearings_are_supplementary(self):
        ch = irs_bs_channel(make_scene([(5.0, 5.0)], bs=(28.0, 14.0)), model="far")
        assert ch.kappa == pytest.approx(math.pi - ch.xi, abs=1e-12)


class TestRcs:
    def test_swerling_statistics(self):
        rng = np.random.default_rng(0)
        g = draw_rcs(rng, 200, 500)
        flat = g.ravel()
        assert abs(flat.mean()) < 0.01
        assert flat.var() == pytest.approx(1.0, abs=0.01)
        # |gamma| must be Rayleigh with sigma = 1/sqrt(2)
        ks = stats.kstest(np.abs(flat), "rayleigh", args=(0.0, 1.0 / math.sqrt(2.0)))
        assert ks.statistic < 0.01

    def test_independent_over_blocks_and_targets(self):
        rng = np.random.default_rng(1)
        g = draw_rcs(rng, 5000, 2)
        c = np.corrcoef(np.abs(g[:, 0]), np.abs(g[:, 1]))[0, 1]
        assert abs(c) < 0.05


class TestCascade:
    def test_target_channel_shape_and_scaling(self):
        sc = make_scene([(5.0, 5.0)])
        rng = np.random.default_rng(2)
        rcs = draw_rcs(rng, 3, 1)
        r = target_irs_channel(sc, rcs, 0, 1)
        a = steering(sc.irs_array, sc.wavelength, sc.effective_range(0), aoa_to_irs(sc, 0))
        np.testing.assert_allclose(r, rcs[1, 0] * a, atol=1e-14)

    def test_cascaded_matches_direct_formula(self):
        sc = make_scene([(5.0, 5.0)])
        ch = irs_bs_channel(sc, delta=0.7)
        rng = np.random.default_rng(3)
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, 16))
        r = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        got = cascaded_channel(ch, phi, r)
        expected = 0.7 * ch.g @ np.diag(phi) @ r
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_rejects_non_unit_pattern(self):
        sc = make_scene([(5.0, 5.0)])
        ch = irs_bs_channel(sc)
        with pytest.raises(ValueError):
            cascaded_channel(ch, 0.5 * np.ones(16), np.ones(16, dtype=complex))


class TestClusters:
    def test_frozen_tap_examples(self):
        # N * delta_f = 1e8 -> 3 m taps
        assert tap_index(77.711, 256, 1e8 / 256) == 26
        # exactly on a bin edge belongs to the upper bin (half-open intervals)
        assert tap_index(3.0, 256, 1e8 / 256) == 2
        assert tap_index(0.0, 256, 1e8 / 256) == 1

    def test_assign_clusters_groups_by_tap(self):
        # two targets engineered into one tap, a third well separated
        sc = make_scene([(10.0, 10.0), (10.1, 9.9), (-15.0, -15.0)])
        cm = assign_clusters(sc, 256, 1e8 / 256, 64)
        assert cm.labels[0] == cm.labels[1]
        assert cm.labels[2] != cm.labels[0]
        assert set(cm.members[cm.labels[0]]) == {0, 1}
        assert cm.occupied == tuple(sorted(set(cm.labels)))

    def test_out_of_window_range_raises(self):
        sc = make_scene([(-60.0, -60.0)])
        with pytest.raises(ValueError, match="outside"):
            assign_clusters(sc, 256, 1e8 / 256, 32)


class TestCir:
    def setup_method(self):
        self.sc = make_scene([(10.0, 10.0), (10.1, 9.9), (-15.0, -15.0)])
        self.ch = irs_bs_channel(self.sc, delta=0.9)
        self.cm = assign_clusters(self.sc, 256, 1e8 / 256, 64)
        rng = np.random.default_rng(4)
        self.rcs = draw_rcs(rng, 3, 3)
        self.phi = np.exp(1j * rng.uniform(0, 2 * np.pi, (16, 2)))

    def test_occupied_row_is_sum_of_member_cascades(self):
        cir = build_cir(self.sc, self.ch, self.phi, self.rcs, self.cm, 64, q=1, t=2)
        l_shared = self.cm.labels[0]
        expected = sum(
            cascaded_channel(self.ch, self.phi[:, 1], target_irs_channel(self.sc, self.rcs, k, 2))
            for k in (0, 1)
        )
        np.testing.assert_allclose(cir[l_shared - 1], expected, atol=1e-12)

    def test_unoccupied_rows_are_zero(self):
        cir = build_cir(self.sc, self.ch, self.phi, self.rcs, self.cm, 64, q=0, t=0)
        occupied = {l - 1 for l in self.cm.labels}
        empty = [i for i in range(64) if i not in occupied]
        assert np.all(cir[empty] == 0)
        assert all(np.any(cir[l - 1] != 0) for l in self.cm.labels)

    def test_series_matches_per_symbol_build(self):
        series = build_cir_series(self.sc, self.ch, self.phi, self.rcs, self.cm, 64)
        assert series.shape == (3, 2, 64, 4)
        for t in range(3):
            for q in range(2):
                one = build_cir(self.sc, self.ch, self.phi, self.rcs, self.cm, 64, q=q, t=t)
                np.testing.assert_allclose(series[t, q], one, atol=1e-12)
