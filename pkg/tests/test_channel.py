import numpy as np
import pytest

from coppersim import (
    BinderConfig,
    ChannelModelParams,
    ConfigError,
    TonePlan,
    diagonal_dominance_ratio,
    direct_insertion_loss,
    direct_response,
    fext_response,
    get_profile,
    load_channel_csv,
    save_channel_csv,
    synth_channel,
    tone_frequencies,
)
from coppersim.channel import fext_gains

SMALL_PLAN = TonePlan("small", 51750.0, 64, 51750.0)


def binder(k=4, seed=7, lengths=None):
    lengths = lengths or tuple(50.0 * (i + 1) for i in range(k))
    return BinderConfig(num_lines=k, lengths_m=lengths, seed=seed)


class TestInsertionLoss:
    def test_reference_point(self):
        # (100/100) * (1.967*10 + 0.023*100 + 0.050/10)
        assert direct_insertion_loss(100e6, 100.0) == pytest.approx(21.975, abs=1e-12)

    def test_linear_in_length(self):
        l1 = direct_insertion_loss(80e6, 75.0)
        l2 = direct_insertion_loss(80e6, 150.0)
        assert l2 == pytest.approx(2 * l1)

    def test_short_length_limit(self):
        assert direct_insertion_loss(80e6, 1e-9) == pytest.approx(0.0, abs=1e-9)

    def test_rejects_bad_args(self):
        with pytest.raises(ConfigError):
            direct_insertion_loss(-1.0, 100.0)
        with pytest.raises(ConfigError):
            direct_insertion_loss(1e6, 0.0)


class TestDirectResponse:
    def test_magnitude_from_loss(self):
        p = ChannelModelParams()
        f, length = 100e6, 100.0
        mag = abs(direct_response(f, length, p))
        assert mag == pytest.approx(10 ** (-21.975 / 20))

    def test_short_length_limit_is_unity(self):
        assert direct_response(1e6, 1e-9) == pytest.approx(1.0 + 0j, abs=1e-6)

    def test_phase_is_linear_delay(self):
        p = ChannelModelParams(delay_ns_per_m=5.0)
        f, length = 1e6, 100.0
        z = direct_response(f, length, p)
        expected = -2 * np.pi * f * (5.0 * length * 1e-9)
        assert np.angle(z) == pytest.approx(
            np.angle(np.exp(1j * expected)), abs=1e-9
        )

    def test_magnitude_monotone_in_f_and_length(self):
        f = tone_frequencies(get_profile("gfast212"))
        mags = np.abs(direct_response(f, 100.0))
        assert np.all(np.diff(mags) < 0)
        m_lengths = [abs(direct_response(100e6, L)) for L in (50, 100, 200, 400)]
        assert np.all(np.diff(m_lengths) < 0)


class TestFext:
    def test_slope_20db_per_decade(self):
        p = ChannelModelParams(fext_sigma_db=0.0, fext_slope_db_per_decade=20.0,
                               fext_cap_db=1000.0)
        b = binder(2, lengths=(100.0, 100.0))
        plan = TonePlan("s", 1e6, 64, 1e6)
        g = fext_gains(plan, b, p, 0, 1)
        f = tone_frequencies(plan)
        ratio_db = 20 * np.log10(np.abs(g) / np.abs(direct_response(f, 100.0, p)))
        i1, i10 = 0, 9    # 1 MHz and 10 MHz tones
        assert f[i10] == 10 * f[i1]
        assert ratio_db[i10] - ratio_db[i1] == pytest.approx(20.0, abs=1e-9)

    def test_cap_clamps(self):
        p = ChannelModelParams(fext_sigma_db=0.0, fext_cap_db=0.0)
        b = binder(2, lengths=(100.0, 100.0))
        plan = TonePlan("hi", 51750.0, 16, 400e6)   # far above cap crossover
        g = fext_gains(plan, b, p, 0, 1)
        f = tone_frequencies(plan)
        ratio_db = 20 * np.log10(np.abs(g) / np.abs(direct_response(f, 100.0, p)))
        assert np.allclose(ratio_db, 0.0, atol=1e-9)

    def test_determinism_per_pair_tone(self):
        b = binder()
        z1 = fext_response(SMALL_PLAN, 10, 0, 2, b)
        z2 = fext_response(SMALL_PLAN, 10, 0, 2, b)
        assert z1 == z2

    def test_rejects_self_coupling(self):
        with pytest.raises(ConfigError):
            fext_response(SMALL_PLAN, 0, 1, 1, binder())

    def test_coupling_length_is_min(self):
        p = ChannelModelParams(fext_sigma_db=0.0)
        b = binder(2, lengths=(50.0, 300.0))
        g01 = fext_gains(SMALL_PLAN, b, p, 0, 1)
        g10 = fext_gains(SMALL_PLAN, b, p, 1, 0)
        # both pairs share the 50 m binder segment, so magnitudes match
        assert np.allclose(np.abs(g01), np.abs(g10))


class TestSynth:
    def test_single_line_equals_direct(self):
        b = binder(1, lengths=(80.0,))
        t = synth_channel(b, SMALL_PLAN)
        f = tone_frequencies(SMALL_PLAN)
        assert np.allclose(t.matrices[:, 0, 0], direct_response(f, 80.0))

    def test_bit_identical_reruns(self):
        b = binder()
        t1 = synth_channel(b, SMALL_PLAN)
        t2 = synth_channel(b, SMALL_PLAN)
        assert np.array_equal(t1.matrices, t2.matrices)

    def test_directions_independent(self):
        b = binder()
        down = synth_channel(b, SMALL_PLAN, direction="downstream")
        up = synth_channel(b, SMALL_PLAN, direction="upstream")
        assert not np.allclose(down.matrices, up.matrices)
        # direct paths agree; only FEXT draws differ
        assert np.allclose(
            np.diagonal(down.matrices, axis1=1, axis2=2),
            np.diagonal(up.matrices, axis1=1, axis2=2),
        )

    def test_fig4_geometry_shape(self):
        b = BinderConfig(8, tuple(25.0 * (i + 1) for i in range(8)), seed=3)
        t = synth_channel(b, SMALL_PLAN)
        assert t.matrices.shape == (64, 8, 8)
        assert np.all(np.isfinite(t.matrices.view(float)))

    def test_seed_matters(self):
        t1 = synth_channel(binder(seed=1), SMALL_PLAN)
        t2 = synth_channel(binder(seed=2), SMALL_PLAN)
        assert not np.allclose(t1.matrices, t2.matrices)


class TestDominance:
    def test_single_line_zero(self):
        t = synth_channel(binder(1, lengths=(80.0,)), SMALL_PLAN)
        assert diagonal_dominance_ratio(t, 0) == pytest.approx(0.0)

    def test_fext_exceeds_direct_at_top_of_424(self):
        plan = get_profile("gmgfast424")
        b = BinderConfig(8, (100.0,) * 8, seed=11)
        t = synth_channel(b, plan)
        top = [diagonal_dominance_ratio(t, tone).max()
               for tone in range(plan.num_tones - 64, plan.num_tones)]
        assert max(top) > 1.0


class TestConfigValidation:
    def test_line_count_bounds(self):
        with pytest.raises(ConfigError):
            BinderConfig(0, (), seed=1)
        with pytest.raises(ConfigError):
            BinderConfig(513, (10.0,) * 513, seed=1)

    def test_positive_lengths(self):
        with pytest.raises(ConfigError):
            BinderConfig(2, (10.0, -5.0), seed=1)

    def test_fext_params(self):
        with pytest.raises(ConfigError):
            ChannelModelParams(fext_sigma_db=-1.0)
        with pytest.raises(ConfigError):
            ChannelModelParams(fext_slope_db_per_decade=-0.1)


def test_channel_csv_round_trip(tmp_path):
    t = synth_channel(binder(3), SMALL_PLAN)
    path = tmp_path / "channel.csv"
    save_channel_csv(t, path)
    back = load_channel_csv(path)
    assert np.array_equal(back.matrices, t.matrices)
    assert back.plan == t.plan
    assert back.direction == t.direction
    assert back.binder == t.binder
