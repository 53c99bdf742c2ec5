"""Source sampling: distribution moments, exact symmetries, reproducibility."""

import math

import numpy as np
import pytest

from franson.rng import ROLE_SOURCE, make_generator
from franson.source import PhotonPair, SpectralModel, sample_pair, sample_pairs

FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))  # FWHM = factor * sigma


def make_model(**overrides) -> SpectralModel:
    kwargs = dict(f0=3.7e14, delta=1e12, pump_linewidth=0.0, tau_ind=10e-9, pair_rate=1e6)
    kwargs.update(overrides)
    return SpectralModel(**kwargs)


def test_degenerate_widths_collapse_to_exact_zeros():
    # delta -> 0 limit: every sampled pair sits exactly at the center frequency.
    # (Validation rejects delta == 0; the sampler itself handles the limit.)
    model = make_model(delta=0.0, pump_linewidth=0.0)
    pairs = sample_pairs(model, 500, seed=3)
    assert np.all(pairs.df == 0.0)
    assert np.all(pairs.dp == 0.0)
    assert np.all(pairs.eps == 0.0)


def test_pair_sum_frequency_is_bit_exact_without_pump_jitter():
    model = make_model()
    pairs = sample_pairs(model, 100_000, seed=7)
    f0 = model.f0
    for j in range(0, len(pairs), 997):
        f_s, f_i = pairs[j].frequencies(f0)
        assert f_s + f_i == 2.0 * f0  # exact, not approximate
    # spot-check densely on a smaller block
    for j in range(2_000):
        f_s, f_i = pairs[j].frequencies(f0)
        assert f_s + f_i == 2.0 * f0


def test_detuning_antisymmetry_is_exact():
    model = make_model()
    pairs = sample_pairs(model, 5_000, seed=11)
    assert np.all(pairs.detuning_signal == pairs.df)
    assert np.all(pairs.detuning_idler == -pairs.df)


def test_detuning_antisymmetry_with_pump_jitter():
    model = make_model(pump_linewidth=1e9)
    pairs = sample_pairs(model, 5_000, seed=11)
    # the antisymmetric part about the shared pump shift is df on both sides;
    # the float cancellation noise scales with |df|, not with dp
    atol = 4.0 * np.finfo(float).eps * np.abs(pairs.df).max()
    np.testing.assert_allclose(
        pairs.detuning_signal + pairs.detuning_idler, pairs.dp, rtol=0, atol=atol
    )


def test_distribution_moments():
    model = make_model(pump_linewidth=2e9)
    n = 100_000
    pairs = sample_pairs(model, n, seed=5)

    sigma_df = model.delta / FWHM_FACTOR
    assert abs(pairs.df.mean()) < 5.0 * sigma_df / math.sqrt(n)

    # detuning FWHM equals the ensemble bandwidth delta
    fwhm_df = FWHM_FACTOR * pairs.df.std()
    assert fwhm_df == pytest.approx(model.delta, rel=0.03)

    fwhm_dp = FWHM_FACTOR * pairs.dp.std()
    assert fwhm_dp == pytest.approx(model.pump_linewidth, rel=0.03)

    fwhm_eps = FWHM_FACTOR * pairs.eps.std()
    assert fwhm_eps == pytest.approx(1.0 / model.delta, rel=0.03)

    gaps = np.diff(pairs.t0)
    assert gaps.mean() == pytest.approx(1.0 / model.pair_rate, rel=0.05)


def test_global_phase_is_uniform_on_the_circle():
    pairs = sample_pairs(make_model(), 50_000, seed=9)
    assert np.all(pairs.xi >= 0.0)
    assert np.all(pairs.xi < 2.0 * math.pi)
    # circular mean of a uniform phase vanishes
    assert abs(np.exp(1j * pairs.xi).mean()) < 5.0 / math.sqrt(50_000)


def test_emission_times_strictly_increase():
    pairs = sample_pairs(make_model(), 50_000, seed=2)
    assert np.all(np.diff(pairs.t0) > 0.0)


def test_same_seed_reproduces_the_same_sequence():
    model = make_model(pump_linewidth=1e9)
    a = sample_pairs(model, 1_000, seed=42)
    b = sample_pairs(model, 1_000, seed=42)
    for name in ("df", "dp", "xi", "t0", "eps"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = sample_pairs(model, 1_000, seed=43)
    assert not np.array_equal(a.df, c.df)


def test_pair_sequence_is_defined_by_index_not_batch():
    # pair j is the same whether sampled in one batch or from an offset range
    model = make_model(pump_linewidth=1e9)
    full = sample_pairs(model, 64, seed=13)
    tail = sample_pairs(model, 24, seed=13, start=40)
    for name in ("df", "dp", "xi", "eps"):
        assert np.array_equal(getattr(full, name)[40:], getattr(tail, name))
    # emission gaps (not absolute times) are index-addressable as well,
    # up to the prefix-sum rounding of t0
    np.testing.assert_allclose(np.diff(full.t0)[40:], np.diff(tail.t0), rtol=1e-9)


def test_single_pair_op_matches_the_batch_layout():
    model = make_model(pump_linewidth=1e9)
    batch = sample_pairs(model, 1, seed=21, stream=4)
    rng = make_generator(21, 4, ROLE_SOURCE)
    single = sample_pair(model, rng, index=0, t_prev=0.0)
    assert isinstance(single, PhotonPair)
    assert single.df == batch.df[0]
    assert single.dp == batch.dp[0]
    assert single.xi == batch.xi[0]
    assert single.eps == batch.eps[0]
    assert single.t0 == batch.t0[0]


@pytest.mark.parametrize(
    "field, value, message",
    [
        ("delta", 0.0, "delta"),
        ("delta", -1e9, "delta"),
        ("f0", 0.0, "f0"),
        ("tau_ind", 0.0, "tau_ind"),
        ("pair_rate", 0.0, "pair_rate"),
        ("pump_linewidth", -1.0, "pump_linewidth"),
    ],
)
def test_model_validation_rejects_bad_fields(field, value, message):
    model = make_model(**{field: value})
    with pytest.raises(ValueError, match=message):
        model.validate()


def test_model_validation_rejects_short_individual_coherence():
    with pytest.raises(ValueError, match="tau_ind"):
        make_model(tau_ind=1e-13).validate()


def test_model_validation_warns_on_wideband_source():
    warnings = make_model(delta=1e13, f0=1e14).validate()
    assert any("0.01" in w or "narrowband" in w for w in warnings)
