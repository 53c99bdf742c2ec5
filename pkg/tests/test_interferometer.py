"""Interferometer transfer, local intensities and ensemble dephasing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from franson.interferometer import (
    UmziConfig,
    default_overlap,
    ensemble_local_fringe,
    local_intensities,
    local_visibility_oracle,
    regime_flags,
    umzi_transfer,
)
from franson.source import SpectralModel, sample_pairs

PHASES_16 = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)


def umzi(t_sl=100e-12, phase=0.0, gamma=1.0, party="A"):
    return UmziConfig(t_sl=t_sl, phase=phase, gamma=gamma, party=party)


def model_with(delta_t_sl: float, t_sl=100e-12) -> SpectralModel:
    delta = delta_t_sl / t_sl
    return SpectralModel(f0=3.7e14, delta=delta, tau_ind=max(10e-9, 2.0 / delta), pair_rate=1e6)


def test_transfer_at_zero_phase():
    pa = umzi_transfer(0.0, umzi(phase=0.0))
    assert pa.port5 == (0.5, 0.5)
    assert pa.port6 == (0.5j, -0.5j)


def test_transfer_at_pi_flips_the_long_path_sign():
    pa = umzi_transfer(0.0, umzi(phase=math.pi))
    assert pa.port5[0] == 0.5
    assert pa.port5[1] == pytest.approx(-0.5, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    detuning=st.floats(-5e12, 5e12),
    phase=st.floats(-10.0, 10.0),
)
def test_transfer_is_unitary(detuning, phase):
    pa = umzi_transfer(detuning, umzi(phase=phase))
    assert pa.norm() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    phi=st.floats(-50.0, 50.0),
    gamma=st.floats(0.0, 1.0),
)
def test_intensities_conserve_energy(phi, gamma):
    i5, i6 = local_intensities(phi, gamma)
    assert i5 >= 0.0 and i6 >= 0.0
    assert i5 + i6 == pytest.approx(1.0, abs=1e-12)


def test_intensity_examples():
    assert local_intensities(0.0, 1.0) == pytest.approx((1.0, 0.0), abs=1e-12)
    i5, i6 = local_intensities(1.234, 0.0)
    assert (i5, i6) == (0.5, 0.5)


@settings(max_examples=50, deadline=None)
@given(detuning=st.floats(-1e12, 1e12), phase=st.floats(-6.0, 6.0))
def test_phase_periodicity(detuning, phase):
    cfg_a = umzi(phase=phase)
    cfg_b = umzi(phase=phase + 2.0 * math.pi)
    pa, pb = umzi_transfer(detuning, cfg_a), umzi_transfer(detuning, cfg_b)
    for ca, cb in zip((*pa.port5, *pa.port6), (*pb.port5, *pb.port6)):
        assert ca == pytest.approx(cb, abs=1e-9)
    ia, ib = local_intensities(pa.phi_prime, 1.0), local_intensities(pb.phi_prime, 1.0)
    assert ia[0] == pytest.approx(ib[0], abs=1e-9)


def test_dephased_ensemble_mean_intensity_is_flat():
    # delta * t_sl = 100: mean port-5 intensity is 1/2 at every setting
    model = model_with(100.0)
    cfg = umzi()
    pairs = sample_pairs(model, 100_000, seed=3)
    for phase in (0.0, 0.7, math.pi / 2, math.pi, 4.5):
        phi = 2.0 * math.pi * (pairs.detuning_signal * cfg.t_sl) + phase
        i5 = local_intensities(phi, cfg.gamma)[0]
        mc_err = i5.std() / math.sqrt(i5.size)
        assert abs(i5.mean() - 0.5) < 3.0 * mc_err


def test_local_fringe_vanishes_in_the_dephased_regime():
    fringe = ensemble_local_fringe(model_with(100.0), umzi(), PHASES_16, n_pairs=50_000, seed=4)
    assert fringe.visibility < 0.01


def test_local_fringe_survives_in_the_coherent_regime():
    fringe = ensemble_local_fringe(model_with(0.01), umzi(), PHASES_16, n_pairs=50_000, seed=4)
    assert fringe.visibility > 0.99


def test_local_fringe_matches_characteristic_function_oracle():
    model = model_with(1.0)
    fringe = ensemble_local_fringe(model, umzi(), PHASES_16, n_pairs=100_000, seed=5)
    oracle = local_visibility_oracle(model.delta, 100e-12)
    assert fringe.visibility == pytest.approx(oracle, abs=0.02)


def test_local_fringe_scales_with_gamma():
    model = model_with(0.01)
    half = ensemble_local_fringe(model, umzi(gamma=0.5), PHASES_16, n_pairs=20_000, seed=6)
    assert half.visibility == pytest.approx(0.5, abs=0.02)


def test_local_visibility_oracle_is_monotone_non_increasing():
    grid = np.geomspace(1e-3, 1e3, 40)
    values = [local_visibility_oracle(x / 100e-12, 100e-12) for x in grid]
    assert np.all(np.diff(values) <= 0.0)


def test_sampled_local_visibility_is_monotone_within_noise():
    grid = np.geomspace(0.01, 100.0, 8)
    vis = [
        ensemble_local_fringe(model_with(x), umzi(), PHASES_16, n_pairs=20_000, seed=7).visibility
        for x in grid
    ]
    assert np.all(np.diff(vis) <= 0.01)


def test_small_phase_grid_is_rejected():
    with pytest.raises(ValueError, match="8"):
        ensemble_local_fringe(model_with(1.0), umzi(), np.linspace(0, 6.28, 7), n_pairs=100)


def test_regime_flags():
    cfg = umzi()
    assert regime_flags(cfg, model_with(100.0)) == {
        "incoherent_ensemble": True,
        "individually_coherent": True,
    }
    narrow = SpectralModel(f0=3.7e14, delta=1e10, tau_ind=0.5e-9, pair_rate=1e6)
    flags = regime_flags(cfg, narrow)
    assert flags == {"incoherent_ensemble": False, "individually_coherent": False}


def test_default_overlap_decays_with_delay():
    tau_ind = 10e-9
    assert default_overlap(0.0, tau_ind) == 1.0
    assert default_overlap(tau_ind, tau_ind) == pytest.approx(0.5)
    assert default_overlap(100e-12, tau_ind) > 0.9999


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(t_sl=0.0), "t_sl"),
        (dict(gamma=1.5), "gamma"),
        (dict(gamma=-0.1), "gamma"),
        (dict(party="C"), "party"),
        (dict(phase=math.inf), "phase"),
    ],
)
def test_umzi_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        umzi(**kwargs).validate()


def test_transfer_rejects_non_finite_detuning():
    with pytest.raises(ValueError, match="finite"):
        umzi_transfer(math.nan, umzi())
