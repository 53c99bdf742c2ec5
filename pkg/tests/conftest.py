"""Shared fixtures: configurations used across the suite."""

from dataclasses import replace

import pytest

import franson as fr


def ideal_config(seed: int = 1, n_points: int = 16, pairs_per_point: int = 20_000) -> fr.RunConfig:
    """Default physics with perfect path overlap; unit-visibility fringe."""
    return fr.parse_config(
        """
        {
          "seed": %d,
          "umzi_a": {"t_sl": 100e-12, "phase": 0.0, "gamma": 1.0},
          "umzi_b": {"t_sl": 100e-12, "phase": 0.0, "gamma": 1.0},
          "scan": {"n_points": %d, "pairs_per_point": %d,
                   "chsh_settings": [0.0, 1.5707963267948966,
                                     -0.7853981633974483, 0.7853981633974483]}
        }
        """
        % (seed, n_points, pairs_per_point)
    )


@pytest.fixture
def ideal():
    return ideal_config()


@pytest.fixture
def model(ideal):
    return ideal.source


@pytest.fixture
def umzi_pair(ideal):
    return ideal.umzi_a, ideal.umzi_b


def with_seed(cfg: fr.RunConfig, seed: int) -> fr.RunConfig:
    return replace(cfg, seed=seed)
