"""Joint two-photon amplitudes and coincidence-selected rates.

Coincidence detection at equal times keeps only the short-short and long-long
path products of the two interferometers; their superposition produces the
nonlocal fringe

    R(port_a, port_b) = (1/8) (1 + s_a s_b V cos(phi' + psi'))

with port sign s = +1 for port 5 and -1 for port 6, while the short-long and
long-short products land in time-shifted side peaks with flat probability
1/16 each.  Because the signal and idler detunings are opposite, the joint
phase phi' + psi' reduces to the sum of the two local settings plus a pump
jitter term: the fringe is immune to the per-pair detuning.

``V`` is an explicit envelope factor in [0, 1]; pump jitter enters through
the joint phase instead, so the two degradation channels stay orthogonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import UndefinedCorrelationError
from .interferometer import UmziConfig
from .source import PhotonPair, SpectralModel, sample_pairs

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)

PORTS = (5, 6)
BRANCHES = ("central", "SL", "LS")
BRANCH_CENTRAL, BRANCH_SL, BRANCH_LS = 0, 1, 2

SIDE_PROBABILITY = 1.0 / 16.0


def port_sign(port: int) -> int:
    if port == 5:
        return 1
    if port == 6:
        return -1
    raise ValueError(f"port must be 5 or 6, got {port}")


def joint_phase(df, dp, cfg_a: UmziConfig, cfg_b: UmziConfig):
    """phi'_A + psi'_B with the detuning cancellation done analytically.

    The signal (party A) carries detuning df + dp/2, the idler (party B)
    carries dp/2 - df.  Summing the detuning terms before multiplying by
    2*pi keeps the cancellation exact in floating point: for dp == 0 and
    equal delays the result is bitwise phase_a + phase_b, independent of df.
    """
    det_a = df + 0.5 * dp
    det_b = 0.5 * dp - df
    return TWO_PI * (det_a * cfg_a.t_sl + det_b * cfg_b.t_sl) + (cfg_a.phase + cfg_b.phase)


def joint_central_amplitude(
    pair: PhotonPair, cfg_a: UmziConfig, cfg_b: UmziConfig, port_a: int, port_b: int
) -> complex:
    """Coincidence-selected amplitude (1/4)(s_a s_b + e^{i(phi'+psi')}), up to
    a global phase; only the short-short and long-long products survive."""
    sign = port_sign(port_a) * port_sign(port_b)
    theta = joint_phase(pair.df, pair.dp, cfg_a, cfg_b)
    return 0.25 * (sign + complex(math.cos(theta), math.sin(theta)))


def central_peak_rate(
    pair: PhotonPair,
    cfg_a: UmziConfig,
    cfg_b: UmziConfig,
    port_a: int,
    port_b: int,
    envelope: float = 1.0,
):
    """Central-peak coincidence probability (1/8)(1 + s_a s_b V cos(phi'+psi'))."""
    _check_envelope(envelope)
    sign = port_sign(port_a) * port_sign(port_b)
    theta = joint_phase(pair.df, pair.dp, cfg_a, cfg_b)
    return 0.125 * (1.0 + sign * envelope * np.cos(theta))


def central_rate_table(df, dp, cfg_a: UmziConfig, cfg_b: UmziConfig, envelope=1.0) -> np.ndarray:
    """Central-peak rates for all four port pairs; shape (2, 2) + df.shape.

    Index 0 is port 5, index 1 is port 6, axes ordered (port_a, port_b).
    """
    theta = joint_phase(np.asarray(df, dtype=np.float64), dp, cfg_a, cfg_b)
    fringe = envelope * np.cos(theta)
    same = 0.125 * (1.0 + fringe)
    diff = 0.125 * (1.0 - fringe)
    return np.stack(
        [np.stack([same, diff], axis=0), np.stack([diff, same], axis=0)],
        axis=0,
    )


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint probability table over (port_a, port_b, branch); 12 entries.

    table[a, b, k]: a, b index ports (0 -> 5, 1 -> 6) and k indexes the
    branch (0 central, 1 SL, 2 LS).  Every SL/LS entry is exactly 1/16; the
    central entries carry the whole phase dependence and sum to 1/2.
    """

    table: np.ndarray

    def prob(self, port_a: int, port_b: int, branch: str) -> float:
        return float(self.table[PORTS.index(port_a), PORTS.index(port_b), BRANCHES.index(branch)])

    def total(self) -> float:
        return float(self.table.sum())

    def central_total(self) -> float:
        return float(self.table[:, :, BRANCH_CENTRAL].sum())

    def marginal_port_a(self) -> np.ndarray:
        return self.table.sum(axis=(1, 2))

    def marginal_port_b(self) -> np.ndarray:
        return self.table.sum(axis=(0, 2))

    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def validate(self, tol: float = 1e-12) -> None:
        if np.any(self.table < 0):
            raise AssertionError("negative outcome probability")
        if abs(self.total() - 1.0) > tol:
            raise AssertionError(f"outcome table sums to {self.total()!r}, not 1")
        sides = self.table[:, :, (BRANCH_SL, BRANCH_LS)]
        if not np.all(sides == SIDE_PROBABILITY):
            raise AssertionError("side-branch entries must equal 1/16 exactly")


def outcome_distribution(
    pair: PhotonPair, cfg_a: UmziConfig, cfg_b: UmziConfig, envelope: float = 1.0
) -> OutcomeDistribution:
    """Per-pair joint outcome table with the given central fringe envelope."""
    _check_envelope(envelope)
    table = np.full((2, 2, 3), SIDE_PROBABILITY)
    table[:, :, BRANCH_CENTRAL] = central_rate_table(pair.df, pair.dp, cfg_a, cfg_b, envelope)
    return OutcomeDistribution(table=table)


@dataclass(frozen=True)
class EnsembleFringe:
    """Mean central-peak rates over a sampled ensemble."""

    rates: np.ndarray  # (2, 2) port-pair means
    stderr: np.ndarray  # (2, 2) standard errors of the means
    n_pairs: int

    def rate(self, port_a: int, port_b: int) -> float:
        return float(self.rates[PORTS.index(port_a), PORTS.index(port_b)])


def ensemble_fringe(
    model: SpectralModel,
    cfg_a: UmziConfig,
    cfg_b: UmziConfig,
    n_pairs: int,
    seed: int = 0,
    stream: int = 0,
    envelope: float = 1.0,
) -> EnsembleFringe:
    """Average the central-peak rates over n_pairs sampled pairs.

    With pump_linewidth = 0 the detuning cancellation makes every pair's rate
    identical, so the mean equals (1/8)(1 + s_a s_b V cos(phase_a + phase_b))
    without Monte Carlo noise in the phase argument.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    pairs = sample_pairs(model, n_pairs, seed, stream=stream)
    rates = central_rate_table(pairs.df, pairs.dp, cfg_a, cfg_b, envelope)
    return EnsembleFringe(
        rates=rates.mean(axis=-1),
        stderr=rates.std(axis=-1) / math.sqrt(n_pairs),
        n_pairs=n_pairs,
    )


def correlation_coefficient(rates: np.ndarray) -> float:
    """E = (R55 + R66 - R56 - R65) / (R55 + R66 + R56 + R65)."""
    r = np.asarray(rates, dtype=np.float64)
    total = float(r.sum())
    if total <= 0.0:
        raise UndefinedCorrelationError("no central coincidences; correlation undefined")
    return float((r[0, 0] + r[1, 1] - r[0, 1] - r[1, 0]) / total)


@dataclass(frozen=True)
class ChshResult:
    s_value: float
    correlations: dict[str, float]
    settings: tuple[float, float, float, float]


def chsh_value(
    model: SpectralModel,
    cfg_a: UmziConfig,
    cfg_b: UmziConfig,
    settings: tuple[float, float, float, float],
    n_pairs: int = 10_000,
    seed: int = 0,
    envelope: float = 1.0,
) -> ChshResult:
    """CHSH sum over four phase settings (a, a', b, b').

    S = |E(a,b) + E(a,b') + E(a',b) - E(a',b')|; with the sum-phase fringe
    E(x, y) = V cos(x + y), the settings (0, pi/2, -pi/4, pi/4) reach 2*sqrt(2).
    """
    a, a_prime, b, b_prime = settings
    combos = {
        "ab": (a, b),
        "ab'": (a, b_prime),
        "a'b": (a_prime, b),
        "a'b'": (a_prime, b_prime),
    }
    corr = {}
    for k, (name, (pa, pb)) in enumerate(combos.items()):
        fringe = ensemble_fringe(
            model,
            replace(cfg_a, phase=pa),
            replace(cfg_b, phase=pb),
            n_pairs,
            seed=seed,
            stream=stream_for_setting(k),
            envelope=envelope,
        )
        corr[name] = correlation_coefficient(fringe.rates)
    s_value = abs(corr["ab"] + corr["ab'"] + corr["a'b"] - corr["a'b'"])
    return ChshResult(s_value=s_value, correlations=corr, settings=tuple(settings))


def stream_for_setting(k: int) -> int:
    """Source substream used for the k-th CHSH setting combination."""
    return 100 + k


def overlap_envelope(tau, delta: float):
    """Pair wavepacket overlap at relative offset tau.

    Amplitude autocorrelation of a Gaussian wavepacket whose intensity
    profile has FWHM 1/delta: exp(-2 ln2 (delta tau)^2).  Reaches 1/2 near
    |tau| ~ 0.6/delta, realizing the fringe loss on the scale of the inverse
    ensemble bandwidth.
    """
    return np.exp(-2.0 * LN2 * np.square(np.asarray(tau, dtype=np.float64) * delta))


def _check_envelope(envelope: float) -> None:
    env = np.asarray(envelope)
    if np.any(env < 0.0) or np.any(env > 1.0):
        raise ValueError(f"envelope factor must lie in [0, 1], got {envelope}")
