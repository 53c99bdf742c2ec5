"""franson: Monte Carlo and analytic simulator of two-photon interference in
paired unbalanced Mach-Zehnder interferometers.

Photon pairs with anticorrelated detunings propagate through one
interferometer per party; locally each output port stays at half intensity,
while coincidence-selected events fringe as (1/8)(1 + cos(phi + psi)) in the
sum of the two local phase settings.  The package covers the analytic rate
algebra, stochastic time-tag generation, streaming coincidence correlation
and scripted experiment runners behind a CLI.
"""

__version__ = "0.1.0"

from .config import RunConfig, config_hash, default_config, load_config, parse_config
from .correlation import (
    ChshResult,
    OutcomeDistribution,
    central_peak_rate,
    chsh_value,
    ensemble_fringe,
    joint_central_amplitude,
    joint_phase,
    outcome_distribution,
    overlap_envelope,
)
from .correlator import CoincidenceHistogram, CorrelatorConfig, correlate, peak_counts
from .detection import (
    DetectorModel,
    TagStream,
    TimeTag,
    read_timetags,
    sample_event_pair,
    simulate_tags,
    write_timetags,
)
from .errors import (
    ConfigError,
    FitError,
    StreamOrderError,
    UndefinedCorrelationError,
)
from .experiment import (
    ChshRun,
    ScanResult,
    run_chsh,
    run_crossover_sweep,
    run_fringe_scan,
    run_local_scan,
    run_pump_sweep,
    run_tau_decay,
)
from .interferometer import (
    PortAmplitudes,
    UmziConfig,
    ensemble_local_fringe,
    local_intensities,
    local_visibility_oracle,
    regime_flags,
    umzi_transfer,
)
from .source import PairEnsemble, PhotonPair, SpectralModel, sample_pair, sample_pairs

__all__ = [
    "__version__",
    "ChshResult",
    "ChshRun",
    "CoincidenceHistogram",
    "ConfigError",
    "CorrelatorConfig",
    "DetectorModel",
    "FitError",
    "OutcomeDistribution",
    "PairEnsemble",
    "PhotonPair",
    "PortAmplitudes",
    "RunConfig",
    "ScanResult",
    "SpectralModel",
    "StreamOrderError",
    "TagStream",
    "TimeTag",
    "UmziConfig",
    "UndefinedCorrelationError",
    "central_peak_rate",
    "chsh_value",
    "config_hash",
    "correlate",
    "default_config",
    "ensemble_fringe",
    "ensemble_local_fringe",
    "joint_central_amplitude",
    "joint_phase",
    "load_config",
    "local_intensities",
    "local_visibility_oracle",
    "outcome_distribution",
    "overlap_envelope",
    "parse_config",
    "peak_counts",
    "read_timetags",
    "regime_flags",
    "run_chsh",
    "run_crossover_sweep",
    "run_fringe_scan",
    "run_local_scan",
    "run_pump_sweep",
    "run_tau_decay",
    "sample_event_pair",
    "sample_pair",
    "sample_pairs",
    "simulate_tags",
    "umzi_transfer",
    "write_timetags",
]
