"""Streaming coincidence correlation of two time-sorted tag streams.

A single forward pass with a sliding window pairs every tag of stream A with
the stream-B tags inside ``center +- tau_max`` of it, bins the delays
``tau = t_A - t_B``, and classifies them into the central peak
(|tau - center| <= w) and the two side peaks (|tau - center -+ side_offset|
<= w).  The pass examines O(N_A + N_B + matches) candidates and uses only
(party, port, time); diagnostic tag fields never enter.

All times are integer picoseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detection import TagStream, to_picoseconds
from .errors import StreamOrderError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an install-time dependency
    njit = None

HISTOGRAM_MAGIC = "# franson-histogram v1"


@dataclass(frozen=True)
class CorrelatorConfig:
    """window: coincidence half-width w (s); bin_width, tau_max: histogram
    geometry (s); side_offset: expected side-peak position, normally the
    interferometer delay t_sl (s)."""

    window: float = 10e-12
    bin_width: float = 2e-12
    tau_max: float = 200e-12
    side_offset: float = 100e-12

    def validate(self) -> list[str]:
        if not self.window > 0:
            raise ValueError(f"window must be > 0, got {self.window}")
        if not self.bin_width > 0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        if not self.side_offset > 0:
            raise ValueError(f"side_offset must be > 0, got {self.side_offset}")
        if self.tau_max < self.side_offset + 5 * self.bin_width:
            raise ValueError(
                "tau_max must cover the side peaks: need tau_max >= "
                f"side_offset + 5*bin_width, got {self.tau_max} < "
                f"{self.side_offset + 5 * self.bin_width}"
            )
        warnings = []
        if self.window >= 0.5 * self.side_offset:
            warnings.append(
                f"window w = {self.window:g} s >= side_offset/2 = "
                f"{0.5 * self.side_offset:g} s: peak windows overlap"
            )
        return warnings


@dataclass
class CoincidenceHistogram:
    """Binned coincidences per port pair plus peak-window totals.

    counts[a, b, k]: port indices (0 -> 5, 1 -> 6) and bin index k over
    [center - tau_max, center + tau_max).  Totals are window sums, not bin
    sums, so they are exact for any bin geometry.
    """

    window_ps: int
    bin_width_ps: int
    tau_max_ps: int
    side_offset_ps: int
    center_ps: int
    counts: np.ndarray
    central: np.ndarray
    side_plus: np.ndarray
    side_minus: np.ndarray
    n_matches: int
    n_comparisons: int
    overlap_warning: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def n_bins(self) -> int:
        return self.counts.shape[2]

    def bin_edges_ps(self) -> np.ndarray:
        start = self.center_ps - self.tau_max_ps
        return start + self.bin_width_ps * np.arange(self.n_bins + 1, dtype=np.int64)

    def bin_centers_ps(self) -> np.ndarray:
        edges = self.bin_edges_ps()
        return (edges[:-1] + edges[1:]) // 2

    def port_pair_counts(self, port_a: int, port_b: int) -> np.ndarray:
        return self.counts[port_a - 5, port_b - 5]

    def totals(self) -> dict[str, np.ndarray]:
        return {
            "central": self.central,
            "side_plus": self.side_plus,
            "side_minus": self.side_minus,
        }


def _sweep_py(t_a, t_b, tau_lo, tau_hi):
    """Reference single-pass sweep; returns (ia, ib, candidate comparisons).

    A candidate comparison is one (a, b) pair examined against the window;
    the two-pointer structure guarantees at most N_A + N_B + matches of them.
    """
    n_a, n_b = len(t_a), len(t_b)
    ia, ib = [], []
    comparisons = 0
    lo = 0
    for i in range(n_a):
        # tau = t_a - t_b in [tau_lo, tau_hi] means t_b in [t_a - tau_hi, t_a - tau_lo]
        b_lo = t_a[i] - tau_hi
        b_hi = t_a[i] - tau_lo
        while lo < n_b and t_b[lo] < b_lo:
            lo += 1
        j = lo
        while j < n_b:
            comparisons += 1
            if t_b[j] > b_hi:
                break
            ia.append(i)
            ib.append(j)
            j += 1
    return (
        np.array(ia, dtype=np.int64),
        np.array(ib, dtype=np.int64),
        comparisons,
    )


def _sweep_numba_impl(t_a, t_b, tau_lo, tau_hi, out_a, out_b):
    n_a = t_a.size
    n_b = t_b.size
    comparisons = 0
    count = 0
    lo = 0
    for i in range(n_a):
        b_lo = t_a[i] - tau_hi
        b_hi = t_a[i] - tau_lo
        while lo < n_b and t_b[lo] < b_lo:
            lo += 1
        j = lo
        while j < n_b:
            comparisons += 1
            if t_b[j] > b_hi:
                break
            if count < out_a.size:
                out_a[count] = i
                out_b[count] = j
            count += 1
            j += 1
    return count, comparisons


if njit is not None:
    _sweep_numba = njit(cache=True)(_sweep_numba_impl)
else:  # pragma: no cover
    _sweep_numba = None


def sweep_matches(t_a: np.ndarray, t_b: np.ndarray, tau_lo: int, tau_hi: int):
    """All index pairs (i, j) with tau_lo <= t_a[i] - t_b[j] <= tau_hi.

    Returns (ia, ib, n_candidate_comparisons).  Inputs must be sorted.
    """
    t_a = np.ascontiguousarray(t_a, dtype=np.int64)
    t_b = np.ascontiguousarray(t_b, dtype=np.int64)
    if _sweep_numba is None:
        return _sweep_py(t_a, t_b, int(tau_lo), int(tau_hi))
    capacity = max(16, t_a.size + t_b.size)
    while True:
        out_a = np.empty(capacity, dtype=np.int64)
        out_b = np.empty(capacity, dtype=np.int64)
        count, comparisons = _sweep_numba(t_a, t_b, int(tau_lo), int(tau_hi), out_a, out_b)
        if count <= capacity:
            return out_a[:count], out_b[:count], comparisons
        capacity = count


def _require_sorted(stream: TagStream, name: str) -> None:
    if stream.time_ps.size > 1 and np.any(np.diff(stream.time_ps) < 0):
        raise StreamOrderError(f"stream {name} is not sorted by time")


def correlate(
    stream_a: TagStream,
    stream_b: TagStream,
    cfg: CorrelatorConfig,
    center: float = 0.0,
) -> CoincidenceHistogram:
    """Build the coincidence histogram of tau = t_A - t_B.

    center: offset (s) of the analysis window; the central peak is looked
    for at tau = center and the side peaks at center -+ side_offset.
    """
    config_warnings = cfg.validate()
    _require_sorted(stream_a, "A")
    _require_sorted(stream_b, "B")

    w_ps = int(to_picoseconds(cfg.window))
    bin_ps = int(to_picoseconds(cfg.bin_width))
    tau_max_ps = int(to_picoseconds(cfg.tau_max))
    side_ps = int(to_picoseconds(cfg.side_offset))
    center_ps = int(to_picoseconds(center))
    if w_ps < 1 or bin_ps < 1:
        raise ValueError("window and bin_width must be at least 1 ps")

    n_bins = -((-2 * tau_max_ps) // bin_ps)
    ia, ib, comparisons = sweep_matches(
        stream_a.time_ps, stream_b.time_ps, center_ps - tau_max_ps, center_ps + tau_max_ps
    )
    tau = stream_a.time_ps[ia] - stream_b.time_ps[ib]
    pa = stream_a.port[ia].astype(np.int64) - 5
    pb = stream_b.port[ib].astype(np.int64) - 5

    counts = np.zeros((2, 2, n_bins), dtype=np.int64)
    bins = np.minimum((tau - (center_ps - tau_max_ps)) // bin_ps, n_bins - 1)
    np.add.at(counts, (pa, pb, bins), 1)

    central = np.zeros((2, 2), dtype=np.int64)
    side_plus = np.zeros((2, 2), dtype=np.int64)
    side_minus = np.zeros((2, 2), dtype=np.int64)
    rel = tau - center_ps
    np.add.at(central, (pa[np.abs(rel) <= w_ps], pb[np.abs(rel) <= w_ps]), 1)
    sel_p = np.abs(rel - side_ps) <= w_ps
    sel_m = np.abs(rel + side_ps) <= w_ps
    np.add.at(side_plus, (pa[sel_p], pb[sel_p]), 1)
    np.add.at(side_minus, (pa[sel_m], pb[sel_m]), 1)

    return CoincidenceHistogram(
        window_ps=w_ps,
        bin_width_ps=bin_ps,
        tau_max_ps=tau_max_ps,
        side_offset_ps=side_ps,
        center_ps=center_ps,
        counts=counts,
        central=central,
        side_plus=side_plus,
        side_minus=side_minus,
        n_matches=int(tau.size),
        n_comparisons=int(comparisons),
        overlap_warning=w_ps >= side_ps / 2,
        warnings=config_warnings,
    )


@dataclass(frozen=True)
class PeakCounts:
    """Window totals per port pair and pooled, plus the post-selection ratio."""

    central: np.ndarray
    side_plus: np.ndarray
    side_minus: np.ndarray
    central_total: int
    side_total: int

    @property
    def central_fraction(self) -> float:
        total = self.central_total + self.side_total
        return self.central_total / total if total else math.nan


def peak_counts(hist: CoincidenceHistogram) -> PeakCounts:
    """The three window totals; centrals are about half of all peak events."""
    return PeakCounts(
        central=hist.central.copy(),
        side_plus=hist.side_plus.copy(),
        side_minus=hist.side_minus.copy(),
        central_total=int(hist.central.sum()),
        side_total=int(hist.side_plus.sum() + hist.side_minus.sum()),
    )


def write_histogram_csv(hist: CoincidenceHistogram, path, seed: int, config_hash: str) -> None:
    """CSV dump: tau_ps (bin center), port_a, port_b, count."""
    lines = [
        HISTOGRAM_MAGIC,
        f"# seed={seed}",
        f"# config_hash={config_hash}",
        f"# window_ps={hist.window_ps} bin_width_ps={hist.bin_width_ps} "
        f"tau_max_ps={hist.tau_max_ps} side_offset_ps={hist.side_offset_ps} "
        f"center_ps={hist.center_ps}",
        "tau_ps,port_a,port_b,count",
    ]
    centers = hist.bin_centers_ps()
    for k in range(hist.n_bins):
        for a in (0, 1):
            for b in (0, 1):
                lines.append(f"{centers[k]},{a + 5},{b + 5},{hist.counts[a, b, k]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
