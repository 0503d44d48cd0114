"""Spike-train statistics for optogenetic tagging.

Units are tagged by comparing the spike count observed during light pulses
with a Poisson distribution whose mean is the out-of-pulse rate times the
total in-pulse time.  Two one-sided tests are run at the same alpha: an
upper-tail test for activation and a lower-tail test for silencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .protocol import PulseTrain

VALIDITY_THRESHOLD = 0.01  # spikes/s
REQUIRED_EXPECTED_EVENTS = 3


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    times: np.ndarray
    session_span: tuple[float, float]

    def __post_init__(self):
        t = np.array(self.times, dtype=float).ravel()
        start, end = (float(v) for v in self.session_span)
        if not end > start:
            raise DomainError("session span must have end > start")
        if np.any(np.diff(t) <= 0):
            raise DomainError("spike times must be strictly increasing")
        if len(t) and (t[0] < start or t[-1] > end):
            raise DomainError("spike times must lie within the session span")
        t.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "session_span", (start, end))

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class Psth:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_events: int

    @property
    def rate(self) -> np.ndarray:
        """Mean firing rate per bin [spikes/s]."""
        return self.counts / (self.n_events * np.diff(self.bin_edges))


@dataclass(frozen=True)
class TagResult:
    klass: Literal["activated", "silenced", "untagged"]
    p_value: float
    r_in: float
    r_out: float
    eta: float
    k_in: int
    expected_in: float


def psth(spikes: SpikeTrain, events: Sequence[float], window: tuple[float, float], bin: float) -> Psth:
    """Peri-event spike counts summed over events.

    ``window = (pre, post)`` is given relative to each event, e.g.
    ``(-0.1, 0.2)``.  Bins are half-open ``[edge, next_edge)``.
    """
    events = np.asarray(events, dtype=float).ravel()
    if events.size == 0:
        raise DomainError("psth needs at least one event")
    pre, post = window
    if not post > pre:
        raise DomainError("window must span a positive duration")
    if not bin > 0:
        raise DomainError("bin must be > 0")
    n_bins = int(round((post - pre) / bin))
    if n_bins < 1 or not math.isclose(n_bins * bin, post - pre, rel_tol=1e-9):
        raise DomainError("window length must be a whole number of bins")
    edges = pre + bin * np.arange(n_bins + 1)
    t = spikes.times
    counts = np.zeros(n_bins, dtype=np.int64)
    lo = np.searchsorted(t, events + pre, side="left")
    hi = np.searchsorted(t, events + post, side="left")
    for ev, a, b in zip(events, lo, hi):
        rel = t[a:b] - ev
        idx = np.floor((rel - pre) / bin).astype(np.int64)
        idx = idx[(idx >= 0) & (idx < n_bins)]
        counts += np.bincount(idx, minlength=n_bins)
    return Psth(edges, counts, int(events.size))


def effect_size(r_in: float, r_out: float) -> float:
    """(r_in - r_out) / (r_in + r_out), taken as 0 when both rates are 0."""
    s = r_in + r_out
    return 0.0 if s == 0 else (r_in - r_out) / s


def _in_pulse(spikes, pulses, epoch):
    t0, t1 = epoch
    s0, s1 = spikes.session_span
    if not (t1 > t0 and t0 >= s0 and t1 <= s1):
        raise DomainError("epoch must be non-empty and within the session")
    on = np.maximum(pulses.onsets, t0)
    off = np.minimum(pulses.offsets, t1)
    keep = off > on
    on, off = on[keep], off[keep]
    t_in = math.fsum(off - on)
    t = spikes.times
    t = t[(t >= t0) & (t < t1)]
    k_in = int(np.sum(np.searchsorted(t, off, "left") - np.searchsorted(t, on, "left")))
    t_out = (t1 - t0) - t_in
    if not (t_in > 0 and t_out > 0):
        raise DomainError("epoch needs both in-pulse and out-of-pulse time")
    return k_in, t_in, len(t) - k_in, t_out


def rates_and_eta(spikes: SpikeTrain, pulses: PulseTrain, epoch: tuple[float, float]):
    """In-pulse rate, out-of-pulse rate and their effect size within ``epoch``."""
    k_in, t_in, k_out, t_out = _in_pulse(spikes, pulses, epoch)
    r_in, r_out = k_in / t_in, k_out / t_out
    return r_in, r_out, effect_size(r_in, r_out)


def poisson_tag(spikes: SpikeTrain, pulses: PulseTrain, epoch: tuple[float, float],
                alpha: float = 0.01) -> TagResult:
    """Classify a unit as activated, silenced or untagged by light pulses."""
    k_in, t_in, k_out, t_out = _in_pulse(spikes, pulses, epoch)
    r_in, r_out = k_in / t_in, k_out / t_out
    eta = effect_size(r_in, r_out)
    mu = r_out * t_in
    if mu == 0:
        # no baseline spikes: an in-pulse spike is infinitely unlikely under H0
        if k_in == 0:
            return TagResult("untagged", 1.0, r_in, r_out, eta, k_in, mu)
        return TagResult("activated", 0.0, r_in, r_out, eta, k_in, mu)
    p_up = float(stats.poisson.sf(k_in - 1, mu))
    p_down = float(stats.poisson.cdf(k_in, mu))
    if p_up < alpha and p_up <= p_down:
        klass = "activated"
    elif p_down < alpha:
        klass = "silenced"
    else:
        klass = "untagged"
    return TagResult(klass, min(p_up, p_down), r_in, r_out, eta, k_in, mu)


def validity_filter(r_baseline: float, threshold: float = VALIDITY_THRESHOLD) -> bool:
    """True (accepted) iff the baseline rate is strictly above ``threshold``."""
    if r_baseline < 0:
        raise DomainError("baseline rate must be >= 0")
    return r_baseline > threshold


def min_pulse_count(baseline_rate: float, pulse_duration: float,
                    required_expected_events: float = REQUIRED_EXPECTED_EVENTS) -> int:
    """Pulses needed for ``required_expected_events`` baseline spikes in-pulse."""
    if not (baseline_rate > 0 and pulse_duration > 0 and required_expected_events > 0):
        raise DomainError("rate, duration and required events must be positive")
    # round away float noise before the ceiling (0.01 * 0.05 is not exact)
    return math.ceil(round(required_expected_events / (baseline_rate * pulse_duration), 9))


def synth_unit(seed: int, baseline_rate: float, pulses: PulseTrain, in_pulse_gain: float,
               epoch: tuple[float, float]) -> SpikeTrain:
    """Piecewise-constant Poisson spike train.

    Rate is ``baseline_rate`` outside pulses and ``baseline_rate *
    in_pulse_gain`` inside them.  Fully determined by ``seed``.
    """
    if baseline_rate < 0 or in_pulse_gain < 0:
        raise DomainError("rates and gain must be >= 0")
    t0, t1 = epoch
    rng = np.random.default_rng(seed)
    on = np.clip(pulses.onsets, t0, t1)
    off = np.clip(pulses.offsets, t0, t1)
    # alternating out/in segment boundaries
    bounds = np.empty(2 * len(on) + 2)
    bounds[0], bounds[-1] = t0, t1
    bounds[1:-1:2], bounds[2:-1:2] = on, off
    lengths = np.diff(bounds)
    rates = np.where(np.arange(len(lengths)) % 2 == 0, baseline_rate, baseline_rate * in_pulse_gain)
    counts = rng.poisson(rates * lengths)
    seg = np.repeat(np.arange(len(lengths)), counts)
    times = bounds[seg] + rng.random(seg.size) * lengths[seg]
    times = np.unique(times)
    return SpikeTrain(times, (t0, t1))


def read_spikes(path, session_span=None) -> SpikeTrain:
    """One spike time [s] per line.  Span defaults to [0, last spike]."""
    text = Path(path).read_text().split()
    times = np.array([float(v) for v in text], dtype=float)
    if session_span is None:
        session_span = (0.0, float(times[-1]) if len(times) else 1.0)
    return SpikeTrain(times, session_span)


def write_spikes(path, spikes: SpikeTrain) -> None:
    Path(path).write_text("".join(f"{float(t)!r}\n" for t in spikes.times))
