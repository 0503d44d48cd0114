"""Constant-current stimulation waveforms for the laser diodes.

Trains are sequences of rectangular pulses ``(onset [s], duration [s],
amplitude [mA])``.  Every constructor enforces the 100 mA drive cap by
raising :class:`SafetyError`; nothing is ever clamped.

Rendering uses half-open sample intervals: a pulse occupies samples
``floor(onset*fs) <= i < floor(offset*fs)``.  Products ``t*fs`` are rounded
to 9 decimals before flooring so that exactly representable boundaries are
not lost to binary floating point.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, SafetyError

MAX_CURRENT_MA = 100.0
DSP_SAMPLE_RATE = 24414.0
DEFAULT_MULTIPLES = (0.5, 1.0, 2.0, 4.0)
CSV_HEADER = ("onset_s", "duration_s", "amplitude_mA")


def _check_cap(amplitudes):
    over = [float(a) for a in np.atleast_1d(amplitudes) if a > MAX_CURRENT_MA]
    if over:
        raise SafetyError(f"amplitude(s) {over} mA exceed the {MAX_CURRENT_MA:g} mA cap")


@dataclass(frozen=True, eq=False)
class PulseTrain:
    onsets: np.ndarray
    durations: np.ndarray
    amplitudes: np.ndarray
    total_span: float

    def __post_init__(self):
        on = np.array(self.onsets, dtype=float).ravel()
        du = np.array(self.durations, dtype=float).ravel()
        am = np.array(self.amplitudes, dtype=float).ravel()
        if not (on.shape == du.shape == am.shape):
            raise DomainError("onsets, durations and amplitudes must have equal length")
        _check_cap(am)
        if np.any(am < 0):
            raise DomainError("amplitudes must be >= 0")
        if np.any(du <= 0):
            raise DomainError("pulse durations must be > 0")
        if np.any(np.diff(on) <= 0):
            raise DomainError("onsets must be strictly increasing")
        # tolerate rounding at touching pulses (duty = 1)
        if np.any(on[1:] < (on[:-1] + du[:-1]) - 1e-12 * np.maximum(1.0, on[1:])):
            raise DomainError("pulses overlap")
        if len(on) and on[0] < 0:
            raise DomainError("onsets must be >= 0")
        span = float(self.total_span)
        if len(on) and span < on[-1] + du[-1] - 1e-9:
            raise DomainError("total_span ends before the last pulse")
        for name, arr in (("onsets", on), ("durations", du), ("amplitudes", am)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "total_span", span)

    def __len__(self):
        return len(self.onsets)

    def __eq__(self, other):
        if not isinstance(other, PulseTrain):
            return NotImplemented
        return (
            np.array_equal(self.onsets, other.onsets)
            and np.array_equal(self.durations, other.durations)
            and np.array_equal(self.amplitudes, other.amplitudes)
            and self.total_span == other.total_span
        )

    @property
    def offsets(self) -> np.ndarray:
        return self.onsets + self.durations

    @property
    def on_time(self) -> float:
        return math.fsum(self.durations)


@dataclass(frozen=True)
class ChirpSpec:
    f0: float
    f_end: float
    duration: float
    duty: float
    amplitude: float

    def __post_init__(self):
        if not 0 <= self.f0 <= self.f_end:
            raise DomainError("chirp needs 0 <= f0 <= f_end")
        if not self.duration > 0:
            raise DomainError("chirp duration must be > 0")
        if not 0 < self.duty < 1:
            raise DomainError("chirp duty must lie in (0, 1)")
        _check_cap(self.amplitude)
        if self.amplitude < 0:
            raise DomainError("amplitude must be >= 0")


def square_train(period: float, duty: float, amplitude: float, n_cycles: int) -> PulseTrain:
    """``n_cycles`` pulses of length ``duty*period`` starting at ``k*period``."""
    _check_cap(amplitude)
    if not (period > 0 and duty > 0):
        raise DomainError("period and duty must be > 0")
    if duty > 1:
        raise DomainError(f"duty {duty} > 1 makes consecutive pulses overlap")
    if n_cycles < 0:
        raise DomainError("n_cycles must be >= 0")
    onsets = np.arange(n_cycles) * period
    return PulseTrain(onsets, np.full(n_cycles, duty * period), np.full(n_cycles, float(amplitude)),
                      n_cycles * period)


def intensity_ladder(i_max: float, multiples: Sequence[float] = DEFAULT_MULTIPLES) -> list[float]:
    """Drive currents ``i_max * m`` for each multiple, ascending [mA]."""
    rungs = sorted(i_max * m for m in multiples)
    over = [r for r in rungs if r > MAX_CURRENT_MA]
    if over:
        raise SafetyError(f"ladder rungs {over} mA exceed the {MAX_CURRENT_MA:g} mA cap")
    return rungs


def ladder_train(
    i_max: float,
    pulse_duration: float,
    period: float,
    pulses_per_rung: int,
    multiples: Sequence[float] = DEFAULT_MULTIPLES,
) -> PulseTrain:
    """Square pulses stepping through the intensity ladder, lowest rung first."""
    rungs = intensity_ladder(i_max, multiples)
    if not 0 < pulse_duration <= period:
        raise DomainError("need 0 < pulse_duration <= period")
    n = len(rungs) * pulses_per_rung
    amps = np.repeat(rungs, pulses_per_rung)
    return PulseTrain(np.arange(n) * period, np.full(n, pulse_duration), amps, n * period)


def _time_of_cycles(c, f0, rate):
    """Invert cycles(t) = f0*t + rate*t^2 for t >= 0 (rate = (f_end - f0) / (2T))."""
    c = np.asarray(c, dtype=float)
    # 2c / (f0 + sqrt(f0^2 + 4*rate*c)) avoids cancellation and covers rate = 0
    den = f0 + np.sqrt(f0 * f0 + 4.0 * rate * c)
    return np.divide(2.0 * c, den, out=np.zeros_like(c), where=c > 0)


def chirp_train(spec: ChirpSpec) -> PulseTrain:
    """Linear-frequency square chirp.

    The output is ON wherever the fractional part of the accumulated cycle
    count ``f0*t + (f_end - f0)*t^2 / (2T)`` is below ``duty``.  Pulse edges
    are found by inverting that quadratic exactly.
    """
    f0, f1, T = spec.f0, spec.f_end, spec.duration
    if f0 == 0 and f1 == 0:
        raise DomainError("f0 = f_end = 0 produces no cycles")
    rate = (f1 - f0) / (2.0 * T)
    total = (f0 + f1) * T / 2.0
    k = np.arange(math.ceil(total - 1e-9))
    on_c = k.astype(float)
    off_c = np.minimum(on_c + spec.duty, total)
    onsets = _time_of_cycles(on_c, f0, rate)
    offsets = np.minimum(_time_of_cycles(off_c, f0, rate), T)
    durations = offsets - onsets
    keep = durations > 0
    amps = np.full(int(keep.sum()), float(spec.amplitude))
    return PulseTrain(onsets[keep], durations[keep], amps, T)


def _sample_index(t, fs):
    return np.floor(np.round(np.asarray(t, dtype=float) * fs, 9)).astype(np.int64)


def render(train: PulseTrain, sample_rate: float, n_samples: Optional[int] = None) -> np.ndarray:
    """Amplitude samples [mA] at ``sample_rate`` Hz.

    By default the output covers ``floor(total_span * fs)`` samples.
    """
    if not sample_rate > 0:
        raise DomainError("sample_rate must be > 0")
    if n_samples is None:
        n_samples = int(_sample_index(train.total_span, sample_rate))
    out = np.zeros(n_samples, dtype=float)
    starts = _sample_index(train.onsets, sample_rate)
    stops = _sample_index(train.offsets, sample_rate)
    for a, b, amp in zip(starts, stops, train.amplitudes):
        out[max(a, 0):min(b, n_samples)] = amp
    return out


def duty_cycle_of(train: PulseTrain, window: tuple[float, float]) -> float:
    """Fraction of ``window`` covered by pulses."""
    t0, t1 = window
    if not t1 > t0:
        raise DomainError("window must be non-empty")
    overlap = np.clip(np.minimum(train.offsets, t1) - np.maximum(train.onsets, t0), 0.0, None)
    return math.fsum(overlap) / (t1 - t0)


# -- CSV / raw I/O -----------------------------------------------------------

def format_train_csv(train: PulseTrain) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in zip(train.onsets, train.durations, train.amplitudes):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_train_csv(path, train: PulseTrain) -> None:
    Path(path).write_text(format_train_csv(train))


def read_train_csv(path, total_span: Optional[float] = None) -> PulseTrain:
    """Load a train; the span defaults to the end of the last pulse."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DomainError(f"{path}: expected header {','.join(CSV_HEADER)}")
        rows = [[float(v) for v in r] for r in reader if r]
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    if total_span is None:
        total_span = float((arr[:, 0] + arr[:, 1]).max()) if len(arr) else 0.0
    return PulseTrain(arr[:, 0], arr[:, 1], arr[:, 2], total_span)


def write_samples(path, samples: np.ndarray, fmt: str = "f32") -> None:
    """Rendered samples as raw little-endian float32 (``f32``) or one-per-line CSV."""
    if fmt == "f32":
        Path(path).write_bytes(np.asarray(samples, dtype="<f4").tobytes())
    elif fmt == "csv":
        Path(path).write_text("amplitude_mA\n" + "".join(f"{float(v)!r}\n" for v in samples))
    else:
        raise DomainError(f"unknown sample format {fmt!r}")
