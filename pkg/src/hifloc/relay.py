"""Distance-relay measurement chain and mho trip logic.

Mirrors a numerical ground-distance element: a sliding full-cycle DFT
extracts fundamental-frequency phasors from the sampled record, the
ground-loop apparent impedance is Va / (Ia + k0 * Iresidual) with the
zero-sequence compensation factor k0 = (z0 - z1) / (3 z1), and the trip
characteristic is a mho circle through the origin of the R-X plane.
Passing k0 = 0 yields the plain V/I measurement.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadWindow, RecordTooShort, ZeroCurrent
from .netmodel import LineParams, WaveformSet

# Compensated-current magnitude below which a locus point is undefined
DENOMINATOR_FLOOR_A = 1e-9


@dataclass(frozen=True)
class PhasorEstimate:
    """Fundamental phasor of one DFT window; t_s is the window-end time."""

    value: complex
    t_s: float


@dataclass(frozen=True)
class ImpedanceLocus:
    """Time-ordered apparent-impedance trajectory in the R-X plane."""

    times_s: np.ndarray
    z_ohm: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times_s) != len(self.z_ohm):
            raise ValueError("times and impedances must have equal length")
        if len(self.times_s) > 1 and not np.all(np.diff(self.times_s) > 0):
            raise ValueError("locus times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times_s)

    @property
    def points(self) -> list[tuple[float, complex]]:
        return [(float(t), complex(z)) for t, z in zip(self.times_s, self.z_ohm)]


@dataclass(frozen=True)
class MhoZone:
    """Mho circle through the origin: diameter reach_ohm along angle_deg."""

    reach_ohm: float
    angle_deg: float

    def __post_init__(self) -> None:
        if self.reach_ohm <= 0:
            raise ValueError("reach_ohm must be positive")
        if not 0 < self.angle_deg < 180:
            raise ValueError("angle_deg must lie in (0, 180)")

    @property
    def center(self) -> complex:
        return cmath.rect(self.reach_ohm / 2.0, math.radians(self.angle_deg))


@dataclass(frozen=True)
class RelayDecision:
    tripped: bool
    trip_time_s: Optional[float] = None
    first_inzone_index: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tripped and self.trip_time_s is None:
            raise ValueError("a trip decision must carry a trip time")


def _dft_kernel(samples_per_cycle: int) -> np.ndarray:
    n = np.arange(samples_per_cycle)
    return (2.0 / samples_per_cycle) * np.exp(-2j * math.pi * n / samples_per_cycle)


def dft_phasor(window: np.ndarray, samples_per_cycle: int,
               t_s: float = 0.0) -> PhasorEstimate:
    """Full-cycle DFT estimate of the fundamental phasor.

    Returns (2/N) * sum_n x[n] * exp(-j*2*pi*n/N).  Exact for sinusoids
    with an integer number of cycles per window; rejects DC and all
    integer harmonics up to the Nyquist order.

    Raises
    ------
    BadWindow
        If the window length differs from samples_per_cycle or the
        window is shorter than 4 samples.
    """
    window = np.asarray(window, dtype=float)
    if samples_per_cycle < 4 or len(window) != samples_per_cycle:
        raise BadWindow(
            f"expected a window of {samples_per_cycle} samples (>= 4), got {len(window)}")
    value = complex(window @ _dft_kernel(samples_per_cycle))
    return PhasorEstimate(value=value, t_s=t_s)


def residual_compensation_factor(z1: complex, z0: complex) -> complex:
    """Zero-sequence compensation factor k0 = (z0 - z1) / (3 z1)."""
    if abs(z1) == 0:
        raise ValueError("positive-sequence impedance must be nonzero")
    return (z0 - z1) / (3 * z1)


def apparent_impedance(va: PhasorEstimate, ia: PhasorEstimate,
                       iresidual: PhasorEstimate, k0: complex) -> complex:
    """Ground-loop apparent impedance Z = Va / (Ia + k0 * Iresidual).

    With k0 = 0 this is the plain voltage/current ratio.

    Raises
    ------
    ZeroCurrent
        If the compensated current magnitude is below 1e-9 A.
    """
    denom = ia.value + k0 * iresidual.value
    if abs(denom) < DENOMINATOR_FLOOR_A:
        raise ZeroCurrent("compensated relay current is zero; impedance undefined")
    return va.value / denom


def track_locus(waves: WaveformSet, samples_per_cycle: int,
                k0: complex) -> ImpedanceLocus:
    """Slide a one-cycle DFT window across the record and collect Z(t).

    One window position per sample (stride 1); positions whose
    compensated current magnitude falls below 1e-9 A are omitted, which
    silently drops the undefined pre-fault points of a no-load record.

    Raises
    ------
    RecordTooShort
        If the record holds fewer samples than one window.
    """
    n = len(waves)
    if n < samples_per_cycle:
        raise RecordTooShort(
            f"record of {n} samples is shorter than one {samples_per_cycle}-sample cycle")
    kernel = _dft_kernel(samples_per_cycle)
    win = np.lib.stride_tricks.sliding_window_view
    v = win(waves.samples_va, samples_per_cycle) @ kernel
    i = win(waves.samples_ia, samples_per_cycle) @ kernel
    ir = win(waves.samples_iresidual, samples_per_cycle) @ kernel

    denom = i + k0 * ir
    keep = np.abs(denom) >= DENOMINATOR_FLOOR_A
    n_windows = n - samples_per_cycle + 1
    t_end = waves.t0_s + (np.arange(n_windows) + samples_per_cycle - 1) / waves.sample_rate_hz
    z = np.divide(v, denom, out=np.zeros_like(v), where=keep)
    return ImpedanceLocus(times_s=t_end[keep], z_ohm=z[keep])


def mho_contains(z: complex, zone: MhoZone) -> bool:
    """Inclusive point-in-mho test: |z - c| <= |c| with c the circle center."""
    c = zone.center
    return abs(z - c) <= abs(c)


def decide_trip(locus: ImpedanceLocus, zone: MhoZone, dwell: int = 3) -> RelayDecision:
    """Trip on the first run of `dwell` consecutive in-zone locus points.

    trip_time_s is the time of the dwell-th point of that run;
    first_inzone_index is the index of the run's first point (or of the
    first in-zone point when no trip occurs and some point is in zone).
    """
    if dwell < 1:
        raise ValueError("dwell must be at least 1")
    run = 0
    first_any: Optional[int] = None
    for idx in range(len(locus)):
        if mho_contains(complex(locus.z_ohm[idx]), zone):
            if first_any is None:
                first_any = idx
            run += 1
            if run == dwell:
                start = idx - dwell + 1
                return RelayDecision(tripped=True,
                                     trip_time_s=float(locus.times_s[idx]),
                                     first_inzone_index=start)
        else:
            run = 0
    return RelayDecision(tripped=False, trip_time_s=None, first_inzone_index=first_any)


def zone1_for_line(line: LineParams, reach_fraction: float = 0.8) -> MhoZone:
    """Zone-1 mho setting: reach_fraction of the line impedance at the line angle."""
    z_line = line.z1_total
    return MhoZone(reach_ohm=reach_fraction * abs(z_line),
                   angle_deg=math.degrees(cmath.phase(z_line)))


def locus_to_csv(locus: ImpedanceLocus) -> str:
    """CSV export: header t,r_ohm,x_ohm, full double precision."""
    lines = ["t,r_ohm,x_ohm"]
    for t, z in zip(locus.times_s, locus.z_ohm):
        lines.append(f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r}")
    return "\n".join(lines) + "\n"
