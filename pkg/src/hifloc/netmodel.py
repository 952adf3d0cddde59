"""Phasor-domain model of a double-fed transmission line under phase-a-to-ground faults.

The network is two Thevenin sources (buses A and B) joined by a lumped
series line; the relay sits at bus A and looks toward B.  Faults are
solved with symmetrical components: for a single-line-to-ground fault the
positive-, negative- and zero-sequence networks connect in series through
three times the fault resistance, and the relay-side quantities follow
from current dividers superposed on the pre-fault load flow.

Waveform synthesis is piecewise-phasor: every sample is the real part of
the rotating pre- or post-fault phasor, switching at the inception
instant.  No electromagnetic transients are modelled; an optional
exponentially decaying offset can be added to the current channels to
mimic the DC component of a real fault record.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadSampling, DegenerateNetwork, NoLoadFlow

# 120 degree rotation operator of the symmetrical-component transform
ALPHA = cmath.exp(2j * math.pi / 3)

# Below this relay-current magnitude (A) the load impedance is undefined
CURRENT_FLOOR_A = 1e-9


@dataclass(frozen=True)
class LineParams:
    """Series line constants of the protected overhead line.

    z1_per_km / z0_per_km are the positive- and zero-sequence impedances
    in ohm per km; the negative-sequence impedance equals the positive
    one (transposed static line).
    """

    z1_per_km: complex
    z0_per_km: complex
    length_km: float
    f_hz: float

    def __post_init__(self) -> None:
        if self.length_km <= 0:
            raise ValueError("length_km must be positive")
        if self.f_hz <= 0:
            raise ValueError("f_hz must be positive")
        for name, z in (("z1_per_km", self.z1_per_km), ("z0_per_km", self.z0_per_km)):
            if z.real < 0 or z.imag <= 0:
                raise ValueError(f"{name} must be inductive with non-negative resistance")

    @property
    def z1_total(self) -> complex:
        return self.length_km * self.z1_per_km

    @property
    def z0_total(self) -> complex:
        return self.length_km * self.z0_per_km


@dataclass(frozen=True)
class SourceParams:
    """Thevenin equivalent behind one line terminal.

    emf is the line-to-neutral phase-a EMF phasor in volts; z1 doubles as
    the negative-sequence impedance.
    """

    emf: complex
    z1: complex
    z0: complex

    def __post_init__(self) -> None:
        if abs(self.emf) <= 0:
            raise ValueError("source EMF magnitude must be positive")
        if self.z1.imag <= 0:
            raise ValueError("source z1 must be inductive")


@dataclass(frozen=True)
class FaultScenario:
    """One phase-a-to-ground fault case: where, how resistive, and when."""

    distance_km: float
    rf_ohm: float
    inception_s: float = 0.0
    kind: str = "phase-a-to-ground"

    def __post_init__(self) -> None:
        if self.rf_ohm < 0:
            raise ValueError("rf_ohm must be non-negative")
        if self.inception_s < 0:
            raise ValueError("inception_s must be non-negative")
        if self.kind != "phase-a-to-ground":
            raise ValueError(f"unsupported fault kind: {self.kind!r}")

    def validate_against(self, line: LineParams) -> None:
        if not 0 < self.distance_km < line.length_km:
            raise ValueError("fault distance must lie strictly inside the line")


@dataclass(frozen=True)
class NetworkSolution:
    """Steady-state phasors of one network condition as seen by the relay.

    i_seq_fault holds the (I1, I2, I0) fault-point sequence currents;
    they are all equal for a phase-a-to-ground fault and all zero in the
    pre-fault state.  Voltages are line-to-neutral at the relay bus,
    currents flow from the relay bus into the line.
    """

    i_seq_fault: tuple[complex, complex, complex]
    v_relay_abc: tuple[complex, complex, complex]
    i_relay_abc: tuple[complex, complex, complex]
    i_relay_residual: complex


@dataclass(frozen=True)
class WaveformSet:
    """Sampled relay-terminal record (phase-a voltage/current plus residual)."""

    sample_rate_hz: float
    samples_va: np.ndarray
    samples_ia: np.ndarray
    samples_iresidual: np.ndarray
    t0_s: float = 0.0

    def __len__(self) -> int:
        return len(self.samples_va)

    def times(self) -> np.ndarray:
        return self.t0_s + np.arange(len(self)) / self.sample_rate_hz


def seq_to_abc(x1: complex, x2: complex, x0: complex) -> tuple[complex, complex, complex]:
    """Symmetrical-component synthesis [x1, x2, x0] -> (xa, xb, xc)."""
    a = ALPHA
    xa = x1 + x2 + x0
    xb = a * a * x1 + a * x2 + x0
    xc = a * x1 + a * a * x2 + x0
    return (xa, xb, xc)


def _load_current(line: LineParams, src_a: SourceParams,
                  src_b: Optional[SourceParams]) -> complex:
    """Positive-sequence mesh current A -> B of the healthy line (0 if radial)."""
    if src_b is None:
        return 0j
    return (src_a.emf - src_b.emf) / (src_a.z1 + line.z1_total + src_b.z1)


def _prefault_solution(line: LineParams, src_a: SourceParams,
                       src_b: Optional[SourceParams]) -> NetworkSolution:
    """Balanced pre-fault state; tolerates zero circulating current."""
    i1 = _load_current(line, src_a, src_b)
    v1 = src_a.emf - src_a.z1 * i1
    return NetworkSolution(
        i_seq_fault=(0j, 0j, 0j),
        v_relay_abc=seq_to_abc(v1, 0j, 0j),
        i_relay_abc=seq_to_abc(i1, 0j, 0j),
        i_relay_residual=0j,
    )


def prefault_state(line: LineParams, src_a: SourceParams,
                   src_b: Optional[SourceParams]) -> NetworkSolution:
    """Solve the healthy two-source network.

    Parameters
    ----------
    line, src_a, src_b:
        Network parameters.  src_b may be None for a radial line (remote
        terminal open).

    Returns
    -------
    NetworkSolution with balanced relay voltages/currents and zero fault
    and residual currents.

    Raises
    ------
    NoLoadFlow
        If the relay current magnitude is below 1e-9 A (equal EMFs or
        open remote end): the load impedance point V/I is then undefined.
    """
    sol = _prefault_solution(line, src_a, src_b)
    if abs(sol.i_relay_abc[0]) < CURRENT_FLOOR_A:
        raise NoLoadFlow("pre-fault relay current is zero; load impedance undefined")
    return sol


def solve_slg_fault(line: LineParams, src_a: SourceParams,
                    src_b: Optional[SourceParams],
                    scenario: FaultScenario) -> NetworkSolution:
    """Solve a phase-a-to-ground fault through rf_ohm at scenario.distance_km.

    The three sequence networks are reduced to their Thevenin equivalents
    at the fault point (source impedance plus line section on each side,
    in parallel) and connected in series through 3*rf.  Relay-side phase
    quantities follow from the sequence current dividers, superposed on
    the pre-fault load flow in the positive-sequence network.

    Raises
    ------
    DegenerateNetwork
        If the series loop impedance magnitude falls below 1e-12 ohm.
    """
    scenario.validate_against(line)
    d = scenario.distance_km
    rest = line.length_km - d

    # A-side and B-side branch impedances seen from the fault point
    za1 = src_a.z1 + d * line.z1_per_km
    za0 = src_a.z0 + d * line.z0_per_km
    if src_b is None:
        z1_th, z0_th = za1, za0
        div1 = div0 = 1.0 + 0j
    else:
        zb1 = src_b.z1 + rest * line.z1_per_km
        zb0 = src_b.z0 + rest * line.z0_per_km
        z1_th = za1 * zb1 / (za1 + zb1)
        z0_th = za0 * zb0 / (za0 + zb0)
        div1 = zb1 / (za1 + zb1)
        div0 = zb0 / (za0 + zb0)

    z_loop = 2 * z1_th + z0_th + 3 * scenario.rf_ohm
    if abs(z_loop) < 1e-12:
        raise DegenerateNetwork("series sequence impedance of the fault loop is zero")

    # Pre-fault voltage at the fault point drives the series connection
    i_load = _load_current(line, src_a, src_b)
    e_pre = src_a.emf - i_load * za1
    i_f = e_pre / z_loop  # I1 = I2 = I0 at the fault point

    # Relay-side (bus A) sequence currents: fault components via the
    # dividers, load flow superposed in the positive-sequence network.
    i1_a = i_load + i_f * div1
    i2_a = i_f * div1
    i0_a = i_f * div0

    v1 = src_a.emf - src_a.z1 * i1_a
    v2 = -src_a.z1 * i2_a
    v0 = -src_a.z0 * i0_a

    return NetworkSolution(
        i_seq_fault=(i_f, i_f, i_f),
        v_relay_abc=seq_to_abc(v1, v2, v0),
        i_relay_abc=seq_to_abc(i1_a, i2_a, i0_a),
        i_relay_residual=3 * i0_a,
    )


def samples_per_cycle(sample_rate_hz: float, f_hz: float) -> int:
    """Integer samples per fundamental cycle; BadSampling if not integral."""
    ratio = sample_rate_hz / f_hz
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9:
        raise BadSampling(
            f"sample rate {sample_rate_hz} Hz is not an integer multiple of {f_hz} Hz")
    return n


def synthesize_waveforms(pre: NetworkSolution, post: NetworkSolution,
                         scenario: FaultScenario, sample_rate_hz: float,
                         duration_s: float, *, f_hz: float,
                         t0_s: float = 0.0,
                         dc_tau_s: Optional[float] = None) -> WaveformSet:
    """Sample the relay-terminal record around the fault inception.

    Each sample at time t is Re(P * exp(j*2*pi*f_hz*t)), taking P from
    the pre-fault solution for t < inception and from the post-fault
    solution afterwards.  If dc_tau_s is given, an exponential offset
    with that time constant is added to the current channels so they are
    continuous at the inception instant (the default phasor-only mode
    keeps the record exactly sinusoidal piecewise).

    Raises
    ------
    BadSampling
        If sample_rate_hz is not an integer multiple of f_hz.
    """
    samples_per_cycle(sample_rate_hz, f_hz)  # validation only
    n = round(duration_s * sample_rate_hz)
    t = t0_s + np.arange(n) / sample_rate_hz
    rot = np.exp(2j * math.pi * f_hz * t)
    after = t >= scenario.inception_s - 1e-12

    def channel(p_pre: complex, p_post: complex) -> np.ndarray:
        return np.where(after, (p_post * rot).real, (p_pre * rot).real)

    va = channel(pre.v_relay_abc[0], post.v_relay_abc[0])
    ia = channel(pre.i_relay_abc[0], post.i_relay_abc[0])
    ir = channel(pre.i_relay_residual, post.i_relay_residual)

    if dc_tau_s is not None and dc_tau_s > 0 and after.any():
        # Offset amplitude restores current continuity at inception
        tf = scenario.inception_s
        decay = np.where(after, np.exp(-(t - tf) / dc_tau_s), 0.0)
        w = 2j * math.pi * f_hz
        for arr, p_pre, p_post in (
                (ia, pre.i_relay_abc[0], post.i_relay_abc[0]),
                (ir, pre.i_relay_residual, post.i_relay_residual)):
            step = ((p_pre - p_post) * cmath.exp(w * tf)).real
            arr += step * decay

    return WaveformSet(sample_rate_hz=sample_rate_hz, samples_va=va,
                       samples_ia=ia, samples_iresidual=ir, t0_s=t0_s)


def waveforms_to_csv(waves: WaveformSet) -> str:
    """CSV export: header t,va,ia,iresid, full double precision."""
    lines = ["t,va,ia,iresid"]
    t = waves.times()
    for k in range(len(waves)):
        lines.append(f"{float(t[k])!r},{float(waves.samples_va[k])!r},"
                     f"{float(waves.samples_ia[k])!r},{float(waves.samples_iresidual[k])!r}")
    return "\n".join(lines) + "\n"
