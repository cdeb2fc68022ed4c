"""Single-cell device physics: linear ion drift with hard state bounds.

The device is a two-terminal resistor whose doped-region length ``w`` moves
under current flow.  Resistance interpolates linearly between ``r_on``
(fully doped, ``w == d``) and ``r_off`` (undoped, ``w == 0``)::

    R(w) = r_on * w/d + r_off * (1 - w/d)
    dw/dt = mu_v * (r_on / d) * i(t),      i = v / R(w)

Integration is explicit forward Euler with caller-chosen ``dt``; the state
is clipped to [0, d] instead of applying a window function.  Current driven
into the doped terminal grows ``w`` and lowers the resistance; the reverse
polarity shrinks it.

Parameters default to the normalized set used throughout the test suite
(d=1, r_on=1, r_off=160, mu_v=1.6: a unit voltage pulse of unit duration
moves ``w`` by about 1% from the high-resistance state).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, IO

import numpy as np


class Memristor:
    """Mutable device state machine; single writer per instance."""

    def __init__(
        self,
        w: float = 0.0,
        d: float = 1.0,
        r_on: float = 1.0,
        r_off: float = 160.0,
        mu_v: float = 1.6,
    ):
        if d <= 0:
            raise ValueError(f"device length must be positive, got {d}")
        if r_on <= 0 or r_off <= r_on:
            raise ValueError(f"need 0 < r_on < r_off, got r_on={r_on}, r_off={r_off}")
        if not 0 <= w <= d:
            raise ValueError(f"state w={w} outside [0, {d}]")
        if mu_v <= 0:
            raise ValueError(f"ion mobility must be positive, got {mu_v}")
        self.w = float(w)
        self.d = float(d)
        self.r_on = float(r_on)
        self.r_off = float(r_off)
        self.mu_v = float(mu_v)

    def resistance(self) -> float:
        frac = self.w / self.d
        return self.r_on * frac + self.r_off * (1.0 - frac)

    def conductance(self) -> float:
        return 1.0 / self.resistance()

    def normalized_conductance(self) -> float:
        """Conductance mapped to [0, 1]: 0 at r_off, 1 at r_on."""
        g_on, g_off = 1.0 / self.r_on, 1.0 / self.r_off
        return (self.conductance() - g_off) / (g_on - g_off)

    def state_for_normalized(self, g_norm: float) -> float:
        """Doped length that realizes a normalized conductance (exact inverse)."""
        if not 0.0 <= g_norm <= 1.0:
            raise ValueError(f"normalized conductance {g_norm} outside [0, 1]")
        g_on, g_off = 1.0 / self.r_on, 1.0 / self.r_off
        r = 1.0 / (g_off + g_norm * (g_on - g_off))
        return self.d * (self.r_off - r) / (self.r_off - self.r_on)

    def step(self, v: float, dt: float) -> "Memristor":
        """One forward-Euler update under an applied voltage; clips at the rails."""
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        i = v / self.resistance()
        w = self.w + self.mu_v * (self.r_on / self.d) * i * dt
        self.w = min(max(w, 0.0), self.d)
        return self


@dataclass(frozen=True)
class IvTrace:
    """Time series of (t, v, i, w) samples from one simulated drive."""

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.t)
        if not (len(self.v) == len(self.i) == len(self.w) == n):
            raise ValueError("trace columns must have equal length")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    def write_csv(self, destination: str | IO[str]) -> None:
        """Write ``t,v,i,w`` rows (header included)."""
        close = False
        if isinstance(destination, str):
            destination = open(destination, "w")
            close = True
        try:
            destination.write("t,v,i,w\n")
            for row in zip(self.t, self.v, self.i, self.w):
                destination.write(",".join(repr(float(c)) for c in row) + "\n")
        finally:
            if close:
                destination.close()


def simulate_iv(
    device: Memristor,
    waveform: Callable[[float], float],
    dt: float,
    steps: int,
) -> IvTrace:
    """Drive the device with ``waveform(t)`` and record one sample per step.

    Each sample is taken before the state update, so ``i == v / R(w)`` holds
    exactly at every recorded instant; in particular every sample with
    ``v == 0`` has ``i == 0`` (the pinched-hysteresis signature).
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    t = np.empty(steps)
    v = np.empty(steps)
    i = np.empty(steps)
    w = np.empty(steps)
    for s in range(steps):
        t[s] = s * dt
        volts = waveform(t[s])
        v[s] = volts
        i[s] = volts / device.resistance()
        w[s] = device.w
        device.step(volts, dt)
    return IvTrace(t, v, i, w)


@dataclass(frozen=True)
class ProgramResult:
    """Outcome of a write-verify programming run."""

    achieved: float
    pulses: int
    converged: bool


def program_conductance(
    target: float,
    *,
    device: Memristor | None = None,
    tolerance: float = 2.0 ** -8,
    max_pulses: int = 1000,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    pulse_voltage: float = 1.0,
    step_jitter: float = 0.5,
) -> ProgramResult:
    """Tune a device to a normalized conductance by pulse-read-compare cycles.

    Each write pulse aims to move the conductance by roughly ``tolerance``
    toward the target, with a uniformly jittered per-pulse step size standing
    in for write variability.  The pulse duration is derived from the device
    model at the current state and applied through :meth:`Memristor.step`,
    then the device is read back; the polarity reverses whenever the read
    lands on the far side of the target.  Deterministic for a fixed seed.

    Reaching an 8-bit tolerance from the far rail takes a few hundred pulses,
    which is the cost that makes per-cell precision expensive and motivates
    slicing operands across many cells.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target {target} outside [0, 1]")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive (a stochastic write cannot hit an exact point)")
    if max_pulses < 0:
        raise ValueError(f"max_pulses must be >= 0, got {max_pulses}")
    if not 0.0 <= step_jitter < 1.0:
        raise ValueError(f"step_jitter must be in [0, 1), got {step_jitter}")
    if pulse_voltage <= 0:
        raise ValueError(f"pulse_voltage must be positive, got {pulse_voltage}")
    if device is None:
        device = Memristor()
    if rng is None:
        rng = np.random.default_rng(seed)

    achieved = device.normalized_conductance()
    pulses = 0
    while abs(achieved - target) > tolerance and pulses < max_pulses:
        move = tolerance * (1.0 + step_jitter * rng.uniform(-1.0, 1.0))
        direction = 1.0 if target > achieved else -1.0
        wanted = min(max(achieved + direction * move, 0.0), 1.0)
        dw = device.state_for_normalized(wanted) - device.w
        if dw == 0.0:
            pulses += 1
            continue
        v = pulse_voltage if dw > 0 else -pulse_voltage
        i = v / device.resistance()
        dt = dw / (device.mu_v * (device.r_on / device.d) * i)
        device.step(v, dt)
        achieved = device.normalized_conductance()
        pulses += 1
    return ProgramResult(achieved, pulses, abs(achieved - target) <= tolerance)
