"""Ideal-pulse simulation of the state-preparation and effective-coupling sequences.

Pulses are instantaneous rotations ``exp(-i angle/2 n.sigma)`` on S or E, free
evolution is the Ising propagator at coupling J, and the gradient crush removes
every off-diagonal element of the joint density matrix.

Text format, one event per line::

    ROT <S|E> <+x|-x|+y|-y|+z|-z> <angle_rad>
    FREE <duration_s> <J_hz>
    CRUSH
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from . import model, qcore
from .errors import ScheduleError

AXES = ("+x", "-x", "+y", "-y", "+z", "-z")
XY8_PATTERN = ("+x", "+y", "+x", "+y", "+y", "+x", "+y", "+x")
SPACING_TOL = 1e-12


@dataclass(frozen=True)
class Rotation:
    target: str
    axis: str
    angle: float

    def __post_init__(self):
        if self.target not in ("S", "E"):
            raise ScheduleError(f"rotation target must be S or E, got {self.target!r}")
        if self.axis not in AXES:
            raise ScheduleError(f"unknown axis {self.axis!r}")
        if not math.isfinite(self.angle):
            raise ScheduleError("rotation angle must be finite")

    def unitary(self) -> np.ndarray:
        r = qcore.rotation(self.axis, self.angle)
        return np.kron(r, qcore.IDENTITY2) if self.target == "S" else np.kron(qcore.IDENTITY2, r)


@dataclass(frozen=True)
class FreeEvolution:
    duration: float
    J: float

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ScheduleError(f"free-evolution duration must be >= 0, got {self.duration!r}")
        if not (math.isfinite(self.J) and self.J >= 0):
            raise ScheduleError(f"coupling must be >= 0, got {self.J!r}")

    def unitary(self) -> np.ndarray:
        return model.joint_propagator(self.J, self.duration)


@dataclass(frozen=True)
class Crush:
    pass


Event = Union[Rotation, FreeEvolution, Crush]


@dataclass(frozen=True)
class PulseSchedule:
    events: tuple[Event, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for ev in self.events:
            if not isinstance(ev, (Rotation, FreeEvolution, Crush)):
                raise ScheduleError(f"malformed event {ev!r}")

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __add__(self, other: "PulseSchedule") -> "PulseSchedule":
        return PulseSchedule(self.events + other.events)

    @property
    def duration(self) -> float:
        return math.fsum(ev.duration for ev in self.events if isinstance(ev, FreeEvolution))

    @property
    def is_unitary(self) -> bool:
        return not any(isinstance(ev, Crush) for ev in self.events)

    def pulses(self, target: str | None = None) -> list[Rotation]:
        return [ev for ev in self.events if isinstance(ev, Rotation) and (target is None or ev.target == target)]

    def to_text(self) -> str:
        return "".join(format_event(ev) + "\n" for ev in self.events)

    @classmethod
    def from_text(cls, text: str) -> "PulseSchedule":
        return cls(tuple(parse_event(line) for line in text.splitlines() if line.strip()))


def _num(x: float) -> str:
    return format(x, ".17g")


def format_event(ev: Event) -> str:
    if isinstance(ev, Rotation):
        return f"ROT {ev.target} {ev.axis} {_num(ev.angle)}"
    if isinstance(ev, FreeEvolution):
        return f"FREE {_num(ev.duration)} {_num(ev.J)}"
    return "CRUSH"


def parse_event(line: str) -> Event:
    parts = line.split()
    try:
        if parts[0] == "ROT" and len(parts) == 4:
            return Rotation(parts[1], parts[2], float(parts[3]))
        if parts[0] == "FREE" and len(parts) == 3:
            return FreeEvolution(float(parts[1]), float(parts[2]))
        if parts == ["CRUSH"]:
            return Crush()
    except (ValueError, IndexError) as exc:
        raise ScheduleError(f"malformed event line {line!r}") from exc
    raise ScheduleError(f"malformed event line {line!r}")


def crush(x: np.ndarray) -> np.ndarray:
    """Gradient dephasing: keep only the diagonal in the joint product basis."""
    return np.diag(np.diag(x))


def apply_event(x: np.ndarray, ev: Event) -> np.ndarray:
    if isinstance(ev, Crush):
        return crush(x)
    if isinstance(ev, (Rotation, FreeEvolution)):
        u = ev.unitary()
        return u @ x @ u.conj().T
    raise ScheduleError(f"malformed event {ev!r}")


def run_schedule(x, schedule: Iterable[Event]) -> np.ndarray:
    """Fold the events over any 4x4 operator (the maps are linear)."""
    out = np.array(qcore.as_array(x), dtype=complex)
    if out.shape != (4, 4):
        raise qcore.DimensionError("schedules act on 4x4 joint operators")
    for ev in schedule:
        out = apply_event(out, ev)
    return out


def simulate_schedule(rho0, schedule: PulseSchedule) -> qcore.DensityMatrix:
    return qcore.DensityMatrix(run_schedule(rho0, schedule))


def schedule_unitary(schedule: PulseSchedule) -> np.ndarray:
    if not schedule.is_unitary:
        raise ScheduleError("schedule contains a non-unitary crush")
    u = np.eye(4, dtype=complex)
    for ev in schedule:
        u = ev.unitary() @ u
    return u


# --- state preparation ------------------------------------------------------------

def pseudo_pure_schedule(J: float) -> PulseSchedule:
    """Spatial-averaging sequence turning ``Z_S + Z_E`` into ``(Z_S + Z_E + Z_S Z_E)/2``."""
    return PulseSchedule((
        Rotation("S", "+x", math.pi / 3),
        Rotation("E", "+x", math.pi / 4),
        FreeEvolution(1.0 / (2.0 * J), J),
        Rotation("E", "-y", math.pi / 4),
        Crush(),
    ))


def thermal_deviation(polarization: float) -> np.ndarray:
    """High-temperature deviation ``p (Z_S + Z_E) / 4`` with equal polarizations."""
    z = qcore.SIGMA_Z
    return polarization * (np.kron(z, qcore.IDENTITY2) + np.kron(qcore.IDENTITY2, z)) / 4


def pseudo_pure_closed(epsilon: float) -> np.ndarray:
    rho = (1 - epsilon) * np.eye(4, dtype=complex) / 4
    rho[0, 0] += epsilon
    return rho


def prepare_pseudo_pure(epsilon: float, J: float = 215.06) -> qcore.DensityMatrix:
    """``(1 - eps) 1/4 + eps |00><00|`` obtained by running :func:`pseudo_pure_schedule`.

    Only the traceless deviation is propagated (all events are unital), so the
    thermal polarization ``2 eps`` need not describe a physical state by itself.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    dev = run_schedule(thermal_deviation(2.0 * epsilon), pseudo_pure_schedule(J))
    return qcore.DensityMatrix(np.eye(4) / 4 + dev)


def input_schedule(sign: str, theta: float) -> PulseSchedule:
    """(pi/2) about +y (|+>) or -y (|->) on S, then (2 theta)_y on E."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    return PulseSchedule((
        Rotation("S", "+y" if sign == "+" else "-y", math.pi / 2),
        Rotation("E", "+y", 2 * theta),
    ))


def prepare_inputs(sign: str, theta: float) -> qcore.DensityMatrix:
    """``|+-><+-|_S x |theta><theta|_E`` from the eps = 1 pseudo-pure state."""
    return simulate_schedule(prepare_pseudo_pure(1.0), input_schedule(sign, theta))


# --- effective coupling -------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveCouplingPlan:
    J: float
    J_eff: float
    t: float
    n: int = 1

    def __post_init__(self):
        if not (self.J > 0 and 0 <= self.J_eff <= self.J):
            raise ScheduleError("need J > 0 and 0 <= J_eff <= J")
        if self.t < 0 or self.n < 1:
            raise ScheduleError("need t >= 0 and n >= 1")

    @property
    def t_b(self) -> float:
        return (self.J_eff / self.J) * self.t

    @property
    def t_a(self) -> float:
        # t - t_b rather than (1 - J_eff/J) t so that t_a + t_b == t
        return self.t - self.t_b


def xy8_block(spacing: float, J: float, target: str = "E") -> list[Event]:
    """One XY-8 cycle, ``tau/2 - P1 - tau - ... - P8 - tau/2`` (total 8 tau)."""
    events: list[Event] = [FreeEvolution(spacing / 2, J)]
    for k, axis in enumerate(XY8_PATTERN):
        events.append(Rotation(target, axis, math.pi))
        events.append(FreeEvolution(spacing if k < 7 else spacing / 2, J))
    return events


def xy8_schedule(plan: EffectiveCouplingPlan, pulse_spacing: float | None = None) -> PulseSchedule:
    """``n`` repetitions of [XY-8 on E over t_a/n, free evolution over t_b/n]."""
    seg_a = plan.t_a / plan.n
    seg_b = plan.t_b / plan.n
    cycles = 0
    if seg_a > 0:
        spacing = seg_a / 8 if pulse_spacing is None else pulse_spacing
        if not spacing > 0:
            raise ScheduleError("pulse spacing must be positive")
        cycles = round(seg_a / (8 * spacing))
        if cycles < 1 or abs(cycles * 8 * spacing - seg_a) > SPACING_TOL:
            raise ScheduleError(f"pulse spacing {spacing!r} does not divide t_a/(8n) = {seg_a / 8!r}")
    events: list[Event] = []
    for _ in range(plan.n):
        for _ in range(cycles):
            events.extend(xy8_block(spacing, plan.J))
        if seg_b > 0:
            events.append(FreeEvolution(seg_b, plan.J))
    return PulseSchedule(tuple(events))


def direct_evolution(rho0, J: float, t: float) -> qcore.DensityMatrix:
    """Reference: plain Ising evolution at coupling ``J`` (``J = 0`` is the identity)."""
    u = model.joint_propagator(J, t)
    return qcore.DensityMatrix(u @ qcore.as_array(rho0) @ u.conj().T)
