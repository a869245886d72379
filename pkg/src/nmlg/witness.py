"""Temporal inequalities built from measurement-interrupted joint evolution.

The system starts in |+> (or a given ket), the environment in |theta>. Two-time
quantities are evaluated either in closed form or with the brute-force joint
oracle of :mod:`nmlg.model`; both routes are kept so they can be checked against
each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import model, qcore
from .errors import NullEventError, SingularityError
from .model import ModelParams, TimeGrid

NULL_EVENT_TOL = 1e-14
VIOLATION_TOL = 1e-12
BISECT_TOL = 1e-9

LQ_BOUND = 1.0
LG_BOUND = 2.0

_PLUS = qcore.ket_to_density(qcore.KET_PLUS).data
_MINUS = qcore.ket_to_density(qcore.KET_MINUS).data

# observable name -> list of (eigenvalue, system projector)
OBSERVABLES = {
    "sigma_x": [(1.0, _PLUS), (-1.0, _MINUS)],
    "projector": [(1.0, _PLUS), (0.0, _MINUS)],
}


def _lift(p_s: np.ndarray) -> np.ndarray:
    return np.kron(p_s, qcore.IDENTITY2)


# --- closed forms --------------------------------------------------------------

def survival_closed(params: ModelParams, t):
    """``P(+, t | +, 0) = (1 + Re eta(t)) / 2``."""
    return 0.5 * (1.0 + np.real(model.eta(params, t)))


def extended_lg_closed(params: ModelParams, t):
    return np.abs(2 * survival_closed(params, t) - survival_closed(params, 2 * np.asarray(t)))


def h_closed(params: ModelParams, t):
    t = np.asarray(t, dtype=float)
    p1, p2 = survival_closed(params, t), survival_closed(params, 2 * t)
    return p2 - p1**2, p2 + 2 * p1


def standard_lg_closed(params: ModelParams, t):
    """sigma_x correlators with Lueders collapse: C(t2; t1) = exp(-2 gamma dt) cos(pi J dt)."""
    t = np.asarray(t, dtype=float)
    w, g = math.pi * params.J, params.gamma
    return 3 * np.exp(-2 * g * t) * np.cos(w * t) - np.exp(-6 * g * t) * np.cos(3 * w * t)


# --- oracle route ----------------------------------------------------------------

def conditional_prob(zeta, params: ModelParams, t1: float, t0: float) -> float:
    """``P(zeta, t1 | zeta, t0)`` with the system prepared in ``zeta`` at time 0.

    The joint state is evolved to ``t0``, projected onto ``zeta`` on S (Lueders rule,
    environment untouched), renormalised, evolved to ``t1`` and measured again.
    """
    if not 0 <= t0 <= t1:
        raise ValueError("need 0 <= t0 <= t1")
    k = zeta if isinstance(zeta, qcore.Ket) else qcore.Ket(zeta)
    proj_s = qcore.ket_to_density(k).data
    proj = _lift(proj_s)
    rho = model.evolve_joint_array(qcore.tensor(proj_s, params.env_state), params, t0)
    p0 = float(np.trace(proj @ rho).real)
    if p0 < NULL_EVENT_TOL:
        raise NullEventError(f"projection probability {p0:.3e} at t0={t0!r}")
    rho = proj @ rho @ proj / p0
    rho = model.evolve_joint_array(rho, params, t1 - t0)
    return float(np.trace(proj @ rho).real)


def extended_lg(params: ModelParams, t: float, method: str = "closed") -> float:
    """``|2 P(+, t|+, 0) - P(+, 2t|+, 0)|``; the classical Markov bound is 1."""
    if method == "closed":
        return float(extended_lg_closed(params, t))
    p1 = conditional_prob(qcore.KET_PLUS, params, t, 0.0)
    p2 = conditional_prob(qcore.KET_PLUS, params, 2 * t, 0.0)
    return abs(2 * p1 - p2)


def h_inequalities(params: ModelParams, t: float, method: str = "closed") -> tuple[float, float]:
    """Return ``(H1, H2)`` as left-hand sides; violated when H1 < 0 or H2 < 1."""
    if method == "closed":
        h1, h2 = h_closed(params, t)
        return float(h1), float(h2)
    p1 = conditional_prob(qcore.KET_PLUS, params, t, 0.0)
    p2 = conditional_prob(qcore.KET_PLUS, params, 2 * t, 0.0)
    return p2 - p1 * p1, p2 + 2 * p1


def two_time_correlator(
    params: ModelParams,
    t1: float,
    t2: float,
    observable: str = "sigma_x",
    rule: str = "collapse",
) -> float:
    """Two-time correlator ``C(t2; t1)`` of a system observable, prep |+> x |theta>.

    ``rule`` selects how the first measurement enters:

    * ``"collapse"``: sequential projective measurements on S,
      ``sum_ab a b P(a at t1) P(b at t2 | a at t1)``, environment carried through;
    * ``"heisenberg"``: ``Re Tr[Q Lambda_{t2-t1}(Q rho(t1))]`` on the joint space
      (the non-invasive idealisation; equals ``"collapse"`` for +-1 observables);
    * ``"regression"``: collapse, then propagate the reduced state with the
      time-local propagator ``Phi(t2) Phi(t1)^-1`` (environment memory discarded).
    """
    if not 0 <= t1 <= t2:
        raise ValueError("need 0 <= t1 <= t2")
    try:
        spectrum = OBSERVABLES[observable]
    except KeyError:
        raise ValueError(f"unknown observable {observable!r}") from None
    dt = t2 - t1

    if rule == "regression":
        k1 = complex(model.eta(params, t1))
        if abs(k1) < NULL_EVENT_TOL:
            raise SingularityError(f"time-local propagator undefined at t1={t1!r}")
        lam = complex(model.eta(params, t2)) / k1
        rho1 = model.reduced_state_array(_PLUS, params, t1)
        total = 0.0
        for a, pa in spectrum:
            prob_a = float(np.trace(pa @ rho1).real)
            post = pa.astype(complex)
            post[0, 1] *= lam
            post[1, 0] *= lam.conjugate()
            total += sum(a * b * prob_a * float(np.trace(pb @ post).real) for b, pb in spectrum)
        return total

    rho1 = model.evolve_joint_array(model.initial_joint_state(params), params, t1)
    if rule == "heisenberg":
        q = _lift(sum(a * p for a, p in spectrum))
        x = model.evolve_joint_array(q @ rho1, params, dt)
        return float(np.trace(q @ x).real)
    if rule != "collapse":
        raise ValueError(f"unknown correlator rule {rule!r}")
    total = 0.0
    for a, pa in spectrum:
        if a == 0.0:
            continue
        proj_a = _lift(pa)
        x = model.evolve_joint_array(proj_a @ rho1 @ proj_a, params, dt)
        for b, pb in spectrum:
            if b != 0.0:
                total += a * b * float(np.trace(_lift(pb) @ x).real)
    return total


def standard_lg(
    params: ModelParams, t: float, observable: str = "sigma_x", rule: str = "collapse"
) -> float:
    """``C(t;0) + C(2t;t) + C(3t;2t) - C(3t;0)``; classical bound 2."""
    c = lambda a, b: two_time_correlator(params, a, b, observable, rule)  # noqa: E731
    return c(0.0, t) + c(t, 2 * t) + c(2 * t, 3 * t) - c(0.0, 3 * t)


# --- reports -----------------------------------------------------------------------

Interval = tuple[float, float]


def _bisect(margin: Callable[[float], float], lo: float, hi: float) -> float:
    """Sign-change location between ``lo`` and ``hi`` (either order)."""
    lo_in = margin(lo) > VIOLATION_TOL
    while abs(hi - lo) > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if (margin(mid) > VIOLATION_TOL) == lo_in:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def violation_intervals(margin: Callable, times: np.ndarray) -> list[Interval]:
    """Maximal sorted intervals where ``margin(t) > 0``, edges refined by bisection.

    ``margin`` must accept scalars and arrays; grid points define which runs are
    found, bisection locates their ends to ``BISECT_TOL`` seconds.
    """
    times = np.asarray(times, dtype=float)
    flags = np.asarray(margin(times)) > VIOLATION_TOL
    out: list[Interval] = []
    i, n = 0, len(times)
    while i < n:
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flags[j + 1]:
            j += 1
        start = times[0] if i == 0 else _bisect(lambda s: float(margin(s)), times[i - 1], times[i])
        end = times[-1] if j == n - 1 else _bisect(lambda s: float(margin(s)), times[j + 1], times[j])
        out.append((float(start), float(end)))
        i = j + 1
    return out


def union_intervals(*groups: list[Interval]) -> list[Interval]:
    merged: list[list[float]] = []
    for a, b in sorted(iv for g in groups for iv in g):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def measure(intervals: list[Interval]) -> float:
    return float(sum(b - a for a, b in intervals))


def contains(outer: list[Interval], inner: list[Interval], slack: float = BISECT_TOL) -> bool:
    return all(any(a - slack <= c and d <= b + slack for a, b in outer) for c, d in inner)


@dataclass
class WitnessReport:
    grid: TimeGrid
    lq: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    lg: np.ndarray | None
    intervals: dict[str, list[Interval]] = field(default_factory=dict)

    @property
    def flags(self) -> dict[str, np.ndarray]:
        out = {
            "lq": self.lq - LQ_BOUND > VIOLATION_TOL,
            "h1": -self.h1 > VIOLATION_TOL,
            "h2": 1.0 - self.h2 > VIOLATION_TOL,
        }
        if self.lg is not None:
            out["lg"] = self.lg - LG_BOUND > VIOLATION_TOL
        return out


def witness_report(params: ModelParams, grid: TimeGrid, include_lg: bool = True) -> WitnessReport:
    times = grid.times
    margins = {
        "lq": lambda t: extended_lg_closed(params, t) - LQ_BOUND,
        "h1": lambda t: -h_closed(params, t)[0],
        "h2": lambda t: 1.0 - h_closed(params, t)[1],
    }
    if include_lg:
        margins["lg"] = lambda t: standard_lg_closed(params, t) - LG_BOUND
    h1, h2 = h_closed(params, times)
    return WitnessReport(
        grid=grid,
        lq=extended_lg_closed(params, times),
        h1=h1,
        h2=h2,
        lg=standard_lg_closed(params, times) if include_lg else None,
        intervals={k: violation_intervals(m, times) for k, m in margins.items()},
    )
