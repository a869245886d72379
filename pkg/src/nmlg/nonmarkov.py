"""Divisibility and trace-distance (BLP) witnesses of non-Markovian dephasing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import model, qcore
from .errors import GridError
from .model import ModelParams, TimeGrid
from .witness import Interval, violation_intervals

SIGN_TOL = 1e-9


@dataclass
class NMReport:
    grid: TimeGrid
    g: np.ndarray
    total_rate: np.ndarray
    sigma: np.ndarray
    sigma_half_rate: np.ndarray
    nm_intervals: list[Interval]
    singular_times: list[float] = field(default_factory=list)
    witnesses_agree: bool = True
    blp_measure: float = 0.0
    note: str = ""

    @property
    def verdict(self) -> str:
        return "non-divisible" if self.nm_intervals else "divisible"

    def summary(self) -> str:
        return (
            f"verdict={self.verdict} intervals={len(self.nm_intervals)} "
            f"singular_points={len(self.singular_times)} "
            f"witnesses_agree={str(self.witnesses_agree).lower()} "
            f"blp_measure={self.blp_measure:.17g}"
        )


def total_rate(params: ModelParams, t):
    return params.gamma + model.g_coeff(params, t)


def singular_times(params: ModelParams, t_start: float, t_end: float) -> list[float]:
    """Poles of f, g (only when sin^2(2 theta) = 1, at pi J t = pi/2 + k pi)."""
    if abs(math.sin(2 * params.theta) ** 2 - 1.0) > 1e-12:
        return []
    k0 = math.ceil(t_start * params.J - 0.5)
    out = []
    k = max(k0, 0)
    while (k + 0.5) / params.J <= t_end:
        out.append((k + 0.5) / params.J)
        k += 1
    return out


def divisibility_witness(params: ModelParams, grid: TimeGrid) -> NMReport:
    """Intervals where the total dephasing rate ``gamma + g(t)`` is negative."""
    times = grid.times
    g = np.atleast_1d(model.g_coeff(params, times))
    rate = params.gamma + g

    def margin(t):
        with np.errstate(invalid="ignore"):
            val = -(params.gamma + model.g_coeff(params, np.asarray(t, dtype=float).reshape(-1)))
        val = np.nan_to_num(val, nan=0.0)
        return val if np.ndim(t) else float(val[0])

    intervals = violation_intervals(margin, times)
    sigma = np.atleast_1d(model.trace_distance_rate(params, times))
    report = NMReport(
        grid=grid,
        g=g,
        total_rate=rate,
        sigma=sigma,
        sigma_half_rate=np.atleast_1d(model.sigma_blp(params, times)),
        nm_intervals=intervals,
        singular_times=singular_times(params, times[0], times[-1]),
        blp_measure=blp_measure(sigma, grid.dt),
        note=model.SIGMA_GAMMA_NOTE if params.gamma > 0 else "",
    )
    report.witnesses_agree = correlate_witnesses(report)
    return report


def correlate_witnesses(report: NMReport) -> bool:
    """True iff ``sign(sigma) == -sign(gamma + g)`` wherever both are defined and nonzero."""
    s, r = report.sigma, report.total_rate
    ok = np.isfinite(s) & np.isfinite(r) & (np.abs(s) > SIGN_TOL) & (np.abs(r) > SIGN_TOL)
    return bool(np.all(np.sign(s[ok]) == -np.sign(r[ok])))


def evolve_pair(
    params: ModelParams,
    grid: TimeGrid,
    pair: Sequence = (qcore.KET_PLUS, qcore.KET_MINUS),
    route: str = "oracle",
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Reduced-state trajectories for two initial system states."""
    trajs = []
    for k in pair:
        rho0 = qcore.ket_to_density(k).data if isinstance(k, qcore.Ket) else qcore.as_array(k)
        if route == "oracle":
            joint0 = qcore.tensor(rho0, params.env_state)
            traj = [qcore.partial_trace_env_array(model.evolve_joint_array(joint0, params, t)) for t in grid.times]
        else:
            traj = [model.reduced_state_array(rho0, params, t) for t in grid.times]
        trajs.append(traj)
    return trajs[0], trajs[1]


def trace_distance(rho1, rho2) -> float:
    return 0.5 * qcore.trace_norm(qcore.as_array(rho1) - qcore.as_array(rho2))


def blp_from_states(traj1: Sequence, traj2: Sequence, dt: float) -> np.ndarray:
    """Finite-difference time derivative of the trace distance between two trajectories.

    Positive entries signal information back-flow. Uses the same second-order
    stencil as the tomography module.
    """
    if len(traj1) != len(traj2):
        raise GridError(f"trajectory lengths differ: {len(traj1)} vs {len(traj2)}")
    if len(traj1) < 3:
        raise GridError("need at least 3 samples")
    d = np.array([trace_distance(a, b) for a, b in zip(traj1, traj2)])
    return np.gradient(d, dt, edge_order=2)


def blp_measure(sigma: np.ndarray, dt: float) -> float:
    """``integral of sigma over sigma > 0`` (trapezoid rule on the positive part)."""
    pos = np.clip(np.nan_to_num(np.asarray(sigma, dtype=float), nan=0.0), 0.0, None)
    if pos.shape[0] < 2:
        return 0.0
    return float(np.sum(0.5 * (pos[1:] + pos[:-1])) * dt)


def markovianity_map(J: float, gamma: float, thetas, times) -> np.ndarray:
    """Boolean ``[theta, t]`` table: True where ``gamma + g(t) >= 0`` (pole -> False)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros((thetas.shape[0], times.shape[0]), dtype=bool)
    for i, th in enumerate(thetas):
        rate = gamma + model.g_coeff(ModelParams(J, th, gamma), times)
        out[i] = np.nan_to_num(rate, nan=-1.0) >= 0
    return out
