"""Master-equation tomography.

Two independent routes recover the time-local coefficients:

1. from the transverse magnetization, ``d/dt log <sigma_->``;
2. from sampled process matrices ``M(t)`` in the normalised Pauli basis,
   ``K(t) = dM/dt M^-1``.

``g_hat`` is the *total* dephasing rate seen in the data, i.e. ``gamma + g(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import model, qcore
from .errors import DimensionError, EmptyResultError, GridError
from .model import ModelParams, TimeGrid

SINGULAR_REL = 1e-6
DET_TOL = 1e-12

# d/dt log<sigma_-> = -2 g_total + 2 i f under the model conventions. Calibrated
# against model.f_coeff / g_coeff on a synthetic theta = pi/6 trace (see tests).
F_SIGN = 1.0
G_SIGN = -1.0


@dataclass(frozen=True, eq=False)
class MagnetizationTrace:
    grid: TimeGrid
    values: np.ndarray
    source: str = "simulated"
    params: ModelParams | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.shape[0] != self.grid.n:
            raise GridError(f"trace has {vals.shape[0]} values for a grid of {self.grid.n}")
        if np.any(np.isnan(vals)):
            raise GridError("trace contains NaN")
        if self.source not in ("simulated", "ingested"):
            raise ValueError(f"unknown trace source {self.source!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def simulate_trace(params: ModelParams, grid: TimeGrid, prep: str = "plus") -> MagnetizationTrace:
    """Closed-form ``epsilon * <sigma_->(t)`` for S prepared in |+> or |->."""
    ket = {"plus": qcore.KET_PLUS, "minus": qcore.KET_MINUS}[prep]
    vals = params.epsilon * model.magnetization_series(params, grid.times, qcore.ket_to_density(ket))
    return MagnetizationTrace(grid, vals, "simulated", params)


@dataclass(frozen=True)
class GeneratorSample:
    t: float
    f_hat: float
    g_hat: float
    K: np.ndarray
    singular: bool


@dataclass(eq=False)
class GeneratorSeries:
    """Columnar store of :class:`GeneratorSample` records on a common grid."""

    grid: TimeGrid
    f_hat: np.ndarray
    g_hat: np.ndarray
    singular: np.ndarray
    K: np.ndarray = field(repr=False)

    def __len__(self):
        return self.grid.n

    def __iter__(self) -> Iterator[GeneratorSample]:
        for i, t in enumerate(self.grid.times):
            yield GeneratorSample(float(t), float(self.f_hat[i]), float(self.g_hat[i]), self.K[i], bool(self.singular[i]))

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def differentiate(trace: MagnetizationTrace) -> np.ndarray:
    """Second-order finite differences (central inside, one-sided at the ends)."""
    if trace.grid.n < 3:
        raise GridError("need at least 3 samples to differentiate")
    return np.gradient(trace.values, trace.grid.dt, edge_order=2)


def k_from_rates(f, g_total) -> np.ndarray:
    """Pauli-basis generator with only the (sigma_x, sigma_y) block populated."""
    f = np.atleast_1d(np.asarray(f, dtype=float))
    g = np.atleast_1d(np.asarray(g_total, dtype=float))
    k = np.zeros((f.shape[0], 4, 4))
    k[:, 1, 1] = k[:, 2, 2] = -2 * g
    k[:, 1, 2] = -2 * f
    k[:, 2, 1] = 2 * f
    return k


def infer_fg(trace: MagnetizationTrace, threshold: float = SINGULAR_REL) -> GeneratorSeries:
    """Coefficient tomography from the log-derivative of the magnetization.

    Samples with ``|<sigma_->| < threshold * max|<sigma_->|`` are flagged singular
    and carry NaN coefficients.
    """
    m = trace.values
    scale = float(np.max(np.abs(m)))
    singular = np.abs(m) < threshold * scale
    if scale == 0.0 or np.all(singular):
        raise EmptyResultError("every sample is below the singularity threshold")
    dm = differentiate(trace)
    ratio = np.where(singular, np.nan, dm / np.where(singular, 1.0, m))
    f_hat = F_SIGN * 0.5 * ratio.imag
    g_hat = G_SIGN * 0.5 * ratio.real
    return GeneratorSeries(trace.grid, f_hat, g_hat, singular, k_from_rates(f_hat, g_hat))


def map_matrix(samples: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Process matrix ``M_ij = Tr[chi_i Phi(chi_j)]`` from (input, output) pairs.

    Each input must be one of the normalised Pauli basis elements; all four are
    required.
    """
    basis = qcore.pauli_basis(2)
    m = np.zeros((4, 4))
    seen = set()
    for chi_in, out in samples:
        chi_in, out = qcore.as_array(chi_in), qcore.as_array(out)
        if chi_in.shape != (2, 2) or out.shape != (2, 2):
            raise DimensionError("channel samples must be 2x2")
        j = next((k for k, b in enumerate(basis) if np.allclose(chi_in, b, atol=1e-12)), None)
        if j is None:
            raise ValueError("channel input is not a normalised Pauli basis element")
        seen.add(j)
        for i, b in enumerate(basis):
            m[i, j] = np.trace(b @ out).real
    if seen != {0, 1, 2, 3}:
        raise ValueError(f"incomplete basis coverage: got {sorted(seen)}")
    return m


def channel_samples(params: ModelParams, t: float, route: str = "closed"):
    """Basis inputs and their images under the reduced map at time ``t``.

    ``route="oracle"`` traces the environment out of the brute-force joint evolution.
    """
    out = []
    for chi in qcore.pauli_basis(2):
        if route == "closed":
            img = model.reduced_state_array(chi, params, t)
        else:
            joint = model.evolve_joint_array(np.kron(chi, params.env_state.data), params, t)
            img = qcore.partial_trace_env_array(joint)
        out.append((chi, img))
    return out


def map_series(params: ModelParams, grid: TimeGrid, route: str = "closed") -> np.ndarray:
    return np.array([map_matrix(channel_samples(params, t, route)) for t in grid.times])


def generator_matrix(m_series: np.ndarray, grid: TimeGrid) -> GeneratorSeries:
    """``K(t) = dM/dt M^-1`` sample by sample; non-invertible M marks the sample singular."""
    m_series = np.asarray(m_series, dtype=float)
    if m_series.shape != (grid.n, 4, 4):
        raise GridError(f"expected {grid.n} 4x4 matrices, got {m_series.shape}")
    if grid.n < 3:
        raise GridError("need at least 3 samples to differentiate")
    dm = np.gradient(m_series, grid.dt, axis=0, edge_order=2)
    k = np.full_like(m_series, np.nan)
    singular = np.zeros(grid.n, dtype=bool)
    for i in range(grid.n):
        if abs(np.linalg.det(m_series[i])) <= DET_TOL:
            singular[i] = True
            continue
        k[i] = np.linalg.solve(m_series[i].T, dm[i].T).T
    f_hat = 0.25 * (k[:, 2, 1] - k[:, 1, 2])
    g_hat = -0.25 * (k[:, 1, 1] + k[:, 2, 2])
    return GeneratorSeries(grid, f_hat, g_hat, singular, k)


def _cumtrapz(y: np.ndarray, dx: float) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * dx)
    return out


def reconstruct(series: GeneratorSeries, trace: MagnetizationTrace) -> np.ndarray:
    """Integrate ``d<sigma_->/dt = (-2 g_hat + 2 i f_hat) <sigma_->`` run by run.

    Each contiguous run of non-singular samples is anchored at its first measured
    value; singular samples are NaN in the result.
    """
    _check_aligned(series, trace)
    rate = -2.0 * series.g_hat + 2j * series.f_hat
    out = np.full(trace.grid.n, np.nan + 0j)
    ok = ~series.singular & np.isfinite(rate)
    i, n = 0, trace.grid.n
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and ok[j + 1]:
            j += 1
        out[i : j + 1] = trace.values[i] * np.exp(_cumtrapz(rate[i : j + 1], trace.grid.dt))
        i = j + 1
    return out


def residual(series: GeneratorSeries, trace: MagnetizationTrace) -> float:
    """Max deviation between the trace and its reconstruction, relative to max|trace|."""
    rec = reconstruct(series, trace)
    ok = np.isfinite(rec)
    if not np.any(ok):
        raise EmptyResultError("no usable samples to compare")
    scale = float(np.max(np.abs(trace.values[ok])))
    return float(np.max(np.abs(rec[ok] - trace.values[ok])) / scale)


def _check_aligned(series: GeneratorSeries, trace: MagnetizationTrace) -> None:
    if series.grid.n == 0 or trace.grid.n == 0:
        raise GridError("empty overlap")
    if series.grid.n != trace.grid.n or not np.allclose(series.times, trace.times, atol=1e-12, rtol=0):
        raise GridError("generator series and trace are not on the same grid")


def convergence_order(err_coarse: float, err_fine: float, ratio: float = 2.0) -> float:
    return math.log(err_coarse / err_fine) / math.log(ratio)
