"""Closed-form dynamics of a qubit dephased by a single Ising-coupled spin.

Units: seconds, J in Hz (cycles/s), rates in 1/s, hbar = 1, I_z = sigma_z/2.

Conventions frozen here and used everywhere else:

* coherence ``rho_01`` is multiplied by ``exp(-2 gamma t) * eta(t)``, so the
  total dephasing rate entering the master equation is ``gamma + g(t)``;
* ``d/dt log(eta) = -2 (g + i f)``, i.e. the generator is
  ``-i f [sigma_z, rho] + (gamma + g) (sigma_z rho sigma_z - rho)``;
* ``<sigma_-> = Tr(|0><1| rho) = rho_10`` evolves with ``conj(eta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import DomainError, GridError, SingularityError

SINGULAR_TOL = 1e-9

# The closed form of the dephasing-affected BLP rate in sigma_blp assumes coherence
# decay exp(-gamma t), half the rate used by reduced_state. It is kept as is for
# comparison; trace_distance_rate is the self-consistent version.
SIGMA_GAMMA_NOTE = "sigma_half_rate assumes coherence decay exp(-gamma*t); model uses exp(-2*gamma*t)"


@dataclass(frozen=True)
class ModelParams:
    J: float
    theta: float
    gamma: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        for name in ("J", "theta", "gamma", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.J <= 0:
            raise ValueError("J must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        # |theta> and |theta + pi> differ by a global sign only
        object.__setattr__(self, "theta", float(self.theta) % math.pi)

    @property
    def env_state(self) -> qcore.DensityMatrix:
        return qcore.ket_to_density(qcore.theta_ket(self.theta))


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise GridError("dt must be positive and finite")
        if self.n < 1:
            raise GridError("grid needs at least one sample")

    @classmethod
    def span(cls, t_max: float, dt: float, t0: float = 0.0) -> "TimeGrid":
        """Grid ``t0, t0+dt, ...`` up to ``t_max`` (inclusive within 1e-9 of a step)."""
        n = int(math.floor((t_max - t0) / dt + 1e-9)) + 1
        return cls(t0, dt, n)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def __len__(self):
        return self.n


def _phase(params: ModelParams, t):
    return math.pi * params.J * np.asarray(t, dtype=float)


def joint_propagator(J: float, t: float) -> np.ndarray:
    """``exp(-i 2 pi J I_z^S I_z^E t)`` in the S-first product basis."""
    half = 0.5 * math.pi * J * t
    return np.diag(np.exp(-1j * half * np.array([1.0, -1.0, -1.0, 1.0])))


def eta(params: ModelParams, t):
    """Coherence factor ``exp(-2 gamma t) (cos^2 th e^{-i pi J t} + sin^2 th e^{i pi J t})``."""
    a = _phase(params, t)
    c2, s2 = math.cos(params.theta) ** 2, math.sin(params.theta) ** 2
    val = np.exp(-2 * params.gamma * np.asarray(t, dtype=float)) * (c2 * np.exp(-1j * a) + s2 * np.exp(1j * a))
    return val[()] if np.ndim(val) == 0 else val


def eta_dot(params: ModelParams, t):
    """Analytic time derivative of :func:`eta`."""
    a = _phase(params, t)
    w = math.pi * params.J
    c2, s2 = math.cos(params.theta) ** 2, math.sin(params.theta) ** 2
    decay = np.exp(-2 * params.gamma * np.asarray(t, dtype=float))
    bare = c2 * np.exp(-1j * a) + s2 * np.exp(1j * a)
    bare_dot = 1j * w * (s2 * np.exp(1j * a) - c2 * np.exp(-1j * a))
    val = decay * (bare_dot - 2 * params.gamma * bare)
    return val[()] if np.ndim(val) == 0 else val


def reduced_state_array(rho_s0, params: ModelParams, t: float) -> np.ndarray:
    r = np.array(qcore.as_array(rho_s0), dtype=complex)
    e = complex(eta(params, t))
    r[0, 1] *= e
    r[1, 0] *= e.conjugate()
    return r


def reduced_state(rho_s0, params: ModelParams, t: float) -> qcore.DensityMatrix:
    """Apply the dephasing map at time ``t`` (populations fixed, coherence times eta)."""
    return qcore.DensityMatrix(reduced_state_array(rho_s0, params, t))


def denominator(params: ModelParams, t):
    """``3 + 2 cos(4 th) sin^2(pi J t) + cos(2 pi J t)`` (= 4 |eta|^2 at gamma = 0)."""
    a = _phase(params, t)
    return 3 + 2 * math.cos(4 * params.theta) * np.sin(a) ** 2 + np.cos(2 * a)


def singular_mask(params: ModelParams, t) -> np.ndarray:
    return np.abs(denominator(params, t)) < SINGULAR_TOL


def _coeff(num, den, t):
    sing = np.abs(den) < SINGULAR_TOL
    if np.ndim(t) == 0:
        if sing:
            raise SingularityError(f"master-equation coefficients diverge at t={float(t)!r}")
        return float(num / den)
    out = np.where(sing, np.nan, num / np.where(sing, 1.0, den))
    return out


def f_coeff(params: ModelParams, t):
    """Effective frequency f(t) in 1/s; NaN (arrays) or SingularityError (scalars) at poles."""
    num = 2 * math.pi * params.J * math.cos(2 * params.theta) * np.ones_like(np.asarray(t, dtype=float))
    return _coeff(num, denominator(params, t), t)


def g_coeff(params: ModelParams, t):
    """Environment-induced dephasing rate g(t) in 1/s (can be negative)."""
    a = _phase(params, t)
    num = math.pi * params.J * math.sin(2 * params.theta) ** 2 * np.sin(2 * a)
    return _coeff(num, denominator(params, t), t)


def _sigma_parts(params: ModelParams, t):
    a = _phase(params, t)
    den = denominator(params, t)
    root = np.sqrt(np.clip(den, 0.0, None))
    drive = math.pi * params.J * math.sin(2 * params.theta) ** 2 * np.sin(2 * a)
    return den, root, drive


def _masked(val, den, t):
    sing = np.abs(den) < SINGULAR_TOL
    out = np.where(sing, np.nan, val)
    return float(out) if np.ndim(t) == 0 else out


def sigma_blp(params: ModelParams, t):
    """Closed-form trace-distance rate for the |+>, |-> pair.

    For ``gamma == 0`` this is ``-g(t) sqrt(D(t))``. For ``gamma > 0`` the
    half-rate dephasing expression is returned (see ``SIGMA_GAMMA_NOTE``).
    NaN where D(t) vanishes (the sign of sigma jumps there).
    """
    den, root, drive = _sigma_parts(params, t)
    safe = np.where(root == 0, 1.0, root)
    if params.gamma == 0:
        val = -drive / safe
    else:
        a = _phase(params, t)
        th, gam = params.theta, params.gamma
        t_arr = np.asarray(t, dtype=float)
        num = gam * (math.cos(4 * th) + 3) + 2 * math.sin(2 * th) ** 2 * (
            gam * np.cos(2 * a) + math.pi * params.J * np.sin(2 * a)
        )
        val = -np.exp(-gam * t_arr) * num / (2 * safe)
    return _masked(val, den, t)


def trace_distance(params: ModelParams, t):
    """Trace distance between the evolved |+> and |-> states: ``|eta(t)|``."""
    val = np.abs(eta(params, t))
    return float(val) if np.ndim(t) == 0 else val


def trace_distance_rate(params: ModelParams, t):
    """Analytic d/dt of :func:`trace_distance` under the model's gamma convention.

    Equal to :func:`sigma_blp` when gamma = 0; for gamma > 0 its sign is
    exactly ``-sign(gamma + g)``.
    """
    den, root, drive = _sigma_parts(params, t)
    safe = np.where(root == 0, 1.0, root)
    decay = np.exp(-2 * params.gamma * np.asarray(t, dtype=float))
    val = -decay * (params.gamma * den + drive) / safe
    return _masked(val, den, t)


def theta_threshold(gamma: float, J: float, t):
    """Small-angle Markovianity threshold ``sqrt(gamma csc(2 pi J t) / (2 pi J))``."""
    s = np.sin(2 * math.pi * J * np.asarray(t, dtype=float))
    if np.any(s <= 0):
        raise DomainError("threshold undefined where sin(2 pi J t) <= 0")
    val = np.sqrt(gamma / (s * 2 * math.pi * J))
    return float(val) if np.ndim(t) == 0 else val


def magnetization(rho_s) -> complex:
    """Transverse magnetization ``<sigma_-> = Tr(sigma_- rho)``."""
    r = qcore.as_array(rho_s)
    if r.shape != (2, 2):
        raise qcore.DimensionError("magnetization needs a single-qubit state")
    return qcore.expectation(r, qcore.SIGMA_MINUS)


def magnetization_series(params: ModelParams, times, rho_s0=None) -> np.ndarray:
    """Closed-form ``<sigma_->(t)`` for an initial system state (default |+>)."""
    r = qcore.as_array(rho_s0 if rho_s0 is not None else qcore.ket_to_density(qcore.KET_PLUS))
    return r[1, 0] * np.conj(eta(params, np.asarray(times, dtype=float)))


def dephasing_probability(gamma: float, t: float) -> float:
    """Weight ``p`` of the sigma_z Kraus operator giving coherence decay exp(-2 gamma t)."""
    return 0.5 * (1.0 - math.exp(-2.0 * gamma * t))


_ZS = np.kron(qcore.SIGMA_Z, qcore.IDENTITY2)


def evolve_joint_array(op, params: ModelParams, t: float) -> np.ndarray:
    """Linear joint S-E evolution of any 4x4 operator (unitary Ising step, then S dephasing)."""
    u = joint_propagator(params.J, t)
    x = u @ qcore.as_array(op) @ u.conj().T
    if params.gamma > 0 and t > 0:
        p = dephasing_probability(params.gamma, t)
        x = (1 - p) * x + p * (_ZS @ x @ _ZS)
    return x


def evolve_joint_oracle(rho_se0, params: ModelParams, t: float) -> qcore.DensityMatrix:
    """Brute-force joint evolution; independent of the closed-form map."""
    return qcore.DensityMatrix(evolve_joint_array(rho_se0, params, t))


def initial_joint_state(params: ModelParams, system=None) -> np.ndarray:
    """``rho_S (default |+><+|) x |theta><theta|``."""
    s = qcore.as_array(system if system is not None else qcore.ket_to_density(qcore.KET_PLUS))
    return qcore.tensor(s, params.env_state)
