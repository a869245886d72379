"""Dense 2- and 4-dimensional complex linear algebra for qubit states.

Ordering convention for the joint space is system first: ``|s e>`` with index
``2*s + e``. The lowering operator is ``SIGMA_MINUS = |0><1|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DimensionError, NormalizationError, StateError, UndefinedError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
NORM_TOL = 1e-12
JACOBI_TOL = 1e-13

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |0><1|, so <sigma_-> = Tr(sigma_- rho) = rho_10
SIGMA_MINUS = (SIGMA_X + 1j * SIGMA_Y) / 2
PAULIS = (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z)

_SQRT2 = math.sqrt(2.0)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


def as_array(m) -> np.ndarray:
    """Return the underlying complex array of a matrix-like value."""
    if isinstance(m, (DensityMatrix, Ket)):
        return m.data
    return np.asarray(m, dtype=complex)


def _check_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise DimensionError(f"expected a 2x2 or 4x4 matrix, got shape {a.shape}")
    return a.shape[0]


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit-norm state vector of dimension 2 or 4."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data).reshape(-1)
        if arr.shape[0] not in (2, 4):
            raise DimensionError(f"ket dimension must be 2 or 4, got {arr.shape[0]}")
        norm = math.sqrt(float(np.vdot(arr, arr).real))
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"ket norm is {norm!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix (dimension 2 or 4)."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data)
        _check_square(arr)
        check_density(arr)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def check_density(rho) -> None:
    """Raise :class:`StateError` unless ``rho`` satisfies the density-matrix invariants."""
    a = as_array(rho)
    _check_square(a)
    herm = float(np.max(np.abs(a - a.conj().T)))
    if herm > HERMITIAN_TOL:
        raise StateError(f"not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(a)
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateError(f"trace is {tr!r}, expected 1")
    lam = eigvalsh(a)
    if lam[0] < POSITIVITY_TOL:
        raise StateError(f"negative eigenvalue {lam[0]:.3e}")


def ket(*amplitudes) -> Ket:
    return Ket(np.array(amplitudes, dtype=complex))


KET0 = ket(1, 0)
KET1 = ket(0, 1)
KET_PLUS = ket(1 / _SQRT2, 1 / _SQRT2)
KET_MINUS = ket(1 / _SQRT2, -1 / _SQRT2)


def theta_ket(theta: float) -> Ket:
    """``cos(theta)|0> + sin(theta)|1>``."""
    return ket(math.cos(theta), math.sin(theta))


def ket_to_density(k: Ket) -> DensityMatrix:
    if not isinstance(k, Ket):
        k = Ket(k)
    v = k.data
    return DensityMatrix(np.outer(v, v.conj()))


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two single-qubit operators, first factor = system."""
    a, b = as_array(a), as_array(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionError(f"tensor expects two 2x2 factors, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace_env(rho_se) -> DensityMatrix:
    """Trace out the second (environment) qubit of a 4x4 joint state."""
    return DensityMatrix(partial_trace_env_array(rho_se))


def partial_trace_env_array(rho_se) -> np.ndarray:
    """Unchecked partial trace; linear, so it also accepts non-states."""
    a = as_array(rho_se)
    if a.shape != (4, 4):
        raise DimensionError(f"partial trace expects a 4x4 matrix, got {a.shape}")
    return np.einsum("ajbj->ab", a.reshape(2, 2, 2, 2))


def _eig2(a: np.ndarray) -> np.ndarray:
    p, d = a[0, 0].real, a[1, 1].real
    b = abs(a[0, 1])
    mid = 0.5 * (p + d)
    rad = math.hypot(0.5 * (p - d), b)
    return np.array([mid - rad, mid + rad])


def _jacobi_hermitian(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 50) -> np.ndarray:
    """Cyclic complex Jacobi diagonalisation of a small Hermitian matrix."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    scale = max(float(np.max(np.abs(a))), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(abs(a[i, j]) ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(tau * tau + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                v = np.eye(n, dtype=complex)
                # diag(1, conj(phase)) followed by a real Givens rotation in (p, q)
                v[p, p] = c
                v[p, q] = s
                v[q, p] = -s * phase.conjugate()
                v[q, q] = c * phase.conjugate()
                a = v.conj().T @ a @ v
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a).real)


def eigvalsh(a) -> np.ndarray:
    """Ascending eigenvalues of a 2x2 (closed form) or 4x4 (Jacobi) Hermitian matrix."""
    arr = as_array(a)
    dim = _check_square(arr)
    if dim == 2:
        return _eig2(arr)
    return _jacobi_hermitian(arr)


def trace_norm(a) -> float:
    """Sum of singular values."""
    arr = as_array(a)
    _check_square(arr)
    if np.max(np.abs(arr - arr.conj().T)) <= 1e-14 * max(1.0, float(np.max(np.abs(arr)))):
        return float(np.sum(np.abs(eigvalsh((arr + arr.conj().T) / 2))))
    lam = eigvalsh(arr.conj().T @ arr)
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))))


def fidelity(rho0, rho1) -> float:
    """NMR-style fidelity ``|Tr(r0 r1)| / sqrt(Tr(r0^2) Tr(r1^2))``."""
    a, b = as_array(rho0), as_array(rho1)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    # for Hermitian inputs Tr(a b) = sum a_ij conj(b_ij); swapping a, b only conjugates it
    overlap = abs(np.sum(a * b.conj()))
    pa = float(np.sum(np.abs(a) ** 2))
    pb = float(np.sum(np.abs(b) ** 2))
    if pa == 0.0 or pb == 0.0:
        raise UndefinedError("fidelity undefined for a zero matrix")
    return float(overlap / math.sqrt(pa * pb))


def pauli_basis(dim: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) Pauli basis: sigma_i/sqrt2, or tensor products for dim 4."""
    single = [p / _SQRT2 for p in PAULIS]
    if dim == 2:
        return single
    if dim == 4:
        return [np.kron(a, b) for a, b in product(single, single)]
    raise DimensionError(f"no Pauli basis for dimension {dim}")


def pauli_decompose(m) -> np.ndarray:
    arr = as_array(m)
    dim = _check_square(arr)
    return np.array([np.trace(b.conj().T @ arr) for b in pauli_basis(dim)])


def pauli_reconstruct(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    dim = {4: 2, 16: 4}.get(c.shape[0])
    if dim is None:
        raise DimensionError(f"expected 4 or 16 coefficients, got {c.shape[0]}")
    return sum(ci * b for ci, b in zip(c, pauli_basis(dim)))


def expectation(rho, op) -> complex:
    """``Tr(op rho)``."""
    r, o = as_array(rho), as_array(op)
    if r.shape != o.shape:
        raise DimensionError(f"shape mismatch {r.shape} vs {o.shape}")
    return complex(np.trace(o @ r))


def apply_kraus(rho, kraus) -> np.ndarray:
    r = as_array(rho)
    return sum(k @ r @ k.conj().T for k in kraus)


def rotation(axis: str, angle: float) -> np.ndarray:
    """Single-qubit rotation ``exp(-i angle/2 n.sigma)`` about ``+x, -x, +y, -y, +z, -z``."""
    sign = -1.0 if axis.startswith("-") else 1.0
    pauli = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}.get(axis.lstrip("+-"))
    if pauli is None or len(axis.lstrip("+-")) != 1 or len(axis) > 2:
        raise ValueError(f"unknown rotation axis {axis!r}")
    half = 0.5 * sign * angle
    return math.cos(half) * IDENTITY2 - 1j * math.sin(half) * pauli
