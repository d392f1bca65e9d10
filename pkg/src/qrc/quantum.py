"""Dense complex linear algebra and quantum-state primitives.

Conventions used throughout the package:

* Computational basis with qubit 1 as the *most significant* tensor
  factor, i.e. basis index ``b = b_1 b_2 ... b_N`` in binary.
* ``sigma_z |0> = |0>``, ``sigma_z |1> = -|1>``.
* States are density matrices: Hermitian, positive-semidefinite,
  unit-trace ``2^N x 2^N`` complex arrays.

Everything is double precision; the tolerances below are contracts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionTooSmall,
    DuplicateSite,
    NonRealExpectation,
    NotHermitian,
    SiteOutOfRange,
)

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
IMAG_TOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)

PAULI = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


@dataclass(frozen=True)
class UnitaryPropagator:
    """Unitary time-step operator exp(-i H dt) and the step it realizes."""

    matrix: np.ndarray
    dt: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def hermiticity_defect(m: np.ndarray) -> float:
    """Max-norm distance from the Hermitian cone, ``max|m - m^dag|``."""
    return float(np.abs(m - m.conj().T).max())


def hermitian_eig(h: np.ndarray, tol: float = HERMITICITY_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    ``h = V diag(w) V^dag``. Raises :class:`NotHermitian` if the input is
    farther than ``tol`` from Hermitian in max norm.
    """
    h = np.asarray(h, dtype=np.complex128)
    defect = hermiticity_defect(h)
    if defect > tol:
        raise NotHermitian(f"max|h - h^dag| = {defect:.3e} exceeds {tol:.1e}")
    w, v = np.linalg.eigh(h)
    return w, v


def propagator(h: np.ndarray, dt: float) -> UnitaryPropagator:
    """Build exp(-i h dt) through the spectral decomposition of h."""
    w, v = hermitian_eig(h)
    u = (v * np.exp(-1j * w * dt)) @ v.conj().T
    return UnitaryPropagator(matrix=u, dt=float(dt))


def partial_trace_first_qubit(rho: np.ndarray) -> np.ndarray:
    """Trace out the first (most significant) qubit of a 2^N-dim state."""
    rho = np.asarray(rho)
    dim = rho.shape[0]
    if dim < 4:
        raise DimensionTooSmall("partial trace needs at least two qubits")
    half = dim // 2
    return rho.reshape(2, half, 2, half).trace(axis1=0, axis2=2)


def expectation(rho: np.ndarray, obs: np.ndarray, imag_tol: float = IMAG_TOL) -> float:
    """Tr(rho * obs) as a real number.

    The imaginary residue (rounding noise for Hermitian inputs) is
    discarded when below ``imag_tol`` and is an error otherwise.
    """
    rho = np.asarray(rho)
    obs = np.asarray(obs)
    if rho.shape != obs.shape:
        raise ValueError(f"shape mismatch: state {rho.shape} vs observable {obs.shape}")
    value = complex(np.sum(rho * obs.T))
    if abs(value.imag) > imag_tol:
        raise NonRealExpectation(f"imaginary residue {value.imag:.3e} exceeds {imag_tol:.1e}")
    return value.real


def pauli_string(n_qubits: int, factors) -> np.ndarray:
    """Tensor product of Pauli matrices with identities on unlisted sites.

    ``factors`` is a list of ``(site, axis)`` pairs with 1-based site
    indices (site 1 = most significant factor) and axis in ``x|y|z``.
    """
    mats = [IDENTITY_2] * n_qubits
    seen = set()
    for site, axis in factors:
        if not 1 <= site <= n_qubits:
            raise SiteOutOfRange(f"site {site} outside [1, {n_qubits}]")
        if site in seen:
            raise DuplicateSite(f"site {site} listed twice")
        seen.add(site)
        mats[site - 1] = PAULI[axis]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2); equals 1 for pure states."""
    return float(np.real(np.sum(rho * rho.T)))


def assert_density_matrix(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
) -> None:
    """Check the density-matrix invariants; raise on violation.

    Hermiticity within ``herm_tol`` (max norm), unit trace within
    ``trace_tol``, smallest eigenvalue above ``-psd_tol``.
    """
    defect = hermiticity_defect(rho)
    if defect > herm_tol:
        raise NotHermitian(f"density matrix defect {defect:.3e} exceeds {herm_tol:.1e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace {tr} differs from 1 by more than {trace_tol:.1e}")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -psd_tol:
        raise ValueError(f"smallest eigenvalue {lo:.3e} below -{psd_tol:.1e}")
