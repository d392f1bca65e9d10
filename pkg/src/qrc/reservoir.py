"""Spin reservoir: Hamiltonian, input injection loop, time-averaged observables.

The reservoir is N spins under a transverse-field Ising Hamiltonian

    H = (1/2) sum_i h sigma_z_i  +  sum_{i<j} J_ij sigma_x_i sigma_x_j

with couplings drawn once, uniformly from [-J_s/2, +J_s/2]. Potentials
enter one grid point per step through qubit 1, which is overwritten with
the pure state sqrt(1-s)|0> + sqrt(s)|1>, s = V_k / V_max; between
injections the state evolves unitarily for a time ``dt``. All single- and
two-qubit Pauli expectations are read out after every step and averaged
over the K steps.

Units: hbar = 1 and J_s = 1, so energies are in J_s and times in 1/J_s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyPotential, InputOutOfRange, NonRealExpectation, VMaxViolated
from .quantum import UnitaryPropagator, hermitian_eig, pauli_string

ENDPOINT_SLACK = 1e-12

MIXED_AXIS_PAIRS = (("x", "y"), ("y", "z"), ("z", "x"))


@dataclass(frozen=True)
class ReservoirConfig:
    """Reservoir geometry and dynamics parameters.

    ``dt`` is a hyperparameter of this artifact (in units 1/J_s), not a
    value taken from anywhere else; it is exposed so it can be tuned.
    """

    n_qubits: int = 6
    h: float = 10.0
    j_scale: float = 1.0
    dt: float = 10.0
    coupling_seed: int = 1

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("need the input qubit plus at least one reservoir qubit")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (np.isfinite(self.h) and np.isfinite(self.j_scale)):
            raise ValueError("h and j_scale must be finite")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits


def coupling_pairs(n_qubits: int):
    """Ordered (i, j) site pairs with i < j, 1-based."""
    return [(i, j) for i in range(1, n_qubits + 1) for j in range(i + 1, n_qubits + 1)]


def sample_couplings(config: ReservoirConfig) -> np.ndarray:
    """Draw the J_ij, one value per i<j pair in `coupling_pairs` order.

    Uniform on [-j_scale/2, +j_scale/2], reproducible from the seed; the
    same draw is reused for every instance.
    """
    n_pairs = config.n_qubits * (config.n_qubits - 1) // 2
    rng = np.random.default_rng(config.coupling_seed)
    half = config.j_scale / 2.0
    return rng.uniform(-half, half, size=n_pairs)


def build_hamiltonian(config: ReservoirConfig, couplings: np.ndarray) -> np.ndarray:
    """Dense 2^N transverse-field Ising Hamiltonian."""
    n = config.n_qubits
    ham = np.zeros((config.dim, config.dim), dtype=np.complex128)
    for i in range(1, n + 1):
        ham += 0.5 * config.h * pauli_string(n, [(i, "z")])
    for (i, j), j_ij in zip(coupling_pairs(n), couplings):
        ham += j_ij * pauli_string(n, [(i, "x"), (j, "x")])
    return ham


def build_propagator(config: ReservoirConfig, couplings: np.ndarray) -> UnitaryPropagator:
    """exp(-i H dt) for the configured reservoir."""
    w, v = hermitian_eig(build_hamiltonian(config, couplings))
    u = (v * np.exp(-1j * w * config.dt)) @ v.conj().T
    return UnitaryPropagator(matrix=u, dt=config.dt)


def encode_input(s: float) -> np.ndarray:
    """Pure input-qubit state sqrt(1-s)|0> + sqrt(s)|1> as a 2x2 projector."""
    if not -ENDPOINT_SLACK <= s <= 1.0 + ENDPOINT_SLACK:
        raise InputOutOfRange(f"s = {s!r} outside [0, 1]")
    s = min(max(s, 0.0), 1.0)
    psi = np.array([np.sqrt(1.0 - s), np.sqrt(s)], dtype=np.complex128)
    return np.outer(psi, psi.conj())


def reset_state(config: ReservoirConfig) -> np.ndarray:
    """|0,...,0><0,...,0| — the state before each instance is injected."""
    rho = np.zeros((config.dim, config.dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def observable_labels(n_qubits: int):
    """The fixed readout set, as lists of (site, axis) factors.

    Order: single-qubit <sigma_a_i> (sites ascending, axes x,y,z), then
    same-axis pairs <sigma_a_i sigma_a_j> for i<j, then mixed-axis pairs
    <sigma_a_i sigma_b_j> for ordered i != j with (a,b) in
    (x,y), (y,z), (z,x). For N qubits that is 3N + 3*C(N,2) + 6*C(N,2)
    entries (153 for N = 6).
    """
    labels = []
    for i in range(1, n_qubits + 1):
        for axis in "xyz":
            labels.append(((i, axis),))
    for i in range(1, n_qubits + 1):
        for j in range(i + 1, n_qubits + 1):
            for axis in "xyz":
                labels.append(((i, axis), (j, axis)))
    for i in range(1, n_qubits + 1):
        for j in range(1, n_qubits + 1):
            if i == j:
                continue
            for a, b in MIXED_AXIS_PAIRS:
                labels.append(((i, a), (j, b)))
    return labels


def observable_counts(n_qubits: int):
    """(n_single, n_two_same, n_two_mixed) section sizes of the readout set."""
    n_pairs = n_qubits * (n_qubits - 1) // 2
    return 3 * n_qubits, 3 * n_pairs, 6 * n_pairs


@dataclass(frozen=True)
class ObservableCache:
    """Precomputed gather form of every readout Pauli string.

    A Pauli string has exactly one nonzero per column, so
    Tr(rho P) = sum_j rho[j, rows[j]] * vals[j]; ``flat_index`` holds the
    flattened (j, rows[j]) positions for all observables at once.
    """

    n_qubits: int
    labels: tuple
    flat_index: np.ndarray  # (n_obs * dim,) int
    values: np.ndarray  # (n_obs, dim) complex

    @property
    def n_observables(self) -> int:
        return self.values.shape[0]

    def matrices(self) -> list[np.ndarray]:
        """Dense matrices of the cached observables (test/inspection aid)."""
        return [pauli_string(self.n_qubits, list(f)) for f in self.labels]


def build_observable_cache(n_qubits: int) -> ObservableCache:
    labels = observable_labels(n_qubits)
    dim = 2 ** n_qubits
    rows = np.zeros((len(labels), dim), dtype=np.intp)
    vals = np.zeros((len(labels), dim), dtype=np.complex128)
    for k, factors in enumerate(labels):
        mat = pauli_string(n_qubits, list(factors))
        rows[k] = np.argmax(mat != 0, axis=0)
        vals[k] = mat[rows[k], np.arange(dim)]
    flat = (np.arange(dim)[None, :] * dim + rows).ravel()
    return ObservableCache(
        n_qubits=n_qubits, labels=tuple(labels), flat_index=flat, values=vals
    )


@dataclass(frozen=True)
class RawObservables:
    """Time-averaged expectations, split by section (all entries in [-1, 1])."""

    n_qubits: int
    single: np.ndarray
    two_same: np.ndarray
    two_mixed: np.ndarray

    @classmethod
    def from_flat(cls, n_qubits: int, flat: np.ndarray) -> "RawObservables":
        n_s, n_ts, n_tm = observable_counts(n_qubits)
        if flat.shape != (n_s + n_ts + n_tm,):
            raise ValueError(f"expected {n_s + n_ts + n_tm} observables, got {flat.shape}")
        return cls(
            n_qubits=n_qubits,
            single=flat[:n_s].copy(),
            two_same=flat[n_s:n_s + n_ts].copy(),
            two_mixed=flat[n_s + n_ts:].copy(),
        )

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.single, self.two_same, self.two_mixed])


def _expectations_batch(rho: np.ndarray, cache: ObservableCache) -> np.ndarray:
    """All cached expectations for a (B, dim, dim) stack of states."""
    batch, dim = rho.shape[0], rho.shape[1]
    vals = rho.reshape(batch, -1)[:, cache.flat_index].reshape(batch, -1, dim)
    exp = np.einsum("bkj,kj->bk", vals, cache.values)
    residue = float(np.abs(exp.imag).max()) if exp.size else 0.0
    if residue > 1e-10:
        raise NonRealExpectation(f"imaginary residue {residue:.3e} in step expectations")
    return exp.real


def _step_batch(rho: np.ndarray, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One injection + evolution step on a (B, dim, dim) stack.

    Exploits that the injected qubit-1 state is pure: with
    W = U (psi kron I), the new state is W Tr_1(rho) W^dag, costing
    two (dim x dim/2) products instead of two full-dim ones. Every
    reduction stays within one batch member, so results are bit-identical
    for any batch partitioning (the worker-determinism contract).
    """
    batch, dim = rho.shape[0], rho.shape[1]
    half = dim // 2
    rho_rest = np.einsum("bijik->bjk", rho.reshape(batch, 2, half, 2, half))
    amp0 = np.sqrt(1.0 - s)[:, None, None]
    amp1 = np.sqrt(s)[:, None, None]
    w = amp0 * u[:, :half] + amp1 * u[:, half:]
    out = (w @ rho_rest) @ w.conj().swapaxes(1, 2)
    # hygiene: re-Hermitize and renormalize to bound drift over long runs
    out += out.conj().swapaxes(1, 2).copy()
    out *= 0.5
    out /= np.trace(out, axis1=1, axis2=2).real[:, None, None]
    return out


def step(rho: np.ndarray, s: float, prop: UnitaryPropagator) -> np.ndarray:
    """rho -> U (|psi(s)><psi(s)| kron Tr_1 rho) U^dag, with hygiene pass."""
    if not -ENDPOINT_SLACK <= s <= 1.0 + ENDPOINT_SLACK:
        raise InputOutOfRange(f"s = {s!r} outside [0, 1]")
    s = min(max(float(s), 0.0), 1.0)
    rho = np.asarray(rho, dtype=np.complex128)
    return _step_batch(rho[None], np.array([s]), prop.matrix)[0]


def run_batch(
    potentials: np.ndarray,
    v_max: float,
    prop: UnitaryPropagator,
    cache: ObservableCache,
) -> np.ndarray:
    """Drive a batch of instances through the reservoir in lock step.

    ``potentials`` is (B, K); returns (B, n_observables) time averages over
    all K steps. Each instance starts from the reset state, so results are
    independent of how instances are grouped into batches.
    """
    potentials = np.asarray(potentials, dtype=np.float64)
    if potentials.ndim != 2 or potentials.shape[1] == 0:
        raise EmptyPotential("potential vectors must have at least one point")
    if np.any(potentials < 0.0):
        raise VMaxViolated("potential values must be non-negative")
    vmax_seen = float(potentials.max(initial=0.0))
    if vmax_seen > v_max * (1.0 + ENDPOINT_SLACK):
        raise VMaxViolated(f"potential value {vmax_seen} exceeds v_max = {v_max}")
    batch, n_steps = potentials.shape
    dim = prop.dim
    rho = np.zeros((batch, dim, dim), dtype=np.complex128)
    rho[:, 0, 0] = 1.0
    scaled = np.minimum(potentials / v_max, 1.0)
    acc = np.zeros((batch, cache.n_observables))
    for k in range(n_steps):
        rho = _step_batch(rho, scaled[:, k], prop.matrix)
        acc += _expectations_batch(rho, cache)
    return acc / n_steps


def run_instance(
    potential: np.ndarray,
    v_max: float,
    config: ReservoirConfig,
    prop: UnitaryPropagator,
    cache: ObservableCache,
) -> RawObservables:
    """Time-averaged observables for one potential (reset, K steps, mean)."""
    potential = np.asarray(potential, dtype=np.float64)
    if potential.ndim != 1 or potential.size == 0:
        raise EmptyPotential("potential must be a non-empty 1-D vector")
    flat = run_batch(potential[None, :], v_max, prop, cache)[0]
    return RawObservables.from_flat(config.n_qubits, flat)
