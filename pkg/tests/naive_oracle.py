"""Brute-force reference reservoir for tiny spin counts.

Deliberately shares no code with the package: operators are assembled
entry by entry from bit arithmetic, the propagator comes from
scipy.linalg.expm (not an eigendecomposition), and partial traces,
injections and traces are explicit index sums. Used to pin down the
production engine at N = 2 and 3.
"""

import numpy as np
from scipy.linalg import expm

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}


def operator_from_axes(n, axes):
    """Entry-wise tensor product; ``axes`` maps 1-based site -> x|y|z.

    Site 1 is the most significant bit of the basis index.
    """
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for r in range(dim):
        for c in range(dim):
            val = 1.0 + 0.0j
            for site in range(1, n + 1):
                shift = n - site
                rb = (r >> shift) & 1
                cb = (c >> shift) & 1
                val *= _PAULI[axes.get(site, "i")][rb, cb]
                if val == 0:
                    break
            out[r, c] = val
    return out


def hamiltonian(n, h, couplings):
    """(1/2) sum_i h Z_i + sum_{i<j} J_ij X_i X_j, couplings in i<j order."""
    dim = 2 ** n
    ham = np.zeros((dim, dim), dtype=complex)
    for i in range(1, n + 1):
        ham += 0.5 * h * operator_from_axes(n, {i: "z"})
    idx = 0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ham += couplings[idx] * operator_from_axes(n, {i: "x", j: "x"})
            idx += 1
    return ham


def trace_out_first(rho, n):
    half = 2 ** (n - 1)
    out = np.zeros((half, half), dtype=complex)
    for a in range(half):
        for b in range(half):
            out[a, b] = rho[a, b] + rho[half + a, half + b]
    return out


def inject_first(rho_rest, s, n):
    half = 2 ** (n - 1)
    amp = np.array([np.sqrt(1.0 - s), np.sqrt(s)], dtype=complex)
    out = np.zeros((2 * half, 2 * half), dtype=complex)
    for t in range(2):
        for u in range(2):
            for a in range(half):
                for b in range(half):
                    out[t * half + a, u * half + b] = (
                        amp[t] * np.conj(amp[u]) * rho_rest[a, b]
                    )
    return out


def trace_product(rho, obs):
    dim = rho.shape[0]
    total = 0.0 + 0.0j
    for i in range(dim):
        for j in range(dim):
            total += rho[i, j] * obs[j, i]
    return total.real


def observable_set(n):
    """Same readout order the engine documents, re-derived here."""
    obs = []
    for i in range(1, n + 1):
        for axis in "xyz":
            obs.append(operator_from_axes(n, {i: axis}))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for axis in "xyz":
                obs.append(operator_from_axes(n, {i: axis, j: axis}))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            for a, b in (("x", "y"), ("y", "z"), ("z", "x")):
                obs.append(operator_from_axes(n, {i: a, j: b}))
    return obs


def run_reference(potential, v_max, n, h, dt, couplings):
    """Time-averaged observable vector for one potential."""
    dim = 2 ** n
    u = expm(-1j * hamiltonian(n, h, couplings) * dt)
    u_dag = u.conj().T
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    observables = observable_set(n)
    totals = np.zeros(len(observables))
    for value in potential:
        s = value / v_max
        rho = u @ inject_first(trace_out_first(rho, n), s, n) @ u_dag
        for m, obs in enumerate(observables):
            totals[m] += trace_product(rho, obs)
    return totals / len(potential)
