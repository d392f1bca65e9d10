"""Acceptance suite: every criterion as a test, one printed line each.

Criterion 6 drives the full default configuration (10000 instances,
1024-point potentials, 6 qubits) through the entire pipeline; expect
roughly half an hour single-threaded. Set QRC_ACCEPTANCE_DIR to a
writable directory to keep (and reuse) the full-run artifacts between
invocations; by default they go to a fresh pytest temp dir.
"""

import json
import os
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import kstest

from qrc.pipeline import RunConfig, cmd_run_all
from qrc.quantum import assert_density_matrix, expectation, pauli_string
from qrc.readout import feature_length, features_single, features_two
from qrc.reservoir import (
    ReservoirConfig,
    build_observable_cache,
    build_propagator,
    reset_state,
    run_instance,
    sample_couplings,
    step,
)
from qrc.speckle import SpeckleParams, generate_speckle, ground_state_energy

from naive_oracle import run_reference
from test_readout import make_raw

CACHE_ENV = "QRC_ACCEPTANCE_DIR"


def report(line):
    print(f"\nACCEPTANCE {line}", flush=True)


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    """Artifacts of one complete default-configuration pipeline run."""
    base = os.environ.get(CACHE_ENV)
    root = Path(base) if base else tmp_path_factory.mktemp("acceptance")
    config = RunConfig()
    config = replace(config, output_dir=str(root / f"run-{config.fingerprint()[:12]}"))
    have_all = all(
        config.report_file(kind).exists() for kind in config.kinds
    ) and config.dataset_manifest().exists()
    if not have_all:
        workers = os.cpu_count() or 1
        cmd_run_all(config, workers=workers)
    reports = {}
    for kind in config.kinds:
        with open(config.report_file(kind)) as fh:
            reports[kind] = json.load(fh)
        if reports[kind]["config_fingerprint"] != config.fingerprint():
            raise RuntimeError(f"stale artifacts in {config.output_dir}; delete and rerun")
    return config, reports


def test_criterion_1_feature_arities():
    raw = make_raw(6, np.random.default_rng(0))
    n_single = features_single(raw).size
    n_two = features_two(raw).size
    assert n_single == 61 == feature_length("single", 6)
    assert n_two == 451 == feature_length("two", 6)
    report(f"1 PASS: feature arities {n_single} and {n_two} for N=6")


def test_criterion_2_quantum_core_properties():
    config = ReservoirConfig()
    couplings = sample_couplings(config)
    prop = build_propagator(config, couplings)
    unit_defect = float(
        np.abs(prop.matrix @ prop.matrix.conj().T - np.eye(config.dim)).max()
    )
    assert unit_defect <= 1e-12

    # density-matrix invariants along a full-length run
    params = SpeckleParams()
    potential = generate_speckle(params, 0)
    v_max = potential.max()
    rho = reset_state(config)
    worst_herm = 0.0
    worst_trace = 0.0
    worst_eig = 0.0
    for value in potential:
        rho = step(rho, value / v_max, prop)
        worst_herm = max(worst_herm, float(np.abs(rho - rho.conj().T).max()))
        worst_trace = max(worst_trace, abs(complex(np.trace(rho)) - 1.0))
        worst_eig = min(worst_eig, float(np.linalg.eigvalsh(rho)[0]))
    assert worst_herm <= 1e-10
    assert worst_trace <= 1e-10
    assert worst_eig >= -1e-9
    assert_density_matrix(rho)

    # partial-trace / pauli-string oracles at N <= 3
    rng = np.random.default_rng(1)
    for n in (2, 3):
        dim = 2 ** n
        half = dim // 2
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        state = m @ m.conj().T
        state /= np.trace(state).real
        from qrc.quantum import partial_trace_first_qubit

        reduced = partial_trace_first_qubit(state)
        brute = np.zeros((half, half), dtype=complex)
        for t in range(2):
            for a in range(half):
                for b in range(half):
                    brute[a, b] += state[t * half + a, t * half + b]
        assert np.abs(reduced - brute).max() <= 1e-9

        from naive_oracle import operator_from_axes

        for factors, axes in ((((1, "x"), (2, "y")), {1: "x", 2: "y"}),
                              (((1, "z"),), {1: "z"})):
            ours = pauli_string(n, list(factors))
            theirs = operator_from_axes(n, axes)
            assert np.abs(ours - theirs).max() <= 1e-9
            assert abs(expectation(state, ours)
                       - sum(state[i, j] * theirs[j, i]
                             for i in range(dim) for j in range(dim)).real) <= 1e-9
    report(
        f"2 PASS: unitarity {unit_defect:.1e}; K=1024 drift herm {worst_herm:.1e} "
        f"trace {worst_trace:.1e} min-eig {worst_eig:.1e}; N<=3 oracles within 1e-9"
    )


@pytest.mark.parametrize("n_qubits,n_steps", [(2, 48), (3, 32)])
def test_criterion_3_reservoir_oracle_equivalence(n_qubits, n_steps):
    config = ReservoirConfig(n_qubits=n_qubits, dt=1.7, coupling_seed=12)
    couplings = sample_couplings(config)
    prop = build_propagator(config, couplings)
    cache = build_observable_cache(n_qubits)
    rng = np.random.default_rng(n_qubits)
    v_max = 1.0
    worst = 0.0
    for _ in range(20):
        potential = rng.uniform(0.0, v_max, size=n_steps)
        ours = run_instance(potential, v_max, config, prop, cache).to_flat()
        reference = run_reference(potential, v_max, n_qubits, config.h, config.dt, couplings)
        worst = max(worst, float(np.abs(ours - reference).max()))
    assert worst <= 1e-9
    report(f"3 PASS: N={n_qubits} matches naive oracle on 20 potentials (max dev {worst:.1e})")


def test_criterion_4_exact_diagonalization_oracle():
    params = SpeckleParams(boundary="hard_wall")
    exact = np.pi ** 2 / (2 * params.box_length ** 2)
    box = ground_state_energy(np.zeros(params.k_points), params)
    box_err = abs(box - exact) / exact
    assert box_err < 1e-4

    rng = np.random.default_rng(44)
    v = rng.uniform(0, 0.05, size=params.k_points)
    shift_err = abs(
        ground_state_energy(v + 0.21, params) - ground_state_energy(v, params) - 0.21
    )
    assert shift_err <= 1e-10

    h = params.box_length / (params.k_points + 1)
    x = h * np.arange(1, params.k_points + 1)
    omega = 1e-3
    harmonic = ground_state_energy(0.5 * omega ** 2 * (x - params.box_length / 2) ** 2, params)
    harm_err = abs(harmonic - omega / 2) / (omega / 2)
    assert harm_err < 1e-4
    report(
        f"4 PASS: box rel err {box_err:.1e}, shift err {shift_err:.1e}, "
        f"harmonic rel err {harm_err:.1e}"
    )


def test_criterion_5_speckle_statistics():
    params = SpeckleParams()
    n = 1000
    mean_total = 0.0
    spaced = []
    for i in range(n):
        v = generate_speckle(params, i)
        mean_total += v.mean()
        spaced.append(v[::64])
    grand_mean = mean_total / n
    mean_dev = abs(grand_mean - params.mean_intensity) / params.mean_intensity
    assert mean_dev <= 0.02
    samples = np.concatenate(spaced)
    stat = kstest(samples, lambda v: 1.0 - np.exp(-v / params.mean_intensity)).statistic
    critical = 1.628 / np.sqrt(samples.size)
    assert stat < critical
    report(
        f"5 PASS: mean intensity dev {100 * mean_dev:.2f}% (<=2%), "
        f"KS {stat:.4f} < {critical:.4f} (1% level, n={samples.size})"
    )


def test_criterion_6_end_to_end_bands(full_run):
    _, reports = full_run
    single_train = reports["single"]["train"]["r2"]
    single_test = reports["single"]["test"]["r2"]
    two_train = reports["two"]["train"]["r2"]
    two_test = reports["two"]["test"]["r2"]
    assert single_test >= 0.75
    assert two_test > single_test
    assert two_test >= 0.85
    assert abs(single_train - single_test) <= 0.05
    assert abs(two_train - two_test) <= 0.05
    report(
        f"6 PASS: single R2 train/test {single_train:.4f}/{single_test:.4f}, "
        f"two R2 train/test {two_train:.4f}/{two_test:.4f}"
    )


def test_criterion_7_report_data_products(full_run):
    config, reports = full_run
    for kind in config.kinds:
        rep = reports[kind]
        hist_rows = config.histogram_csv(kind).read_text().strip().splitlines()[1:]
        counts = [int(r.split(",")[2]) for r in hist_rows]
        assert sum(counts) == rep["n_test"]
        assert rep["mae_marker"] == rep["test"]["mae"]
        scatter_rows = config.scatter_csv(kind).read_text().strip().splitlines()[1:]
        assert len(scatter_rows) == rep["n_test"]
        pairs = np.array([[float(c) for c in row.split(",")] for row in scatter_rows])
        recomputed_mae = float(np.abs(pairs[:, 0] - pairs[:, 1]).mean())
        assert recomputed_mae == pytest.approx(rep["mae_marker"], rel=1e-12)
    n_test = reports["single"]["n_test"]
    report(f"7 PASS: histograms sum to {n_test}, MAE markers exact, scatter rows {n_test}")


def test_criterion_8_determinism_across_workers(tmp_path):
    from qrc.speckle import file_sha256

    smoke = RunConfig(
        reservoir=ReservoirConfig(n_qubits=4),
        speckle=SpeckleParams(
            k_points=128, box_length=128.0, n_instances=200, dataset_seed=88,
            mean_intensity=5e-5, boundary="periodic",
        ),
        output_dir=str(tmp_path / "a"),
    )
    cmd_run_all(smoke, workers=1, out=open(os.devnull, "w"))
    rerun = replace(smoke, output_dir=str(tmp_path / "b"))
    cmd_run_all(rerun, workers=2, out=open(os.devnull, "w"))
    names = sorted(p.name for p in Path(smoke.output_dir).iterdir())
    assert names == sorted(p.name for p in Path(rerun.output_dir).iterdir())
    mismatched = [
        name for name in names
        if file_sha256(Path(smoke.output_dir) / name) != file_sha256(Path(rerun.output_dir) / name)
    ]
    assert mismatched == []
    report(f"8 PASS: {len(names)} artifacts byte-identical across reruns and worker counts")
