"""End-to-end orchestration: dataset, features, training, evaluation.

All artifacts live under ``RunConfig.output_dir`` and embed a fingerprint
of the physics-relevant configuration; every consumer verifies it, so
artifacts from different configurations cannot be silently mixed. The
whole pipeline is a pure function of the config file: reruns (with any
worker count) produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyDataset, FingerprintMismatch, KindMismatch
from .readout import (
    KINDS,
    FEATURE_VERSION,
    LinearModel,
    evaluate,
    feature_length,
    feature_matrix,
    fit,
    load_model,
    predict,
    save_model,
    split,
)
from .reservoir import (
    ReservoirConfig,
    build_observable_cache,
    build_propagator,
    observable_counts,
    run_batch,
    sample_couplings,
)
from .speckle import (
    Dataset,
    SpeckleParams,
    build_dataset,
    load_dataset,
    load_manifest,
    save_dataset,
    _parse_rows,
)

log = logging.getLogger("qrc")

CHUNK = 32  # instances per reservoir batch; results are chunk-invariant

HISTOGRAM_BINS = 50


@dataclass(frozen=True)
class RunConfig:
    reservoir: ReservoirConfig = ReservoirConfig()
    speckle: SpeckleParams = SpeckleParams()
    kinds: tuple = KINDS
    ridge: float = 0.0
    train_fraction: float = 0.75
    workers: int = 1
    output_dir: str = "artifacts"

    def __post_init__(self):
        for kind in self.kinds:
            if kind not in KINDS:
                raise ConfigError(f"unknown readout kind {kind!r}")
        if not 0.0 < self.train_fraction <= 1.0:
            raise ConfigError("train_fraction must be in (0, 1]")
        if self.ridge < 0:
            raise ConfigError("ridge must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def fingerprint(self) -> str:
        """Stable hash of everything that affects computed values.

        Paths, worker count and the kind selection are excluded; they
        change where/which artifacts exist, never their contents.
        """
        payload = {
            "reservoir": asdict(self.reservoir),
            "speckle": asdict(self.speckle),
            "readout": {"ridge": self.ridge, "train_fraction": self.train_fraction},
        }
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    # artifact locations -------------------------------------------------

    def path(self, name: str) -> Path:
        return Path(self.output_dir) / name

    def dataset_csv(self) -> Path:
        return self.path("dataset.csv")

    def dataset_manifest(self) -> Path:
        return self.path("dataset_manifest.json")

    def features_csv(self, kind: str) -> Path:
        return self.path(f"features_{kind}.csv")

    def features_meta(self, kind: str) -> Path:
        return self.path(f"features_{kind}_meta.json")

    def model_file(self, kind: str) -> Path:
        return self.path(f"model_{kind}.json")

    def report_file(self, kind: str) -> Path:
        return self.path(f"report_{kind}.json")

    def histogram_csv(self, kind: str) -> Path:
        return self.path(f"histogram_{kind}.csv")

    def scatter_csv(self, kind: str) -> Path:
        return self.path(f"scatter_{kind}.csv")


def _build_section(cls, payload: dict, where: str):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**payload)
    except (TypeError, ValueError) as bad:
        raise ConfigError(f"invalid {where} section: {bad}") from None


def config_from_dict(payload: dict) -> RunConfig:
    unknown = set(payload) - {"reservoir", "speckle", "readout", "run"}
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    reservoir = _build_section(ReservoirConfig, payload.get("reservoir", {}), "reservoir")
    speckle = _build_section(SpeckleParams, payload.get("speckle", {}), "speckle")
    readout = dict(payload.get("readout", {}))
    run = dict(payload.get("run", {}))
    unknown = set(readout) - {"kinds", "ridge", "train_fraction"}
    if unknown:
        raise ConfigError(f"unknown keys in readout: {sorted(unknown)}")
    unknown = set(run) - {"workers", "output_dir"}
    if unknown:
        raise ConfigError(f"unknown keys in run: {sorted(unknown)}")
    return RunConfig(
        reservoir=reservoir,
        speckle=speckle,
        kinds=tuple(readout.get("kinds", KINDS)),
        ridge=float(readout.get("ridge", 0.0)),
        train_fraction=float(readout.get("train_fraction", 0.75)),
        workers=int(run.get("workers", 1)),
        output_dir=str(run.get("output_dir", "artifacts")),
    )


def config_to_dict(config: RunConfig) -> dict:
    return {
        "reservoir": asdict(config.reservoir),
        "speckle": asdict(config.speckle),
        "readout": {
            "kinds": list(config.kinds),
            "ridge": config.ridge,
            "train_fraction": config.train_fraction,
        },
        "run": {"workers": config.workers, "output_dir": config.output_dir},
    }


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as bad:
        raise ConfigError(f"config {path} is not valid JSON: {bad}") from None
    return config_from_dict(payload)


def save_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- generate ---------------------------------------------------------------

def cmd_generate(config: RunConfig, limit: int | None = None) -> Path:
    """Write dataset.csv + manifest; deterministic in the dataset seed."""
    params = config.speckle
    n = params.n_instances if limit is None else min(limit, params.n_instances)
    log.info("generating %d speckle instances (K=%d)", n, params.k_points)
    dataset = build_dataset(replace(params, n_instances=n))
    dataset = Dataset(
        params=params,
        potentials=dataset.potentials,
        energies=dataset.energies,
        v_max=dataset.v_max,
    )
    save_dataset(dataset, config.dataset_csv(), config.dataset_manifest())
    log.info("dataset written to %s (v_max=%.6g)", config.dataset_csv(), dataset.v_max)
    return config.dataset_csv()


# --- features ---------------------------------------------------------------

_WORKER_STATE: dict = {}


def _worker_init(reservoir_config: ReservoirConfig):
    couplings = sample_couplings(reservoir_config)
    _WORKER_STATE["prop"] = build_propagator(reservoir_config, couplings)
    _WORKER_STATE["cache"] = build_observable_cache(reservoir_config.n_qubits)


def _worker_chunk(args):
    potentials, v_max = args
    return run_batch(potentials, v_max, _WORKER_STATE["prop"], _WORKER_STATE["cache"])


def compute_raw_observables(
    potentials: np.ndarray,
    v_max: float,
    reservoir_config: ReservoirConfig,
    workers: int = 1,
) -> np.ndarray:
    """Time-averaged observables for every instance, chunked and ordered.

    Results are independent of ``workers`` and of the chunking because
    each instance is simulated from its own reset state.
    """
    chunks = [
        (potentials[lo:lo + CHUNK], v_max)
        for lo in range(0, potentials.shape[0], CHUNK)
    ]
    if workers <= 1:
        _worker_init(reservoir_config)
        results = []
        for c, chunk in enumerate(chunks):
            results.append(_worker_chunk(chunk))
            if (c + 1) % 20 == 0:
                log.info("reservoir: %d/%d instances", min((c + 1) * CHUNK, len(potentials)), len(potentials))
    else:
        os.environ.setdefault("OMP_NUM_THREADS", "1")
        os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
        os.environ.setdefault("MKL_NUM_THREADS", "1")
        with ProcessPoolExecutor(
            max_workers=workers,
            mp_context=get_context("spawn"),
            initializer=_worker_init,
            initargs=(reservoir_config,),
        ) as pool:
            results = list(pool.map(_worker_chunk, chunks, chunksize=1))
    return np.vstack(results) if results else np.zeros((0, 0))


def _write_matrix_csv(path: Path, matrix: np.ndarray, targets: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for row, target in zip(matrix, targets):
            fh.write(",".join(format(v, ".17g") for v in row))
            fh.write("," + format(target, ".17g") + "\n")


def _read_matrix_csv(path, limit: int | None = None):
    with open(path) as fh:
        if limit is None:
            lines = fh.readlines()
        else:
            lines = [line for _, line in zip(range(limit), fh)]
    rows = _parse_rows(lines, ",", None)
    if not rows:
        raise EmptyDataset(f"no rows in {path}")
    table = np.vstack(rows)
    return table[:, :-1], table[:, -1]


def cmd_features(
    config: RunConfig, limit: int | None = None, workers: int | None = None
) -> list[Path]:
    """Run the reservoir over the dataset and write per-kind feature files."""
    manifest = load_manifest(config.dataset_manifest())
    if manifest.get("params") != asdict(config.speckle):
        raise FingerprintMismatch(
            "dataset manifest parameters do not match the configuration"
        )
    dataset = load_dataset(config.dataset_csv(), config.dataset_manifest(), limit=limit)
    v_max = float(manifest["v_max"])
    n_qubits = config.reservoir.n_qubits
    log.info("computing observables for %d instances", len(dataset))
    raw = compute_raw_observables(
        dataset.potentials, v_max, config.reservoir,
        workers=config.workers if workers is None else workers,
    )
    written = []
    for kind in config.kinds:
        feats = feature_matrix(kind, raw, n_qubits)
        _write_matrix_csv(config.features_csv(kind), feats, dataset.energies)
        meta = {
            "kind": kind,
            "n_qubits": n_qubits,
            "config_fingerprint": config.fingerprint(),
            "feature_version": FEATURE_VERSION,
            "v_max": v_max,
            "n_rows": int(feats.shape[0]),
        }
        with open(config.features_meta(kind), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(config.features_csv(kind))
        log.info("wrote %s (%d x %d)", written[-1], feats.shape[0], feats.shape[1] + 1)
    return written


def _load_features(config: RunConfig, kind: str, limit: int | None):
    meta_path = config.features_meta(kind)
    with open(meta_path) as fh:
        meta = json.load(fh)
    if meta["kind"] != kind:
        raise KindMismatch(f"{meta_path} holds kind {meta['kind']!r}, wanted {kind!r}")
    if meta["config_fingerprint"] != config.fingerprint():
        raise FingerprintMismatch(
            f"{meta_path} was built under a different configuration"
        )
    if meta["feature_version"] != FEATURE_VERSION:
        raise FingerprintMismatch(
            f"feature ordering {meta['feature_version']} != {FEATURE_VERSION}"
        )
    feats, targets = _read_matrix_csv(config.features_csv(kind), limit=limit)
    expected = feature_length(kind, meta["n_qubits"])
    if feats.shape[1] != expected:
        raise KindMismatch(
            f"{kind} features must have {expected} columns, found {feats.shape[1]}"
        )
    return feats, targets, meta


# --- train ------------------------------------------------------------------

def cmd_train(config: RunConfig, kind: str, limit: int | None = None) -> Path:
    feats, targets, meta = _load_features(config, kind, limit)
    train_idx, _ = split(len(targets), config.train_fraction)
    if train_idx.size == 0:
        raise EmptyDataset("training split is empty")
    weights = fit(feats[train_idx], targets[train_idx], ridge=config.ridge)
    model = LinearModel(
        kind=kind,
        weights=weights,
        v_max=float(meta["v_max"]),
        config_fingerprint=meta["config_fingerprint"],
    )
    save_model(model, config.model_file(kind))
    report = evaluate(predict(model, feats[train_idx]), targets[train_idx])
    log.info(
        "trained %s model (%d weights): train MAE=%.6g R2=%.6f",
        kind, weights.size, report.mae, report.r2,
    )
    return config.model_file(kind)


# --- evaluate ---------------------------------------------------------------

def error_histogram(errors: np.ndarray, n_bins: int = HISTOGRAM_BINS):
    """Uniform bins from 0 to the 99th percentile, plus an overflow bin."""
    hi = float(np.percentile(errors, 99.0))
    if hi <= 0.0:
        hi = float(errors.max()) or 1.0
    edges = np.linspace(0.0, hi, n_bins + 1)
    counts, _ = np.histogram(errors, bins=edges)
    overflow = int(np.sum(errors > edges[-1]))
    return edges, counts, overflow


def cmd_evaluate(config: RunConfig, kind: str, limit: int | None = None) -> Path:
    feats, targets, meta = _load_features(config, kind, limit)
    model = load_model(config.model_file(kind))
    if model.kind != kind:
        raise KindMismatch(f"model kind {model.kind!r} != requested {kind!r}")
    if model.config_fingerprint != meta["config_fingerprint"]:
        raise FingerprintMismatch("model and features come from different configurations")
    if model.feature_version != meta["feature_version"]:
        raise FingerprintMismatch("model feature ordering differs from features file")
    train_idx, test_idx = split(len(targets), config.train_fraction)
    if test_idx.size < 2:
        raise EmptyDataset("test split needs at least two instances")
    test_report = evaluate(predict(model, feats[test_idx]), targets[test_idx])
    train_report = evaluate(predict(model, feats[train_idx]), targets[train_idx])
    errors = np.abs(test_report.residuals)
    edges, counts, overflow = error_histogram(errors)

    with open(config.histogram_csv(kind), "w", newline="\n") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, count in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{lo:.17g},{hi:.17g},{count}\n")
        fh.write(f"{edges[-1]:.17g},inf,{overflow}\n")
    with open(config.scatter_csv(kind), "w", newline="\n") as fh:
        fh.write("target_energy,predicted_energy\n")
        for target, pred in zip(targets[test_idx], test_report.predictions):
            fh.write(f"{target:.17g},{pred:.17g}\n")

    report = {
        "kind": kind,
        "config_fingerprint": meta["config_fingerprint"],
        "n_train": int(train_idx.size),
        "n_test": int(test_idx.size),
        "train": {"mae": train_report.mae, "r2": train_report.r2},
        "test": {"mae": test_report.mae, "r2": test_report.r2},
        "mae_marker": test_report.mae,
        "histogram_bins": HISTOGRAM_BINS,
        "histogram_file": config.histogram_csv(kind).name,
        "scatter_file": config.scatter_csv(kind).name,
    }
    with open(config.report_file(kind), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info(
        "evaluated %s model: test MAE=%.6g R2=%.6f (train R2=%.6f)",
        kind, test_report.mae, test_report.r2, train_report.r2,
    )
    return config.report_file(kind)


# --- run-all ----------------------------------------------------------------

def cmd_run_all(
    config: RunConfig,
    limit: int | None = None,
    workers: int | None = None,
    out=None,
) -> dict:
    """generate -> features -> train -> evaluate for every configured kind."""
    out = sys.stdout if out is None else out
    cmd_generate(config, limit=limit)
    cmd_features(config, limit=limit, workers=workers)
    reports = {}
    for kind in config.kinds:
        cmd_train(config, kind, limit=limit)
        cmd_evaluate(config, kind, limit=limit)
        with open(config.report_file(kind)) as fh:
            reports[kind] = json.load(fh)
    header = f"{'model':>8} {'split':>6} {'MAE':>12} {'R2':>10}"
    print(header, file=out)
    for kind in config.kinds:
        for part in ("train", "test"):
            block = reports[kind][part]
            print(
                f"{kind:>8} {part:>6} {block['mae']:12.6g} {block['r2']:10.6f}",
                file=out,
            )
    return reports
