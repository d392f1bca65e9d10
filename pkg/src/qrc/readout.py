"""Polynomial feature maps, least-squares readout, and metrics.

Two feature kinds are defined over the time-averaged reservoir output:

* ``single`` — per spin, the three axis averages plus their squares,
  pairwise products and triple product (10 terms each; bias first;
  61 features for 6 spins).
* ``two`` — the same 10-term polynomial over (xx, yy, zz) averages for
  every unordered spin pair, then over (xy, yz, zx) averages for every
  ordered pair (451 features for 6 spins).

Orderings are frozen (see FEATURE_VERSION) so saved models stay portable.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import lstsq

from .errors import (
    DegenerateTargets,
    EmptyDataset,
    KindMismatch,
    NonFiniteInput,
    WrongArity,
)
from .reservoir import RawObservables, observable_counts

FEATURE_VERSION = "poly10-v1"
KINDS = ("single", "two")


def feature_length(kind: str, n_qubits: int) -> int:
    if kind == "single":
        return 1 + 10 * n_qubits
    if kind == "two":
        return 1 + 15 * n_qubits * (n_qubits - 1)
    raise KindMismatch(f"unknown feature kind {kind!r}")


def _poly10(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> list[np.ndarray]:
    """The shared 10-term combination of a triplet of averages."""
    return [a, b, c, a * a, b * b, c * c, a * b, b * c, c * a, a * b * c]


def features_single_matrix(raw_matrix: np.ndarray, n_qubits: int) -> np.ndarray:
    """(B, n_observables) flat averages -> (B, 1 + 10 N) feature matrix."""
    raw_matrix = np.asarray(raw_matrix, dtype=np.float64)
    n_s = 3 * n_qubits
    if raw_matrix.ndim != 2 or raw_matrix.shape[1] < n_s:
        raise WrongArity(f"need at least {n_s} single-qubit averages")
    batch = raw_matrix.shape[0]
    per_spin = raw_matrix[:, :n_s].reshape(batch, n_qubits, 3)
    cols = [np.ones(batch)]
    for i in range(n_qubits):
        cols.extend(_poly10(per_spin[:, i, 0], per_spin[:, i, 1], per_spin[:, i, 2]))
    return np.column_stack(cols)


def features_two_matrix(raw_matrix: np.ndarray, n_qubits: int) -> np.ndarray:
    """(B, n_observables) flat averages -> (B, 1 + 15 N(N-1)) feature matrix."""
    raw_matrix = np.asarray(raw_matrix, dtype=np.float64)
    n_s, n_ts, n_tm = observable_counts(n_qubits)
    if raw_matrix.ndim != 2 or raw_matrix.shape[1] != n_s + n_ts + n_tm:
        raise WrongArity(
            f"need {n_s + n_ts + n_tm} averages, got {raw_matrix.shape[1] if raw_matrix.ndim == 2 else 'non-matrix'}"
        )
    batch = raw_matrix.shape[0]
    same = raw_matrix[:, n_s:n_s + n_ts].reshape(batch, -1, 3)
    mixed = raw_matrix[:, n_s + n_ts:].reshape(batch, -1, 3)
    cols = [np.ones(batch)]
    for p in range(same.shape[1]):
        cols.extend(_poly10(same[:, p, 0], same[:, p, 1], same[:, p, 2]))
    for p in range(mixed.shape[1]):
        cols.extend(_poly10(mixed[:, p, 0], mixed[:, p, 1], mixed[:, p, 2]))
    return np.column_stack(cols)


def features_single(raw: RawObservables) -> np.ndarray:
    """Feature vector of one instance (bias first, spins ascending)."""
    return features_single_matrix(raw.to_flat()[None, :], raw.n_qubits)[0]


def features_two(raw: RawObservables) -> np.ndarray:
    """Two-qubit feature vector of one instance (bias, i<j pairs, ordered pairs)."""
    return features_two_matrix(raw.to_flat()[None, :], raw.n_qubits)[0]


def feature_matrix(kind: str, raw_matrix: np.ndarray, n_qubits: int) -> np.ndarray:
    if kind == "single":
        return features_single_matrix(raw_matrix, n_qubits)
    if kind == "two":
        return features_two_matrix(raw_matrix, n_qubits)
    raise KindMismatch(f"unknown feature kind {kind!r}")


def fit(features: np.ndarray, targets: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Least-squares weights, optionally ridge-penalized (bias exempt).

    Solved with LAPACK's SVD-based driver, so a rank-deficient system at
    ridge = 0 yields the minimum-norm solution.
    """
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != targets.shape[0]:
        raise ValueError("features must be (M, P) with M matching targets")
    if not (np.all(np.isfinite(features)) and np.all(np.isfinite(targets))):
        raise NonFiniteInput("fit inputs contain NaN or Inf")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if ridge > 0:
        n_feat = features.shape[1]
        penalty = np.sqrt(ridge) * np.eye(n_feat)[1:]  # no penalty on the bias
        features = np.vstack([features, penalty])
        targets = np.concatenate([targets, np.zeros(n_feat - 1)])
    weights, _, _, _ = lstsq(features, targets, lapack_driver="gelsd")
    return weights


@dataclass(frozen=True)
class LinearModel:
    """Trained readout: weights plus the context needed to reuse them."""

    kind: str
    weights: np.ndarray
    v_max: float
    config_fingerprint: str
    feature_version: str = FEATURE_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindMismatch(f"unknown model kind {self.kind!r}")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")


def predict(model: LinearModel, features: np.ndarray) -> np.ndarray | float:
    """weights . features, for a single vector or a (B, P) matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != model.weights.shape[0]:
        raise KindMismatch(
            f"{model.kind} model expects {model.weights.shape[0]} features, "
            f"got {features.shape[-1]}"
        )
    out = features @ model.weights
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EvalReport:
    mae: float
    r2: float
    residuals: np.ndarray  # target - prediction, per instance
    predictions: np.ndarray


def evaluate(predictions: np.ndarray, targets: np.ndarray) -> EvalReport:
    """MAE and coefficient of determination against targets.

    R^2 = 1 - sum((E - pred)^2) / sum((mean(E) - E)^2), with the mean
    taken over the evaluated set itself.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or targets.ndim != 1:
        raise ValueError("predictions and targets must be equal-length vectors")
    if targets.size < 2:
        raise ValueError("need at least two instances")
    total = float(np.sum((targets.mean() - targets) ** 2))
    if total == 0.0:
        raise DegenerateTargets("targets are all identical; R^2 undefined")
    residuals = targets - predictions
    mae = float(np.abs(residuals).mean())
    r2 = 1.0 - float(np.sum(residuals ** 2)) / total
    return EvalReport(mae=mae, r2=r2, residuals=residuals, predictions=predictions)


def split(n_instances, train_fraction: float = 0.75):
    """Contiguous prefix/suffix split, preserving dataset order."""
    n = n_instances if isinstance(n_instances, int) else len(n_instances)
    if n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train_fraction must be in (0, 1]")
    n_train = int(train_fraction * n)
    if n_train == n:
        warnings.warn("empty test set: train_fraction leaves no test instances")
    return np.arange(n_train), np.arange(n_train, n)


# --- model persistence ------------------------------------------------------

def save_model(model: LinearModel, path) -> None:
    payload = {
        "kind": model.kind,
        "weights": [format(w, ".17g") for w in model.weights],
        "v_max": format(model.v_max, ".17g"),
        "config_fingerprint": model.config_fingerprint,
        "feature_version": model.feature_version,
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> LinearModel:
    with open(path) as fh:
        payload = json.load(fh)
    return LinearModel(
        kind=payload["kind"],
        weights=np.asarray(payload["weights"], dtype=np.float64),
        v_max=float(payload["v_max"]),
        config_fingerprint=payload["config_fingerprint"],
        feature_version=payload["feature_version"],
    )
