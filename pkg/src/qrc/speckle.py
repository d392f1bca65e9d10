"""Speckle-disorder potentials and their exact ground-state energies.

The generator mimics fully developed optical speckle: a complex Gaussian
random field, low-pass filtered in momentum space, squared modulus taken
pointwise. Intensities then follow the exponential law
P(V) = exp(-V/v0)/v0 with mean v0.

Units: hbar = m = 1 and the grid spacing is the length unit, so energies
come out in hbar^2/(m dx^2). The box has hard walls just outside the
K-point grid, i.e. effective length ``box_length`` with interior spacing
``box_length / (k_points + 1)``.

Every instance is a pure function of (dataset_seed, instance_index), so
generation can run in any order or in parallel.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from scipy.linalg import eigvalsh, eigvalsh_tridiagonal

from .errors import ConfigError, FingerprintMismatch, NonFinitePotential, ParseError, ShapeMismatch

FILTER_SHAPES = ("tophat", "gaussian")
BOUNDARIES = ("hard_wall", "periodic")

DATASET_UNITS_NOTE = (
    "hbar = m = 1, grid spacing = 1 length unit; energies in hbar^2/(m dx^2)"
)


@dataclass(frozen=True)
class SpeckleParams:
    """Knobs of the speckle ensemble and of the ground-state oracle."""

    k_points: int = 1024
    box_length: float = 1024.0
    correlation_length: float = 8.0
    mean_intensity: float = 0.02
    dataset_seed: int = 20240801
    n_instances: int = 10000
    filter_shape: str = "tophat"
    boundary: str = "hard_wall"

    def __post_init__(self):
        if self.k_points < 2:
            raise ValueError("k_points must be at least 2")
        if self.correlation_length < 2:
            raise ValueError("correlation_length below 2 grid spacings is unresolvable")
        if not self.mean_intensity > 0:
            raise ValueError("mean_intensity must be positive")
        if self.filter_shape not in FILTER_SHAPES:
            raise ValueError(f"filter_shape must be one of {FILTER_SHAPES}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")

    @property
    def grid_spacing(self) -> float:
        return self.box_length / (self.k_points + 1)


@dataclass(frozen=True)
class SpeckleInstance:
    potential: np.ndarray
    energy: float


@dataclass(frozen=True)
class Dataset:
    """Generated (or loaded) instances; order is the generation order."""

    params: SpeckleParams | None
    potentials: np.ndarray  # (n, K)
    energies: np.ndarray  # (n,)
    v_max: float

    def __len__(self) -> int:
        return self.potentials.shape[0]

    def instance(self, index: int) -> SpeckleInstance:
        return SpeckleInstance(self.potentials[index], float(self.energies[index]))


def _mode_filter(params: SpeckleParams) -> np.ndarray:
    """Momentum-space amplitude filter on the FFT frequency grid."""
    k = 2.0 * np.pi * np.fft.fftfreq(params.k_points)
    k_cut = 2.0 * np.pi / params.correlation_length
    if params.filter_shape == "tophat":
        return (np.abs(k) <= k_cut).astype(np.float64)
    return np.exp(-0.5 * (k / k_cut) ** 2)


def generate_speckle(params: SpeckleParams, instance_index: int) -> np.ndarray:
    """One non-negative potential vector of length k_points.

    The complex field is normalized analytically so the ensemble mean of
    V is exactly ``mean_intensity``.
    """
    rng = np.random.default_rng([params.dataset_seed, instance_index])
    modes = rng.standard_normal(2 * params.k_points).view(np.complex128)
    filt = _mode_filter(params)
    modes *= filt
    field = np.fft.ifft(modes)
    # E|field|^2 = 2 * sum(filt^2) / K^2 for unit-variance re/im parts
    mean_sq = 2.0 * float(np.sum(filt ** 2)) / params.k_points ** 2
    return params.mean_intensity * np.abs(field) ** 2 / mean_sq


def ground_state_energy(potential: np.ndarray, params: SpeckleParams) -> float:
    """Smallest eigenvalue of -(1/2) d^2/dx^2 + V on the discrete grid.

    Three-point Laplacian; hard walls one spacing outside the grid by
    default (the tridiagonal solve extracts only the lowest eigenvalue,
    via LAPACK's Sturm-sequence bisection). The periodic option solves the
    dense cyclic form instead and is considerably slower.
    """
    potential = np.asarray(potential, dtype=np.float64)
    if potential.ndim != 1 or potential.size < 2:
        raise ShapeMismatch("potential must be a 1-D vector with at least 2 points")
    if not np.all(np.isfinite(potential)):
        raise NonFinitePotential("potential contains NaN or Inf")
    n = potential.size
    h = params.box_length / (n + 1)
    inv_h2 = 1.0 / (h * h)
    diag = inv_h2 + potential
    off = np.full(n - 1, -0.5 * inv_h2)
    if params.boundary == "hard_wall":
        return float(
            eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]
        )
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    mat[0, -1] = mat[-1, 0] = -0.5 * inv_h2
    return float(eigvalsh(mat, subset_by_index=(0, 0))[0])


def build_dataset(params: SpeckleParams) -> Dataset:
    """Generate n_instances potentials with their exact ground-state energies."""
    potentials = np.empty((params.n_instances, params.k_points))
    energies = np.empty(params.n_instances)
    for i in range(params.n_instances):
        v = generate_speckle(params, i)
        potentials[i] = v
        energies[i] = ground_state_energy(v, params)
    return Dataset(
        params=params,
        potentials=potentials,
        energies=energies,
        v_max=float(potentials.max()),
    )


# --- persistence ----------------------------------------------------------

def _format_row(values: np.ndarray) -> str:
    return ",".join(format(v, ".17g") for v in values)


def _parse_rows(lines, delimiter: str, expected_width: int | None):
    """Parse numeric CSV rows; report 1-based row/column on bad cells."""
    rows = []
    width = expected_width
    for r, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        cells = line.split(delimiter)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ShapeMismatch(
                f"row {r} has {len(cells)} columns, expected {width}"
            )
        try:
            rows.append(np.asarray(cells, dtype=np.float64))
        except ValueError:
            for c, cell in enumerate(cells, start=1):
                try:
                    float(cell)
                except ValueError:
                    raise ParseError(f"malformed number {cell!r}", row=r, column=c) from None
            raise ParseError("malformed row", row=r) from None
    return rows


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def save_dataset(dataset: Dataset, csv_path, manifest_path=None) -> None:
    """Write the CSV (K potential columns + energy) and its JSON manifest."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="\n") as fh:
        for i in range(len(dataset)):
            fh.write(_format_row(dataset.potentials[i]))
            fh.write("," + format(dataset.energies[i], ".17g") + "\n")
    if manifest_path is None:
        return
    manifest = {
        "params": asdict(dataset.params) if dataset.params else None,
        "n_instances": len(dataset),
        "v_max": dataset.v_max,
        "units": DATASET_UNITS_NOTE,
        "csv_sha256": file_sha256(csv_path),
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(manifest_path) -> dict:
    with open(manifest_path) as fh:
        return json.load(fh)


def load_dataset(csv_path, manifest_path=None, limit: int | None = None) -> Dataset:
    """Read back a dataset written by :func:`save_dataset`.

    When a manifest is given its content hash is verified (skipped when
    ``limit`` truncates the read, since the hash covers the full file).
    """
    params = None
    v_max = None
    if manifest_path is not None:
        manifest = load_manifest(manifest_path)
        if limit is None:
            actual = file_sha256(csv_path)
            if actual != manifest["csv_sha256"]:
                raise FingerprintMismatch(
                    f"dataset file hash {actual[:12]}... does not match manifest"
                )
        if manifest.get("params"):
            params = SpeckleParams(**manifest["params"])
        v_max = manifest.get("v_max")
    with open(csv_path) as fh:
        if limit is None:
            lines = fh.readlines()
        else:
            lines = [line for _, line in zip(range(limit), fh)]
    rows = _parse_rows(lines, ",", None)
    if not rows:
        raise ShapeMismatch(f"no data rows in {csv_path}")
    table = np.vstack(rows)
    potentials, energies = table[:, :-1], table[:, -1]
    if v_max is None or limit is not None:
        v_max = float(potentials.max())
    return Dataset(params=params, potentials=potentials, energies=energies, v_max=float(v_max))


def load_external_dataset(path, layout: dict) -> Dataset:
    """Parse a third-party potential/energy table.

    ``layout`` needs ``k_points`` and ``energy_column`` (0-based; negative
    counts from the end) and optionally ``delimiter`` (default ','). The
    remaining columns must be exactly the k_points potential values, in
    spatial order. v_max is recomputed from the loaded data.
    """
    unknown = set(layout) - {"delimiter", "k_points", "energy_column"}
    if unknown:
        raise ConfigError(f"unknown layout keys: {sorted(unknown)}")
    try:
        k_points = int(layout["k_points"])
        energy_column = int(layout["energy_column"])
    except KeyError as missing:
        raise ConfigError(f"layout is missing {missing}") from None
    delimiter = layout.get("delimiter", ",")
    with open(path) as fh:
        rows = _parse_rows(fh, delimiter, k_points + 1)
    if not rows:
        raise ShapeMismatch(f"no data rows in {path}")
    table = np.vstack(rows)
    if table.shape[1] != k_points + 1:
        raise ShapeMismatch(
            f"expected {k_points + 1} columns (k_points + energy), found {table.shape[1]}"
        )
    energies = table[:, energy_column]
    potentials = np.delete(table, energy_column % table.shape[1], axis=1)
    return Dataset(
        params=None,
        potentials=potentials,
        energies=energies,
        v_max=float(potentials.max()),
    )
