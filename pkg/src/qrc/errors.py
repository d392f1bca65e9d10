"""Exception hierarchy shared across the package.

Every error carries an ``exit_code`` used by the command-line layer:
1 = usage/configuration, 2 = data, 3 = numerical.
"""


class QrcError(Exception):
    exit_code = 2


class ConfigError(QrcError):
    """Malformed or unknown configuration keys/values."""

    exit_code = 1


# --- quantum primitives -------------------------------------------------

class NotHermitian(QrcError):
    """Matrix fails the Hermiticity tolerance required by the operation."""

    exit_code = 3


class DimensionTooSmall(QrcError):
    """Operation needs at least two qubits."""

    exit_code = 3


class NonRealExpectation(QrcError):
    """Tr(rho * obs) has an imaginary residue above tolerance."""

    exit_code = 3


class SiteOutOfRange(QrcError):
    """Pauli factor addressed a site outside [1, n_qubits]."""


class DuplicateSite(QrcError):
    """Pauli factor list addressed the same site twice."""


# --- reservoir ----------------------------------------------------------

class InputOutOfRange(QrcError):
    """Encoding input s lies outside [0, 1]."""

    exit_code = 3


class VMaxViolated(QrcError):
    """A potential value exceeds the dataset-wide maximum used for rescaling."""


class EmptyPotential(QrcError):
    """Potential vector has no points."""


# --- speckle lab --------------------------------------------------------

class NonFinitePotential(QrcError):
    """Potential contains NaN or Inf."""

    exit_code = 3


class ParseError(QrcError):
    """Malformed dataset file; carries 1-based row/column location."""

    def __init__(self, message, row=None, column=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.column = column


class ShapeMismatch(QrcError):
    """Rows of a dataset file differ in length, or sizes disagree."""


# --- readout ------------------------------------------------------------

class WrongArity(QrcError):
    """Raw observable vector has the wrong number of entries."""


class NonFiniteInput(QrcError):
    """Fit inputs contain NaN or Inf."""

    exit_code = 3


class KindMismatch(QrcError):
    """Model kind and feature kind disagree."""


class DegenerateTargets(QrcError):
    """Targets have zero variance; R^2 is undefined."""

    exit_code = 3


class EmptyDataset(QrcError):
    """No instances to work with."""


# --- pipeline -----------------------------------------------------------

class FingerprintMismatch(QrcError):
    """Artifact was produced under a different configuration."""
