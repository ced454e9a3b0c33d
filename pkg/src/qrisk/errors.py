"""Exception hierarchy shared by the simulator, builders and estimators."""


class QRiskError(Exception):
    """Base class for all package errors."""


class SizeError(QRiskError, ValueError):
    """Register width out of range, or circuit/state width mismatch."""


class QubitIndexError(QRiskError, IndexError):
    """A gate references a qubit outside the register."""


class ArgumentError(QRiskError, ValueError):
    """Malformed argument (zero shots, bad truth table, empty grid, ...)."""


class LayoutError(QRiskError, ValueError):
    """A builder needs a register role the layout does not assign."""


class DistributionError(QRiskError, ValueError):
    """Negative or non-normalized price distribution."""


class RangeError(QRiskError, ValueError):
    """A price shift would move probability mass outside 0..31."""


class DegenerateLikelihoodWarning(UserWarning):
    """Every Grover power produced all-zero or all-one counts."""
