"""Exception types shared across the package."""


class DegenerateDataError(ValueError):
    """A score is undefined on this data (zero variance, single class, ...)."""


class InvalidCostError(ValueError):
    """Cost matrix does not define a cutoff in (0, 1)."""


class WeightSpecError(ValueError):
    """Malformed or invalid weight specification."""


class EmptyBinError(ValueError):
    """A binning specification produced a bin with no observations."""


class AlignmentError(ValueError):
    """Datasets compared pairwise do not share the same outcome rows."""
