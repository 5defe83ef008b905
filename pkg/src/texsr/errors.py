"""Exception types shared across the package."""


class TexsrError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(TexsrError, ValueError):
    """Operands do not live on compatible periodic grids."""


class StrideDoesNotDivide(TexsrError, ValueError):
    """The subsampling stride does not divide both grid dimensions."""


class NonHermitianSpectrum(TexsrError, ValueError):
    """An inverse transform was asked to produce a real image from a
    spectrum whose imaginary residue exceeds the tolerance."""


class KernelTooLarge(TexsrError, ValueError):
    """A kernel tap array exceeds the target grid in some dimension."""


class AllFrequenciesZeroed(TexsrError, ValueError):
    """Every Fourier coefficient of a kernel fell below the inversion
    cutoff; the pseudo-inverse would be identically zero."""


class DegenerateModel(TexsrError, ValueError):
    """The texture model carries no usable information for kriging
    (for example an all-zero texton)."""


class NumericalBreakdown(TexsrError, ArithmeticError):
    """The conjugate-gradient iteration produced a non-positive
    curvature term twice in a row and cannot continue."""


class InsufficientSamples(TexsrError, ValueError):
    """An empirical estimator was given fewer samples than it needs."""


class UnsupportedFormat(TexsrError, ValueError):
    """An image or kernel file is in a format this package does not read."""


class CorruptHeader(TexsrError, ValueError):
    """An image or kernel file header could not be parsed."""
