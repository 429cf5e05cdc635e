"""Exception hierarchy.

All errors raised by the toolkit derive from :class:`QcpagError`, which is a
``ValueError`` so that argument problems can be caught the usual way.
"""

from __future__ import annotations


class QcpagError(ValueError):
    pass


# construction
class NotPrimeError(QcpagError):
    pass


class DoesNotDivideError(QcpagError):
    pass


class IndexOutOfRangeError(QcpagError, IndexError):
    pass


class DuplicateIndexError(QcpagError):
    pass


class DimensionMismatchError(QcpagError):
    pass


class DisconnectedMaskError(QcpagError):
    pass


class WrongOriginError(QcpagError):
    pass


# dispersion
class ShiftOutOfRangeError(QcpagError):
    pass


class SectionWeightExceededError(QcpagError):
    pass


class NotBlockStructuredError(QcpagError):
    def __init__(self, block: tuple[int, int], reason: str = ""):
        self.block = block
        msg = f"block {block} is neither a circulant permutation nor a zero block"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


# geometry
class NonIntegralError(QcpagError):
    pass


class WrongShapeError(QcpagError):
    pass


class ContainsZeroBlockError(QcpagError):
    pass


class RcViolationError(QcpagError):
    def __init__(self, rows: tuple[int, int], cols: tuple[int, int]):
        self.rows = rows
        self.cols = cols
        super().__init__(f"rows {rows} share 1-positions {cols}")


class DiagonalMismatchError(QcpagError):
    pass


class TwosCountMismatchError(QcpagError):
    def __init__(self, row: int, found: int, expected: int, pair: tuple[int, int] | None = None):
        self.row = row
        self.found = found
        self.expected = expected
        self.pair = pair
        where = f" for (block-column, shift) {pair}" if pair is not None else ""
        super().__init__(f"row {row} has {found} entries equal to 2, expected {expected}{where}")


class EntryOutOfRangeError(QcpagError):
    pass


class AxiomViolationError(QcpagError):
    def __init__(self, axiom: int, witness: tuple, detail: str = ""):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"axiom {axiom} violated at {witness}" + (f": {detail}" if detail else ""))


class NotBlockCertifiedError(QcpagError):
    pass


class TooManyDroppedError(QcpagError):
    pass


# graph / spectral
class UnsupportedLengthError(QcpagError):
    pass


class DeltaIsOneError(QcpagError):
    pass


class NotGQError(QcpagError):
    pass


class NotBiregularError(QcpagError):
    pass


class NotRcConstrainedError(QcpagError):
    pass


class NonIntegralMultiplicityError(QcpagError):
    pass


class TooLargeError(QcpagError):
    pass


class SpectrumMismatchError(QcpagError):
    pass


class AlphaOutOfRangeError(QcpagError):
    pass


# trapping sets
class EmptySetError(QcpagError):
    pass


class InconsistentProfileError(QcpagError):
    pass


class NotANetError(QcpagError):
    pass


class NotAParallelBundleError(QcpagError):
    pass


class BudgetExceededError(QcpagError):
    pass


class BoundViolationError(QcpagError):
    def __init__(self, reports: list):
        self.reports = reports
        super().__init__(f"{len(reports)} subset(s) violate a trapping-set lower bound")


# codec / simulation
class LengthMismatchError(QcpagError):
    pass


class InvalidRateError(QcpagError):
    pass


class ConfigInvalidError(QcpagError):
    pass


class FormatError(QcpagError):
    pass
