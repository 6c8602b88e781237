"""Exception types shared across the package."""


class EllBlochError(Exception):
    """Base class; ``code`` is the stable machine-readable tag used in reports."""

    code = "error"


class PointNotOnCurveError(EllBlochError, ValueError):
    code = "point-not-on-curve"


class NotPrimeError(EllBlochError, ValueError):
    code = "not-prime"


class PrecisionUnderflowError(EllBlochError, ArithmeticError):
    code = "precision-underflow"


class PointOnLatticeError(EllBlochError, ValueError):
    code = "point-on-lattice"


class NonMinimalModelError(EllBlochError, ValueError):
    code = "non-minimal-model"


class UnverifiableRelationError(EllBlochError):
    code = "unverifiable-relation"


class UnsupportedLevelError(EllBlochError, ValueError):
    code = "unsupported-level"


class MissingRationalTorsionError(EllBlochError):
    code = "missing-rational-torsion"

    def __init__(self, msg, available=()):
        super().__init__(msg)
        self.available = list(available)


class ShapeMismatchError(EllBlochError, ValueError):
    code = "shape-mismatch"


class NonExactCoupleError(EllBlochError, ValueError):
    code = "non-exact-input"


class HypothesisViolationError(EllBlochError, ValueError):
    code = "hypothesis-violation"

    def __init__(self, msg, locus=None):
        super().__init__(msg)
        self.locus = locus


class NotSubcomplexError(EllBlochError, ValueError):
    code = "not-a-subcomplex"


class NotAcyclicError(EllBlochError, ValueError):
    code = "not-acyclic"

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotExactSequenceError(EllBlochError, ValueError):
    code = "not-exact-sequence"


class SplittingError(EllBlochError, ValueError):
    code = "splitting-fails-commutation"

    def __init__(self, msg, locus=None):
        super().__init__(msg)
        self.locus = locus


class SchemaError(EllBlochError, ValueError):
    code = "schema-error"

    def __init__(self, msg, pointer=""):
        super().__init__(f"{pointer or '/'}: {msg}")
        self.pointer = pointer
