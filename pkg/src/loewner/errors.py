"""Exception types shared across the package."""


class LoewnerError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(LoewnerError):
    pass


class NonHermitian(LoewnerError):
    pass


class DiagonalizationFailed(LoewnerError):
    pass


class NotCommuting(LoewnerError):
    pass


class NotGeneric(LoewnerError):
    pass


class InconsistentDirection(LoewnerError):
    """A perturbation direction whose slots disagree about the shared generator."""


class DomainViolation(LoewnerError):
    pass


class DegenerateNodes(LoewnerError):
    pass


class NotSkewSymmetric(LoewnerError):
    pass


class DimensionMismatch(LoewnerError):
    pass


class PoleHit(LoewnerError):
    pass


class SingularResolvent(LoewnerError):
    pass


class SingularLiftedResolvent(LoewnerError):
    pass


class NotUnitary(LoewnerError):
    pass


class TauTooCloseToSpectrum(LoewnerError):
    pass


class RealityViolation(LoewnerError):
    pass


class DegenerateBox(LoewnerError):
    pass


class RetryExhausted(LoewnerError):
    pass


class SchemaError(LoewnerError):
    """Malformed input document; `pointer` locates the first violation."""

    def __init__(self, pointer, message):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}" if pointer else message)


class InternalCheckFailed(LoewnerError):
    """A mathematical identity the implementation relies on failed to hold."""
