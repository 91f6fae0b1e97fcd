"""Exception hierarchy shared by every module of the package."""


class DefQuantError(Exception):
    """Base class for all library errors."""


class OrderMismatchError(DefQuantError):
    """Two series with different truncation orders were combined."""


class ContextMismatchError(DefQuantError):
    """Operands live in different ambient contexts (variable count, localization)."""


class PreconditionError(DefQuantError):
    """An operation was called outside its documented domain."""


class NotLocalError(PreconditionError):
    """A base-change substitution has a nonzero constant term."""


class DegreeError(DefQuantError):
    """Graded operands of the wrong degree."""


class ArityError(DegreeError):
    """A polydifferential operator received the wrong number of arguments."""


class KindMismatchError(DefQuantError):
    """An associative operation was requested on a Poisson deformation, or vice versa."""


class MorphismInvalidError(DefQuantError):
    """A DG Lie algebra morphism fails to commute with d or the bracket."""


class NotMaurerCartanError(DefQuantError):
    """The checked constructor received an element with nonzero MC defect."""


class NotInvertibleError(DefQuantError):
    """An element has a non-invertible augmentation.

    ``needed`` is the polynomial whose localization would make it invertible.
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class RecognitionError(DefQuantError):
    """A table of values is not a differential operator within the given bounds.

    ``witness`` is the monomial (exponent tuple) exposing the failure.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InsufficientTestDegreeError(PreconditionError):
    """The tested monomial window is too small for the requested order."""


class ParseError(DefQuantError):
    """Syntax or semantic error in the expression grammar, with 1-based position."""

    def __init__(self, message, line=1, column=1, path=None):
        where = f"{line}:{column}" if path is None else f"{path}:{line}:{column}"
        super().__init__(f"{where}: {message}")
        self.message = message
        self.path = path
        self.line = line
        self.column = column
