"""Exception types raised across the toolkit."""


class XspecError(Exception):
    """Base class for all toolkit errors."""

    kind = "error"


class ShapeError(XspecError, ValueError):
    kind = "shape"


class ParseError(XspecError, ValueError):
    kind = "parse"


class DegenerateInputError(XspecError, ValueError):
    kind = "degenerate-input"


class ArgumentError(XspecError, ValueError):
    kind = "argument"


class NumericDomainError(XspecError, ArithmeticError):
    kind = "numeric-domain"


class AlignmentError(XspecError, KeyError):
    kind = "alignment"

    def __str__(self):
        # KeyError.__str__ would repr() the message
        return str(self.args[0]) if self.args else ""


class UnsupportedLayerError(XspecError, TypeError):
    kind = "unsupported-layer"
