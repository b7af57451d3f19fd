"""Exception types shared across the package."""


class AdcError(Exception):
    """Base class for all errors raised by this package."""


# algebra
class NotAssociative(AdcError):
    pass


class NoIdentity(AdcError):
    pass


class InvalidOrder(AdcError):
    pass


class TooLarge(AdcError):
    pass


class SizeCap(AdcError):
    pass


class NotAGroup(AdcError):
    pass


# syntax
class ParseError(AdcError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownMonoid(AdcError):
    pass


class UnknownElement(AdcError):
    pass


class ArityMismatch(AdcError):
    pass


class NoMonoidAvailable(AdcError):
    pass


class PrintError(AdcError):
    pass


# words
class TargetTooSmall(AdcError):
    pass


# semantics
class HorizonTooSmall(AdcError):
    pass


class NotBoundaryPoint(AdcError):
    pass


class BodiesNotActiveDomain(AdcError):
    pass


# sorting tree
class BaseTooSmall(AdcError):
    pass


# collapse
class UnsupportedMonoid(AdcError):
    pass


class RamseyExhausted(AdcError):
    pass


# harness
class UnknownSuite(AdcError):
    pass


class NotActiveDomain(AdcError):
    pass
