"""Exception types shared across the library and mapped to CLI exit codes."""


class CopulaGridError(Exception):
    """Base class for every error raised by this package."""


class ParseError(CopulaGridError, ValueError):
    """A document could not be parsed or does not match the schema."""


class ValidationError(CopulaGridError, ValueError):
    """A value violates a structural invariant (masses, margins, ordering)."""


class DomainError(ValidationError):
    """A numeric argument lies outside the operation's domain."""


class CompatibilityError(CopulaGridError, ValueError):
    """Index subsets, labels, shapes, or kinds do not line up."""


class ConfigurationError(CopulaGridError, ValueError):
    """An operation is missing required configuration (marginals, grids)."""


class UnsupportedError(CopulaGridError, ValueError):
    """The request falls in a case the library deliberately does not handle."""


class EvaluationError(CopulaGridError, ValueError):
    """A caller-supplied functional produced an unusable value."""


class InternalError(CopulaGridError, RuntimeError):
    """An internal solver guarantee failed; indicates a bug, not bad input."""
