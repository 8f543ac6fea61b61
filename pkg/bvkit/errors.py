"""Exception hierarchy for bvkit.

Both concrete errors subclass ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""


class BVKitError(Exception):
    """Base class for all bvkit errors."""


class DomainError(BVKitError, ValueError):
    """Raised when a point or offset lies outside the admissible domain."""


class ArgumentError(BVKitError, ValueError):
    """Raised for malformed inputs: bad specs, sequences, tables or files."""
