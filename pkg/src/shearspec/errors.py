"""Exception types shared across the package.

ValidationError maps to CLI exit code 1, NumericalError to exit code 2.
"""


class ValidationError(ValueError):
    """Bad user input: unknown profile, invalid parameter, malformed config."""


class NumericalError(RuntimeError):
    """A solver failed: factorization breakdown, eigensolve non-convergence."""
