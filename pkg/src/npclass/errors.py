"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 2 (argparse),
FeasibilityError exits 3, NumericalError and subclasses exit 4.
"""


class NpClassError(Exception):
    """Base class for all package errors."""


class DomainError(NpClassError, ValueError):
    """An argument is outside its documented domain."""


class FeasibilityError(NpClassError):
    """A requested procedure is infeasible for the given sample sizes."""


class NumericalError(NpClassError):
    """A numerical routine failed to converge or produced garbage."""


class SingularMatrixError(NumericalError):
    """A matrix required to be positive definite is (numerically) singular."""
