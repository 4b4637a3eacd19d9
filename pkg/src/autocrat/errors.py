"""Exception types shared across the package."""


class AutocratError(Exception):
    """Base class for all package errors."""


class InputError(AutocratError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class NotEnforceableError(AutocratError):
    """A strategy or threshold was requested for a constraint that cannot
    be enforced (CLI exit code 3)."""


class SolverFailure(AutocratError):
    """The LP solver cycled or hit its iteration cap; distinct from an
    infeasible program."""


class SynthesisError(AutocratError):
    """Strategy construction preconditions violated (pair inequalities,
    target constant out of range, empty initial-weight interval)."""
