"""Exception hierarchy shared across the interpreter stack."""


class CrystalError(Exception):
    """Base class for every error raised by this package."""


class ExecError(CrystalError):
    """A semantic-rule premise was violated while executing a statement.

    Inside a transaction these are caught and turned into an atomic abort;
    the pre-transaction state is returned untouched.
    """


class UndefinedIdentifier(ExecError):
    pass


class AlreadyDeclared(ExecError):
    pass


class TypeMismatch(ExecError):
    pass


class ScopeViolation(ExecError):
    pass


class ArityMismatch(ExecError):
    pass


class EmptyStackError(ExecError):
    pass


class ConventionViolation(CrystalError):
    """A transaction program places a global call after a local one."""


class NotWellFormed(CrystalError):
    """A configuration fails its well-formedness predicate."""


class NonMonotone(CrystalError):
    """A mempool shrank between two consecutive steps."""


class NoPendingWork(CrystalError):
    """A step was requested but every program is empty."""
