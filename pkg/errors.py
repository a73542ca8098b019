"""
Errors - Exception hierarchy shared by every module

Each error class carries the process exit code the command line returns
for it:
- 2: usage, argument or schema problems
- 3: mathematical domain problems (e.g. |1/p| >= 1)
- 4: a certified counterexample to a proved inequality
"""


class HLLabError(Exception):
    """Base class for all library errors"""

    exit_code: int = 1


class UsageError(HLLabError, ValueError):
    """Invalid arguments, configuration values or file contents"""

    exit_code = 2


class DimensionError(UsageError):
    """Vector or tensor shapes do not match"""


class DomainError(HLLabError, ValueError):
    """Input lies outside the region where a formula or theorem applies"""

    exit_code = 3


class BoundInapplicableError(DomainError):
    """The requested constant bound does not apply to this exponent tuple"""


class OracleUnavailableError(DomainError):
    """An exact norm oracle cannot be used for this input"""


class AscentError(HLLabError, RuntimeError):
    """Alternating maximization lost monotonicity"""


class CertifiedViolationError(HLLabError, AssertionError):
    """A certified norm contradicts a proved inequality"""

    exit_code = 4
