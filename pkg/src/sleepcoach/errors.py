"""Exception hierarchy shared across the package.

Exceptions raised by analytics paths that must surface a user-facing message
carry that message verbatim (see ``Unavailable``).
"""

# User-facing sentence for any analytics path that cannot be answered.
# Surfaced verbatim; do not reword.
APOLOGY = "I am sorry, I am not able to provide the information at the moment."


class SleepCoachError(Exception):
    """Base class for all package errors."""


# --- domain / validation ---------------------------------------------------

class RangeError(SleepCoachError):
    """A bounded value (score, hour, percentage) is outside its range."""


class OrderError(SleepCoachError):
    """A temporal or magnitude ordering constraint is violated."""


class MissingField(SleepCoachError):
    """A required field is absent from an ingested record."""


class NonFiniteError(SleepCoachError):
    """A numeric input is NaN or infinite."""


# --- context provider -------------------------------------------------------

class ProviderUnavailable(SleepCoachError):
    """The environmental-context provider could not be reached."""


# --- bandit -----------------------------------------------------------------

class DuplicateArm(SleepCoachError):
    pass


class EmptyArmSet(SleepCoachError):
    pass


class DimensionMismatch(SleepCoachError):
    pass


class UnknownArm(SleepCoachError):
    pass


class RewardOutOfRange(SleepCoachError):
    pass


class CorruptState(SleepCoachError):
    """Persisted model state failed checksum or structural validation."""


# --- datastore / analytics --------------------------------------------------

class Unavailable(SleepCoachError):
    """No data can be served for the request; str() is the exact user-facing
    apology sentence."""

    def __init__(self, message: str = APOLOGY):
        super().__init__(message)


# --- statistics ---------------------------------------------------------------

class LengthMismatch(SleepCoachError):
    pass


class ZeroVariance(SleepCoachError):
    pass


class AllZeroDifferences(SleepCoachError):
    pass


class DegenerateX(SleepCoachError):
    pass


class EmptyPhase(SleepCoachError):
    pass


# --- ports --------------------------------------------------------------------

class PortFailure(SleepCoachError):
    """A live provider call failed or timed out; callers fall back to mocks."""
