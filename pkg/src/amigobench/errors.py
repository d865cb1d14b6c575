"""Shared exception types.

Exit-code mapping used by the CLI lives in `amigobench.cli`; library code
raises these and never calls sys.exit.
"""


class AmigoError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AmigoError):
    """Input failed a documented precondition or schema check."""


class NotFoundError(AmigoError):
    """A referenced entity (device, instruction, record) does not exist."""


class LifecycleError(AmigoError):
    """An operation would move a state machine backwards."""


class ParseError(ValidationError):
    """A wire payload or report file could not be decoded.

    Carries the offending field or token in the message so callers can
    surface actionable errors.
    """


class ProbeError(AmigoError):
    """A probe could not complete at the transport level."""


class TransportError(AmigoError):
    """The agent could not reach the control server."""


class StageError(AmigoError):
    """A multi-stage pipeline (demo, report emission) failed.

    `stage` names the stage that failed so operators can tell a scenario
    problem from an analysis problem.
    """

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
