"""Exception types shared across the package."""


class ArcadeError(Exception):
    """Base class for package errors."""


class ConfigError(ArcadeError):
    """Bad configuration: unknown environment, invalid hyperparameter, malformed spec."""


class ShapeError(ArcadeError):
    """Array dimensions do not match the declared topology or frame size."""


class InvalidActionError(ArcadeError):
    """Action label is not in the controllable object's action set."""


class EpisodeFinishedError(ArcadeError):
    """step() was called on a terminal state."""


class NumericError(ArcadeError):
    """Non-finite value produced during a network pass.

    Carries the index of the offending layer when known.
    """

    def __init__(self, message, layer_index=None):
        super().__init__(message)
        self.layer_index = layer_index


class ParseError(ArcadeError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number
