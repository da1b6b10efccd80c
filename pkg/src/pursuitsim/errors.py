"""Exception hierarchy shared by every layer of the simulator."""


class PursuitError(Exception):
    """Base class for all simulator errors."""


class OutOfBounds(PursuitError):
    """A position fell outside a bounded arena."""


class ObserverRemoved(PursuitError):
    """Observation requested for an agent that has been removed."""


class InvariantViolation(PursuitError):
    """Post-step world state broke an occupancy or bounds invariant."""


class ValidationError(PursuitError, ValueError):
    """A configuration value violates a documented constraint."""


class UnknownKey(ValidationError):
    """A configuration document contains a key that is not part of the format."""


class ScenarioInvalid(ValidationError):
    """A scenario cannot be run as configured."""


class Infeasible(ScenarioInvalid):
    """Agents plus obstacles do not fit in the free cells of the arena."""


class ParseError(PursuitError):
    """A configuration file is not syntactically valid."""


class InsufficientPoints(PursuitError, ValueError):
    """Too few usable points for a regression."""


class DegenerateInput(PursuitError, ValueError):
    """Input makes the requested statistic undefined."""


class CorruptRecord(PursuitError):
    """A trajectory file is truncated or malformed."""
