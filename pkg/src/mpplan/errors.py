class PlanningError(Exception):
    """Base class for all errors raised by mpplan."""


class TopologyError(PlanningError):
    """Malformed topology document or invalid graph."""


class OccupancyError(PlanningError):
    """Spectrum slot double-booked or released by a non-owner.

    Always a planner logic bug; a run hitting this must abort.
    """


class QotDomainError(PlanningError, ValueError):
    """Frequency or parameter outside the modeled domain."""


class ConfigError(PlanningError, ValueError):
    """Invalid run configuration, catalog grid or demand input."""
