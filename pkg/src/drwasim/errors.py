"""Exception hierarchy shared across the simulator."""


class DrwaError(Exception):
    """Base class for all simulator errors."""


class TopologyError(DrwaError, ValueError):
    """Malformed or invalid topology description."""


class ConfigError(DrwaError, ValueError):
    """Invalid configuration value; the message names the offending field."""


class WavelengthConflictError(DrwaError, RuntimeError):
    """A reservation would place two lightpaths on the same (link, wavelength).

    This must never happen in a correct simulation; it is raised as a fatal
    invariant breach rather than returned as a blocking outcome.
    """


class UnroutableError(DrwaError, RuntimeError):
    """No path could be constructed even at the maximum hop bound.

    Unreachable on a connected topology with a sane walk budget; kept as a
    hard error so a silent infinite loop is impossible.
    """


class SimulationInvariantError(DrwaError, RuntimeError):
    """A mid-run constraint check failed; the run is aborted."""


class BackendUnavailableError(DrwaError, ImportError):
    """The requested routing kernel backend is not installed."""
