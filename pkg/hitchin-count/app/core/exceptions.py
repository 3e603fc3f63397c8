"""Exception hierarchy shared by all services and the CLI."""


class HitchinError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(HitchinError, ValueError):
    """Invalid caller input. The CLI maps it to exit code 2."""


class FamilyError(InputError):
    """A point family is not a positive orthogonal family."""


class WindowError(InputError):
    """A local lattice scan was requested below its certified window."""


class ConsistencyError(HitchinError, AssertionError):
    """A mathematical identity failed. The CLI maps it to exit code 1."""
