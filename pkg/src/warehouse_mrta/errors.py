"""Exception hierarchy shared by every module."""


class MRTAError(Exception):
    """Base class for all package errors."""


class ParseError(MRTAError):
    pass


class InvalidLayout(MRTAError):
    pass


class NavigationError(MRTAError):
    pass


class InvalidEndpoint(NavigationError):
    pass


class Unreachable(NavigationError):
    pass


class GenerationError(MRTAError):
    pass


class QueueError(MRTAError):
    pass


class InvalidConfig(MRTAError):
    pass


class InvalidAction(MRTAError):
    pass


class NumericalError(MRTAError):
    pass


class CheckpointError(MRTAError):
    pass
