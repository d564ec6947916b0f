"""Exception hierarchy for boxes_sim."""


class BoxesError(Exception):
    """Base class for every error raised by this package."""


class GridTooSmall(BoxesError, ValueError):
    pass


class AliasingRisk(BoxesError, ValueError):
    pass


class ZeroField(BoxesError, ValueError):
    pass


class NegativeDt(BoxesError, ValueError):
    pass


class PathMismatch(BoxesError, ValueError):
    pass


class InvalidGeometry(BoxesError, ValueError):
    pass


class GridMismatch(BoxesError, ValueError):
    pass


class TimeMismatch(BoxesError, ValueError):
    pass


class BeforeArrival(BoxesError, ValueError):
    pass


class ZeroDensity(BoxesError, ValueError):
    pass


class MissingFinalCondition(BoxesError, ValueError):
    pass


class InvalidConfig(BoxesError, ValueError):
    """Configuration could not be turned into a scenario.

    ``problems`` holds one ``(location, message)`` pair per offending key so
    that callers can report all of them at once.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [("config", problems)]
        self.problems = list(problems)
        super().__init__("; ".join(f"{where}: {msg}" for where, msg in self.problems))
