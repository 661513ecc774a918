"""Exception hierarchy shared by all homoscope modules."""


class HomoscopeError(Exception):
    """Base class for every error raised by this package."""


class GraphFormatError(HomoscopeError, ValueError):
    """An edge, label or feature file is malformed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class DegenerateNodeError(HomoscopeError, ValueError):
    """Random-walk normalisation hit nodes with zero degree."""

    def __init__(self, nodes):
        self.nodes = list(int(v) for v in nodes)
        shown = ", ".join(str(v) for v in self.nodes[:20])
        more = "" if len(self.nodes) <= 20 else f" ... ({len(self.nodes)} total)"
        super().__init__(f"zero-degree nodes under random-walk aggregation: {shown}{more}")


class UndefinedMetricError(HomoscopeError, ValueError):
    """A homophily metric is undefined on the given graph."""

    def __init__(self, metric, reason):
        self.metric = metric
        super().__init__(f"{metric} is undefined: {reason}")


class AccuracyError(HomoscopeError, ArithmeticError):
    """Numerical quadrature did not reach the requested tolerance."""

    def __init__(self, achieved, requested):
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"quadrature error bound {achieved:.3g} exceeds tolerance {requested:.3g}"
        )


class SolverError(HomoscopeError, ArithmeticError):
    """Kernel regression linear system could not be solved."""


class ClassAbsentError(HomoscopeError, ValueError):
    """A class required by a classifier has no training samples."""


class PairExhaustionError(HomoscopeError, ValueError):
    """Not enough distinct node pairs to place the requested edges."""
