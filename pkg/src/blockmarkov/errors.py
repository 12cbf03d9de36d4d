"""Exception types raised across the package."""


class BlockMarkovError(Exception):
    """Base class for all package errors."""


class RejectedModel(BlockMarkovError, ValueError):
    """A block model or layout violates one of its invariants."""


class ZeroRow(BlockMarkovError, ZeroDivisionError):
    """A row of the frequency matrix is empty, so it cannot be row-normalized."""

    def __init__(self, row):
        self.row = row
        super().__init__(f"row {row} of the frequency matrix has no outgoing transitions")


class NoConvergence(BlockMarkovError, RuntimeError):
    """The fixed-point iteration did not reach the requested tolerance."""

    def __init__(self, residual, iterations, failed=None):
        self.residual = residual
        self.iterations = iterations
        self.failed = [] if failed is None else list(failed)
        msg = f"no convergence after {iterations} iterations (residual {residual:.3e})"
        if self.failed:
            msg += f"; {len(self.failed)} grid point(s) failed"
        super().__init__(msg)


class NumericalFailure(BlockMarkovError, RuntimeError):
    """A dense linear-algebra routine failed."""


class ResourceLimit(BlockMarkovError, RuntimeError):
    """A combinatorial computation would exceed its configured budget."""


class CapExceeded(BlockMarkovError, RuntimeError):
    """No mixing horizon below the search cap achieves the requested accuracy."""


class ParseError(BlockMarkovError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyInput(BlockMarkovError, ValueError):
    """No usable transitions remain."""


class EmptyCluster(BlockMarkovError, ValueError):
    def __init__(self, cluster):
        self.cluster = cluster
        super().__init__(f"cluster {cluster} has no states")


class ZeroClusterRow(BlockMarkovError, ValueError):
    def __init__(self, cluster):
        self.cluster = cluster
        super().__init__(f"cluster {cluster} has no outgoing transitions")
