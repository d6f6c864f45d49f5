"""Exception hierarchy shared by all stochunify modules."""


class StochUnifyError(Exception):
    """Base class for every error raised by this package."""


class NumericError(StochUnifyError, ArithmeticError):
    """Non-finite values or a failed linear solve."""


class DimensionError(StochUnifyError, ValueError):
    """Array lengths or grids do not match."""


class DomainError(StochUnifyError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateStateError(StochUnifyError, ValueError):
    """Wavefunction vanishes (below the density floor) on the whole grid."""


class StabilityError(StochUnifyError, ValueError):
    """Explicit scheme would violate its stability (CFL) condition."""


class CapacityError(StochUnifyError, ValueError):
    """Enumeration too large for the requested evaluation mode."""


class ConfigError(StochUnifyError, ValueError):
    """Invalid experiment configuration.

    ``problems`` maps every offending key to a message so that a single
    run reports all of them at once.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = {"config": problems}
        self.problems = dict(problems)
        lines = [f"{key}: {msg}" for key, msg in sorted(self.problems.items())]
        super().__init__("invalid configuration\n  " + "\n  ".join(lines))
