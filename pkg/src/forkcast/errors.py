"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ForkcastError(Exception):
    """Base class for all package errors."""


class QuadratureError(ForkcastError):
    """Base class for numerical-integration failures."""


class NonConvergent(QuadratureError):
    """Subdivision limit reached before the requested tolerance."""


class NonFinite(QuadratureError):
    """An integrand returned NaN or infinity at an evaluation point."""


class InvalidFamily(ForkcastError, ValueError):
    """A distribution family violates its parameter constraints."""


class InvalidModel(ForkcastError, ValueError):
    """A hash-rate model is unusable (e.g. a sampled rate is non-positive)."""


class ShareSumViolation(ForkcastError, ValueError):
    """Shares passed to a concentration measure do not sum to one."""


class DegenerateHHI(ForkcastError, ValueError):
    """Concentration index of exactly one makes the inversion singular."""


class DegenerateMinerSet(ForkcastError, ValueError):
    """Fewer than two miners remain where the math needs competition."""


class InvalidMoments(ForkcastError, ValueError):
    """Moment pair cannot be mapped to the requested family."""


class AllZero(ForkcastError, ValueError):
    """Every per-miner block count is zero; rates cannot be estimated."""


class InvalidBits(ForkcastError, ValueError):
    """Compact target encoding decodes to a non-positive or out-of-range target."""


class NonContiguous(ForkcastError, ValueError):
    """Block stream has a height gap."""

    def __init__(self, gap_height: int):
        super().__init__(f"non-contiguous block stream: gap at height {gap_height}")
        self.gap_height = gap_height


class EmptyPeriod(ForkcastError, ValueError):
    """A period has no usable rows for the requested statistic."""


class ParseError(ForkcastError, ValueError):
    """A data file could not be parsed; carries file path and line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
