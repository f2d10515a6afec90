"""Domain value types shared by the fork-rate engine.

All rates are carried in blocks/second, i.e. the per-miner hash rate is
already normalized by the mining difficulty.  Types are immutable and
freely shareable across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .errors import InvalidModel
from .quadrature import NullFamily

__all__ = [
    "MinerSet",
    "BlockCounts",
    "Fixed",
    "IIDNull",
    "INIDNull",
    "SemiEmpiricalIID",
    "SemiEmpiricalINID",
    "HashRateModel",
    "PeriodRecord",
    "ForkRateResult",
    "characteristic_time",
]


@dataclass(frozen=True)
class MinerSet:
    """Known per-miner hash rates, blocks/s.

    Rates must be positive and finite.  A single-miner set is allowed as a
    degenerate carrier (it can fall out of zero-count dropping); operations
    that need competition between miners enforce two or more themselves.
    """

    lambdas: tuple[float, ...]

    def __init__(self, lambdas: Sequence[float]):
        lams = tuple(float(x) for x in lambdas)
        if len(lams) < 1:
            raise InvalidModel("miner set needs at least one miner")
        if any(not (x > 0 and math.isfinite(x)) for x in lams):
            raise InvalidModel("every hash rate must be positive and finite")
        total = math.fsum(lams)
        if not math.isfinite(total):
            raise InvalidModel("total hash rate overflows")
        object.__setattr__(self, "lambdas", lams)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def total(self) -> float:
        """Aggregate hash rate (compensated summation)."""
        return math.fsum(self.lambdas)

    @property
    def shares(self) -> tuple[float, ...]:
        total = self.total
        return tuple(x / total for x in self.lambdas)

    @property
    def expected_min_time(self) -> float:
        """Expected time to the first mined block, 1/total."""
        return 1.0 / self.total


@dataclass(frozen=True)
class BlockCounts:
    """Per-miner mined-block counts over one observation window."""

    counts: tuple[int, ...]

    def __init__(self, counts: Sequence[int]):
        vals = []
        for c in counts:
            if isinstance(c, bool) or int(c) != c:
                raise InvalidModel(f"block counts must be integers, got {c!r}")
            if c < 0:
                raise InvalidModel(f"block counts must be >= 0, got {c}")
            vals.append(int(c))
        if len(vals) < 1:
            raise InvalidModel("block counts need at least one miner")
        if sum(vals) < 1:
            raise InvalidModel("at least one block must have been mined")
        object.__setattr__(self, "counts", tuple(vals))

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def shares(self) -> tuple[float, ...]:
        total = self.total
        return tuple(c / total for c in self.counts)


@dataclass(frozen=True)
class Fixed:
    """Frequentist/conditional model: rates are known exactly."""

    miners: MinerSet


@dataclass(frozen=True)
class IIDNull:
    """Rates drawn i.i.d. from one null family."""

    family: NullFamily
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidModel(f"i.i.d. null model needs n >= 2, got {self.n}")


@dataclass(frozen=True)
class INIDNull:
    """Rates drawn independently from per-miner families."""

    families: tuple[NullFamily, ...]

    def __init__(self, families: Sequence[NullFamily]):
        fams = tuple(families)
        if len(fams) < 2:
            raise InvalidModel("independent null model needs >= 2 miners")
        object.__setattr__(self, "families", fams)


@dataclass(frozen=True)
class SemiEmpiricalIID:
    """Rates i.i.d. from the mixture of block-count posteriors."""

    counts: BlockCounts
    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidModel(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class SemiEmpiricalINID:
    """Rate of miner i drawn from its own block-count posterior."""

    counts: BlockCounts
    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidModel(f"gamma must be > 0, got {self.gamma}")


HashRateModel = Union[Fixed, IIDNull, INIDNull, SemiEmpiricalIID, SemiEmpiricalINID]


@dataclass(frozen=True)
class PeriodRecord:
    """Aggregated statistics for one observation window of blocks."""

    index: int
    counts: BlockCounts
    lambda_total: float
    n_miners: int
    fork_rate_empirical: float
    prop_p50: float
    prop_p90: float
    prop_p99: float

    def __post_init__(self):
        if not (self.lambda_total > 0 and math.isfinite(self.lambda_total)):
            raise InvalidModel(f"lambda_total must be > 0, got {self.lambda_total}")
        if not (0.0 <= self.fork_rate_empirical <= 1.0):
            raise InvalidModel(
                f"fork rate must lie in [0, 1], got {self.fork_rate_empirical}"
            )
        if not (0.0 < self.prop_p50 <= self.prop_p90 <= self.prop_p99):
            raise InvalidModel(
                "propagation percentiles must satisfy 0 < p50 <= p90 <= p99"
            )
        if self.n_miners != self.counts.n:
            raise InvalidModel("n_miners disagrees with the counts vector")


@dataclass(frozen=True)
class ForkRateResult:
    """A computed fork probability with provenance.

    ``method`` is one of ``conditional``, ``taylor``, ``closed_form``,
    ``quadrature``, ``semi_empirical``, ``monte_carlo``.
    """

    value: float
    method: str
    error_estimate: float
    inputs_echo: str
    characteristic_time: float | None = field(default=None)

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InvalidModel(f"fork rate must lie in [0, 1], got {self.value}")
        if not (self.error_estimate >= 0.0):
            raise InvalidModel(
                f"error estimate must be >= 0, got {self.error_estimate}"
            )


def characteristic_time(delta0: float, lambda_total: float) -> float:
    """Propagation delay over expected block time: ``delta0 * lambda_total``."""
    if delta0 < 0:
        raise ValueError(f"delta0 must be >= 0, got {delta0}")
    if not (lambda_total > 0):
        raise ValueError(f"lambda_total must be > 0, got {lambda_total}")
    return delta0 * lambda_total
