"""Analytic fork-rate engine.

A soft fork happens when the two fastest miners solve the puzzle within
the block propagation delay of each other.  With exponential mining times
the fork probability conditioned on known rates ``lam_i`` is

    C(d | {lam}) = 1 - sum_i (lam_i / L) * exp(-d * (L - lam_i)),  L = sum lam_i.

Averaging over a distribution of rates turns the sum into a semi-infinite
integral over products of Laplace transforms (see :mod:`.quadrature`):

    C(d) = integral_0^inf sum_i W_i(x) * [ prod_{j!=i} L_j(x)
                                           - prod_{j!=i} L_j(d + x) ] dx.

The bracketed difference form is equivalent to the usual ``1 - integral``
but is evaluated here as a positive integrand built from ``expm1``-stable
decrements, so small fork rates keep full relative accuracy instead of
dying by cancellation against 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateHHI, DegenerateMinerSet, NonConvergent, ShareSumViolation
from .model import (
    Fixed,
    ForkRateResult,
    HashRateModel,
    IIDNull,
    INIDNull,
    MinerSet,
    SemiEmpiricalIID,
    SemiEmpiricalINID,
)
from .quadrature import (
    DEFAULT_CONFIG,
    Exponential,
    LogNormal,
    MixtureTransform,
    NullFamily,
    PosteriorTransform,
    QuadratureConfig,
    TruncatedPowerLaw,
    _integrate_semi_infinite,
    transform_for,
)

__all__ = [
    "ImpliedResult",
    "hhi",
    "hhi_from_counts",
    "conditional_fork_rate",
    "pdf_delta_conditional",
    "taylor_fork_rate",
    "fork_rate_iid",
    "fork_rate_inid",
    "fork_rate_semi_empirical",
    "fork_rate",
    "implied_delta0",
    "implied_hhi",
]

_SHARE_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ImpliedResult:
    """Inverted model parameter; ``valid`` is False when it leaves its domain."""

    value: float
    valid: bool


def hhi(shares: Sequence[float]) -> float:
    """Herfindahl-Hirschman concentration index, sum of squared shares."""
    arr = np.asarray(shares, dtype=float)
    if arr.size == 0 or np.any(arr < 0):
        raise ShareSumViolation("shares must be non-negative and non-empty")
    total = math.fsum(arr.tolist())
    if abs(total - 1.0) > _SHARE_SUM_TOL:
        raise ShareSumViolation(f"shares sum to {total!r}, expected 1")
    return float(np.sum(arr * arr))


def hhi_from_counts(counts) -> float:
    """Concentration of mined blocks: sum over miners of (b_i / B)^2."""
    return hhi(counts.shares)


def _require_competition(n: int):
    if n < 2:
        raise DegenerateMinerSet(f"need >= 2 miners for a fork rate, got {n}")


def conditional_fork_rate(miners: MinerSet, delta0: float) -> ForkRateResult:
    """Fork probability for exactly known rates (closed form).

    Evaluated as ``sum_i share_i * (-expm1(-delta0 * (L - lam_i)))`` which
    is exact at ``delta0 = 0`` and keeps relative precision for tiny rates.
    """
    _require_competition(miners.n)
    if delta0 < 0:
        raise ValueError(f"delta0 must be >= 0, got {delta0}")
    total = miners.total
    terms = [
        (lam / total) * (-math.expm1(-delta0 * (total - lam)))
        for lam in miners.lambdas
    ]
    value = min(math.fsum(terms), 1.0)
    return ForkRateResult(
        value=value,
        method="conditional",
        error_estimate=4.0 * np.finfo(float).eps * miners.n * max(value, 1e-300),
        inputs_echo=f"fixed rates, n={miners.n}, total={total!r}, delta0={delta0!r}",
        characteristic_time=delta0 * total,
    )


def pdf_delta_conditional(miners: MinerSet, delta: float) -> float:
    """Density of the solve-time gap between the two fastest miners.

    At ``delta = 0`` this equals ``total * (1 - HHI)``, the sensitivity of
    the fork rate to the propagation delay.
    """
    _require_competition(miners.n)
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    total = miners.total
    terms = [
        lam * (total - lam) * math.exp(-delta * (total - lam)) / total
        for lam in miners.lambdas
    ]
    return math.fsum(terms)


def taylor_fork_rate(lambda_total: float, hhi_value: float, delta0: float) -> ForkRateResult:
    """First-order fork rate ``delta0 * lambda_total * (1 - HHI)``, clamped to [0, 1]."""
    if not (0.0 < hhi_value <= 1.0):
        raise ValueError(f"hhi must lie in (0, 1], got {hhi_value}")
    if delta0 < 0:
        raise ValueError(f"delta0 must be >= 0, got {delta0}")
    if not (lambda_total > 0):
        raise ValueError(f"lambda_total must be > 0, got {lambda_total}")
    raw = delta0 * lambda_total * (1.0 - hhi_value)
    value = min(max(raw, 0.0), 1.0)
    return ForkRateResult(
        value=value,
        method="taylor",
        error_estimate=0.5 * raw * raw if raw < 1.0 else 1.0,
        inputs_echo=(
            f"taylor, lambda_total={lambda_total!r}, hhi={hhi_value!r}, "
            f"delta0={delta0!r}"
        ),
        characteristic_time=delta0 * lambda_total,
    )


# ---------------------------------------------------------------------------
# Quadrature-backed unconditional fork rates
# ---------------------------------------------------------------------------


def _finalize(value: float, err: float, cfg: QuadratureConfig) -> tuple[float, float]:
    """Clamp quadrature noise just outside [0, 1]; reject larger excursions."""
    slack = 10.0 * cfg.rel_tol
    if value < -slack or value > 1.0 + slack:
        raise NonConvergent(f"fork rate {value!r} leaves [0, 1] beyond tolerance")
    return min(max(value, 0.0), 1.0), err


def _iid_positive_integral(transform, n: int, delta0: float, cfg: QuadratureConfig):
    """C = n * integral W(x) L(x)^(n-1) (-expm1((n-1) * dec(x, d))) dx."""

    def integrand(x: np.ndarray) -> np.ndarray:
        log_w = transform.log_laplace_weighted(x)
        log_l = transform.log_laplace(x)
        dec = transform.log_laplace_decrement(x, delta0)
        return n * np.exp(log_w + (n - 1) * log_l) * (-np.expm1((n - 1) * dec))

    scale = 1.0 / (n * transform.mean())
    return _integrate_semi_infinite(integrand, cfg, scale=scale)


def _excluding_row_sums(m: np.ndarray) -> np.ndarray:
    """Column sums of ``m`` excluding each row in turn, -inf safe.

    Entries may be -inf (a transform that underflowed); a column sum that
    still contains one after the exclusion stays -inf.
    """
    neg = np.isneginf(m)
    if not neg.any():
        return m.sum(axis=0, keepdims=True) - m
    n_neg = neg.sum(axis=0)
    finite_sum = np.where(neg, 0.0, m).sum(axis=0)
    out = finite_sum[None, :] - np.where(neg, 0.0, m)
    keeps_inf = (n_neg[None, :] >= 2) | ((n_neg[None, :] == 1) & ~neg)
    return np.where(keeps_inf, -np.inf, out)


def _inid_positive_integral(transforms, delta0: float, cfg: QuadratureConfig):
    """C = integral sum_i W_i(x) prod_{j!=i} L_j(x) (-expm1(sum_{j!=i} dec_j)) dx."""

    def integrand(x: np.ndarray) -> np.ndarray:
        log_w = np.stack([t.log_laplace_weighted(x) for t in transforms])
        log_l = np.stack([t.log_laplace(x) for t in transforms])
        dec = np.stack([t.log_laplace_decrement(x, delta0) for t in transforms])
        rest_l = _excluding_row_sums(log_l)
        rest_dec = _excluding_row_sums(dec)
        return np.sum(np.exp(log_w + rest_l) * (-np.expm1(rest_dec)), axis=0)

    scale = 1.0 / math.fsum(t.mean() for t in transforms)
    return _integrate_semi_infinite(integrand, cfg, scale=scale)


def _closed_form_integral(family, n: int, delta0: float, cfg: QuadratureConfig):
    """Reduced integrand for exponential / truncated-power-law families.

    For a Gamma-form family with shape k and rate b the no-fork integrand
    collapses to ``n k b^(nk) / ((b+x)^(1+k) (d+b+x)^((n-1)k))``; the fork
    rate is its difference against the ``d = 0`` normalization, folded into
    one ``expm1`` factor.
    """
    if isinstance(family, Exponential):
        k, b = 1.0, family.rate
    else:
        k, b = family.shape, family.beta

    log_pref = math.log(n) + math.log(k) + n * k * math.log(b)

    def integrand(x: np.ndarray) -> np.ndarray:
        log_bx = np.log(b + x)
        base = np.exp(log_pref - (1.0 + k) * log_bx - (n - 1) * k * log_bx)
        bracket = -np.expm1(-(n - 1) * k * np.log1p(delta0 / (b + x)))
        return base * bracket

    return _integrate_semi_infinite(integrand, cfg, scale=b / n)


def fork_rate_iid(
    family: NullFamily,
    n: int,
    delta0: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    method: str = "auto",
) -> ForkRateResult:
    """Unconditional fork rate for n miners with i.i.d. rates.

    ``method='auto'`` uses the reduced closed-form integrand where one
    exists (exponential, truncated power law) and generic transform
    quadrature otherwise; ``method='quadrature'`` forces the generic path.
    """
    _require_competition(n)
    if delta0 < 0:
        raise ValueError(f"delta0 must be >= 0, got {delta0}")
    has_closed_form = isinstance(family, (Exponential, TruncatedPowerLaw))
    if method == "auto":
        method = "closed_form" if has_closed_form else "quadrature"
    if method == "closed_form":
        if not has_closed_form:
            raise ValueError(f"no closed form for {type(family).__name__}")
        raw, err = _closed_form_integral(family, n, delta0, cfg)
    elif method == "quadrature":
        raw, err = _iid_positive_integral(transform_for(family, cfg), n, delta0, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    value, err = _finalize(float(raw), float(err), cfg)
    return ForkRateResult(
        value=value,
        method=method,
        error_estimate=err,
        inputs_echo=f"iid {family!r}, n={n}, delta0={delta0!r}",
    )


def fork_rate_inid(
    members: Sequence,
    delta0: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> ForkRateResult:
    """Unconditional fork rate for independent, non-identical miners.

    ``members`` may mix null families, per-miner posterior transforms,
    point masses, or anything exposing the log-transform interface.
    """
    _require_competition(len(members))
    if delta0 < 0:
        raise ValueError(f"delta0 must be >= 0, got {delta0}")
    transforms = [
        transform_for(m, cfg)
        if isinstance(m, (Exponential, LogNormal, TruncatedPowerLaw))
        else m
        for m in members
    ]
    raw, err = _inid_positive_integral(transforms, delta0, cfg)
    value, err = _finalize(float(raw), float(err), cfg)
    return ForkRateResult(
        value=value,
        method="quadrature",
        error_estimate=err,
        inputs_echo=f"inid, n={len(members)}, delta0={delta0!r}",
    )


def fork_rate_semi_empirical(
    model: SemiEmpiricalIID | SemiEmpiricalINID,
    delta0: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> ForkRateResult:
    """Fork rate under block-count posteriors.

    The i.i.d. variant draws every miner from the posterior mixture; the
    independent variant assigns miner i its own posterior and composes the
    per-miner transforms inside the generic product integral.
    """
    _require_competition(model.counts.n)
    if delta0 < 0:
        raise ValueError(f"delta0 must be >= 0, got {delta0}")
    gamma = model.gamma
    if isinstance(model, SemiEmpiricalIID):
        mixture = MixtureTransform(
            [PosteriorTransform(b, gamma) for b in model.counts.counts]
        )
        raw, err = _iid_positive_integral(mixture, model.counts.n, delta0, cfg)
        detail = "iid mixture"
    else:
        transforms = [PosteriorTransform(b, gamma) for b in model.counts.counts]
        raw, err = _inid_positive_integral(transforms, delta0, cfg)
        detail = "inid per-miner"
    value, err = _finalize(float(raw), float(err), cfg)
    return ForkRateResult(
        value=value,
        method="semi_empirical",
        error_estimate=err,
        inputs_echo=(
            f"semi-empirical {detail}, n={model.counts.n}, "
            f"gamma={gamma!r}, delta0={delta0!r}"
        ),
    )


def fork_rate(
    model: HashRateModel,
    delta0: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> ForkRateResult:
    """Dispatch to the natural method for the given hash-rate model."""
    if isinstance(model, Fixed):
        return conditional_fork_rate(model.miners, delta0)
    if isinstance(model, IIDNull):
        return fork_rate_iid(model.family, model.n, delta0, cfg)
    if isinstance(model, INIDNull):
        return fork_rate_inid(model.families, delta0, cfg)
    if isinstance(model, (SemiEmpiricalIID, SemiEmpiricalINID)):
        return fork_rate_semi_empirical(model, delta0, cfg)
    raise TypeError(f"unknown hash-rate model {model!r}")


# ---------------------------------------------------------------------------
# First-order inversions
# ---------------------------------------------------------------------------


def implied_delta0(
    fork_rate_value: float, lambda_total: float, hhi_value: float
) -> ImpliedResult:
    """Propagation delay that reproduces a fork rate at first order."""
    if not (0.0 <= fork_rate_value < 1.0):
        raise ValueError(f"fork rate must lie in [0, 1), got {fork_rate_value}")
    if not (lambda_total > 0):
        raise ValueError(f"lambda_total must be > 0, got {lambda_total}")
    if hhi_value >= 1.0:
        raise DegenerateHHI("a single-miner market implies no forks at any delay")
    if not (0.0 < hhi_value):
        raise ValueError(f"hhi must lie in (0, 1), got {hhi_value}")
    value = fork_rate_value / (lambda_total * (1.0 - hhi_value))
    return ImpliedResult(value=value, valid=value >= 0.0)


def implied_hhi(
    fork_rate_value: float, lambda_total: float, delta0: float
) -> ImpliedResult:
    """Concentration level that reproduces a fork rate at first order.

    A result below 0 (the observed fork rate is too high for the assumed
    delay) or above 1 is reported with ``valid=False`` rather than raised.
    """
    if not (0.0 <= fork_rate_value < 1.0):
        raise ValueError(f"fork rate must lie in [0, 1), got {fork_rate_value}")
    if not (lambda_total > 0):
        raise ValueError(f"lambda_total must be > 0, got {lambda_total}")
    if not (delta0 > 0):
        raise ValueError(f"delta0 must be > 0, got {delta0}")
    value = 1.0 - fork_rate_value / (lambda_total * delta0)
    return ImpliedResult(value=value, valid=0.0 <= value <= 1.0)
