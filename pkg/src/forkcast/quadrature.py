"""Integration primitives and hash-rate distribution transforms.

Every analytic fork-rate expression in this package reduces to a
semi-infinite integral over products of Laplace transforms of hash-rate
distributions:

    L(s) = E[exp(-s * lam)]          (plain transform)
    W(s) = E[lam * exp(-s * lam)]    (rate-weighted transform)

This module provides

* an adaptive Gauss-Kronrod (G7/K15) integrator on finite intervals and,
  through the substitution ``x = scale * t / (1 - t)``, on ``(0, inf)``;
* the three null hash-rate families (exponential, log-normal, truncated
  power law) with densities, samplers and closed-form or numeric
  transforms;
* the per-miner posterior transforms conditioned on an observed block
  count, used by the semi-empirical fork-rate formulas.

Products of many transform factors are accumulated as sums of logarithms
(miner counts can reach hundreds, which would underflow in linear space),
and every transform exposes a ``log_laplace_decrement`` that evaluates
``log L(s + d) - log L(s)`` to full relative precision.  The decrement is
what keeps small fork rates (1e-5 and below) accurate: fork probabilities
are integrals of *differences* of transform products, and forming those
differences naively would lose all significant digits.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import InvalidFamily, NonConvergent, NonFinite

__all__ = [
    "QuadratureConfig",
    "DEFAULT_CONFIG",
    "Exponential",
    "LogNormal",
    "TruncatedPowerLaw",
    "NullFamily",
    "integrate_semi_infinite",
    "laplace",
    "laplace_weighted",
    "posterior_laplace",
    "posterior_laplace_weighted",
    "ExpTransform",
    "LogNormalTransform",
    "TplTransform",
    "PointMassTransform",
    "PosteriorTransform",
    "MixtureTransform",
    "transform_for",
    "posterior_mixture",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budget for the adaptive integrator.

    ``rel_tol`` and ``abs_tol`` bound the accepted error as
    ``max(abs_tol, rel_tol * |I|)``.  The defaults leave ample headroom
    below the smallest fork rates of interest (~1e-5).
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0):
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not (self.abs_tol >= 0):
            raise ValueError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions}"
            )


DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 pair
# ---------------------------------------------------------------------------

# Standard K15 abscissae/weights on [-1, 1]; the embedded G7 rule reuses
# every other node.  |K15 - G7| per segment is a conservative error bound.
_K15_HALF_NODES = np.array(
    [
        0.991455371120813,
        0.949107912342759,
        0.864864423359769,
        0.741531185599394,
        0.586087235467691,
        0.405845151377397,
        0.207784955007898,
        0.0,
    ]
)
_K15_HALF_WEIGHTS = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
    ]
)
_G7_HALF_WEIGHTS = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
    ]
)

_NODES = np.concatenate([-_K15_HALF_NODES[:-1], _K15_HALF_NODES[::-1]])
_WEIGHTS_K = np.concatenate([_K15_HALF_WEIGHTS[:-1], _K15_HALF_WEIGHTS[::-1]])
_WEIGHTS_G = np.zeros(15)
_WEIGHTS_G[1:14:2] = np.concatenate(
    [_G7_HALF_WEIGHTS[:-1], _G7_HALF_WEIGHTS[::-1]]
)
_G_MASK = _WEIGHTS_G != 0.0

Integrand = Callable[[np.ndarray], np.ndarray]


def _gk_segment(f: Integrand, a: float, b: float):
    """Evaluate one K15 segment; returns (k15, |k15 - g7| per component)."""
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b) + half * _NODES
    vals = np.asarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFinite(f"integrand non-finite on [{a!r}, {b!r}]")
    k15 = half * np.tensordot(_WEIGHTS_K, vals, axes=(0, 0))
    g7 = half * np.tensordot(_WEIGHTS_G[_G_MASK], vals[_G_MASK], axes=(0, 0))
    return k15, np.abs(k15 - g7)


def _adaptive(f: Integrand, edges: Sequence[float], cfg: QuadratureConfig):
    """Adaptive bisection over initial ``edges``; batched integrands allowed.

    ``f`` maps an array of points to values of shape ``(npoints,)`` or
    ``(npoints, m)``; all ``m`` components are refined until each meets the
    tolerance.  Returns ``(value, error)`` with matching shapes.
    """
    heap = []
    counter = 0
    total_val = None
    total_err = None
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = _gk_segment(f, a, b)
        total_val = val if total_val is None else total_val + val
        total_err = err if total_err is None else total_err + err
        heapq.heappush(heap, (-float(np.max(err)), counter, a, b, val, err))
        counter += 1

    n_segments = len(edges) - 1
    while True:
        bound = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total_val))
        if np.all(total_err <= bound):
            break
        if n_segments >= cfg.max_subdivisions:
            raise NonConvergent(
                f"tolerance not reached after {n_segments} segments "
                f"(error {np.max(total_err):.3e})"
            )
        _, _, a, b, val, err = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        val_l, err_l = _gk_segment(f, a, mid)
        val_r, err_r = _gk_segment(f, mid, b)
        total_val = total_val - val + val_l + val_r
        total_err = total_err - err + err_l + err_r
        heapq.heappush(heap, (-float(np.max(err_l)), counter, a, mid, val_l, err_l))
        counter += 1
        heapq.heappush(heap, (-float(np.max(err_r)), counter, mid, b, val_r, err_r))
        counter += 1
        n_segments += 1

    return total_val, total_err


def _integrate_finite(
    f: Integrand, edges: Sequence[float], cfg: QuadratureConfig = DEFAULT_CONFIG
):
    return _adaptive(f, edges, cfg)


def _integrate_semi_infinite(
    f: Integrand, cfg: QuadratureConfig = DEFAULT_CONFIG, *, scale: float = 1.0
):
    """Integrate ``f`` over (0, inf) via ``x = scale * t / (1 - t)``.

    ``scale`` should match the characteristic decay length of the
    integrand so the adaptive refinement starts close to the mass.
    """
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError(f"scale must be positive and finite, got {scale}")

    def g(t: np.ndarray) -> np.ndarray:
        one_minus = 1.0 - t
        x = scale * t / one_minus
        jac = scale / one_minus**2
        vals = np.asarray(f(x), dtype=float)
        if vals.ndim == 1:
            return vals * jac
        return vals * jac[:, None]

    return _adaptive(g, (0.0, 0.5, 1.0), cfg)


def integrate_semi_infinite(
    f: Integrand, cfg: QuadratureConfig = DEFAULT_CONFIG, *, scale: float = 1.0
) -> float:
    """Return ``integral_0^inf f(x) dx`` to the configured tolerance.

    ``f`` must accept numpy arrays and be finite on (0, inf); raises
    :class:`NonFinite` on NaN/inf evaluations and :class:`NonConvergent`
    when the subdivision budget runs out.
    """
    value, _ = _integrate_semi_infinite(f, cfg, scale=scale)
    return float(value)


# ---------------------------------------------------------------------------
# Null hash-rate families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    """Exponential hash-rate family with rate parameter ``rate`` (= 1/mean)."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise InvalidFamily(f"Exponential needs rate > 0, got {self.rate}")

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.rate * np.exp(-self.rate * lam)

    def mean(self) -> float:
        return 1.0 / self.rate

    def std(self) -> float:
        return 1.0 / self.rate

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size=size)


@dataclass(frozen=True)
class LogNormal:
    """Log-normal hash-rate family: log(lam) ~ Normal(mu, sigma^2)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidFamily(f"LogNormal needs sigma > 0, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise InvalidFamily(f"LogNormal needs finite mu, got {self.mu}")

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        pos = lam > 0
        z = (np.log(lam[pos]) - self.mu) / self.sigma
        out[pos] = np.exp(-0.5 * z * z) / (
            lam[pos] * self.sigma * math.sqrt(2.0 * math.pi)
        )
        return out

    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def std(self) -> float:
        return self.mean() * math.sqrt(math.expm1(self.sigma**2))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.lognormal(self.mu, self.sigma, size=size)


@dataclass(frozen=True)
class TruncatedPowerLaw:
    """Power law with exponential cutoff: density ~ lam^-alpha * exp(-beta*lam).

    Equivalent to a Gamma distribution with shape ``1 - alpha`` and rate
    ``beta``; ``alpha = 0`` reduces to ``Exponential(beta)``.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha < 1 and math.isfinite(self.alpha)):
            raise InvalidFamily(
                f"TruncatedPowerLaw needs alpha < 1, got {self.alpha}"
            )
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise InvalidFamily(f"TruncatedPowerLaw needs beta > 0, got {self.beta}")

    @property
    def shape(self) -> float:
        return 1.0 - self.alpha

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        pos = lam > 0
        log_norm = self.shape * math.log(self.beta) - math.lgamma(self.shape)
        out[pos] = np.exp(
            log_norm - self.alpha * np.log(lam[pos]) - self.beta * lam[pos]
        )
        return out

    def mean(self) -> float:
        return self.shape / self.beta

    def std(self) -> float:
        return math.sqrt(self.shape) / self.beta

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.gamma(self.shape, 1.0 / self.beta, size=size)


NullFamily = Union[Exponential, LogNormal, TruncatedPowerLaw]


# ---------------------------------------------------------------------------
# Laplace transforms of the families
# ---------------------------------------------------------------------------

# Standard-normal quadrature window: phi(z) underflows to zero well before
# |z| = 40, so the truncation error is below double precision.
_Z_EDGES = (-40.0, -8.0, -2.0, 0.0, 2.0, 8.0, 40.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _lognormal_expect(
    mu: float,
    sigma: float,
    s: np.ndarray,
    cfg: QuadratureConfig,
    *,
    weighted: bool = False,
    decrement: float | None = None,
) -> np.ndarray:
    """E[lam^w * exp(-s*lam) * (1 - exp(-d*lam))] over log-normal lam.

    Integrates over z = (log lam - mu)/sigma so the lam -> 0 singularity
    disappears and no tail truncation of lam is needed.  Batched over
    ``s``.  With ``decrement=d`` the factor ``(1 - exp(-d*lam))`` is
    included, which is how difference quantities keep relative accuracy.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))

    def integrand(z: np.ndarray) -> np.ndarray:
        log_lam = mu + sigma * z
        lam = np.exp(log_lam)
        log_phi = -0.5 * z * z - _LOG_SQRT_2PI
        expo = -np.outer(lam, s) + log_phi[:, None]
        if weighted:
            expo += log_lam[:, None]
        vals = np.exp(expo)
        if decrement is not None:
            vals *= -np.expm1(-decrement * lam)[:, None]
        return vals

    value, _ = _integrate_finite(integrand, _Z_EDGES, cfg)
    return value


def laplace(
    family: NullFamily, s: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """E[exp(-s*lam)] for the family; closed form except for the log-normal."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if isinstance(family, Exponential):
        return family.rate / (family.rate + s)
    if isinstance(family, TruncatedPowerLaw):
        return math.exp(family.shape * math.log(family.beta / (family.beta + s)))
    if isinstance(family, LogNormal):
        return float(_lognormal_expect(family.mu, family.sigma, s, cfg)[0])
    raise InvalidFamily(f"unknown family {family!r}")


def laplace_weighted(
    family: NullFamily, s: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> float:
    """E[lam * exp(-s*lam)]; equals -d/ds of :func:`laplace`."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if isinstance(family, Exponential):
        return family.rate / (family.rate + s) ** 2
    if isinstance(family, TruncatedPowerLaw):
        k = family.shape
        return math.exp(
            math.log(k) + k * math.log(family.beta) - (k + 1.0) * math.log(family.beta + s)
        )
    if isinstance(family, LogNormal):
        return float(
            _lognormal_expect(family.mu, family.sigma, s, cfg, weighted=True)[0]
        )
    raise InvalidFamily(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Posterior transforms conditioned on an observed block count
# ---------------------------------------------------------------------------
#
# A miner that mined b blocks while the network produced B blocks at total
# rate Lambda has (flat-prior) posterior rate density
#
#     p(lam | b) = exp(-(b - gamma*lam)^2 / (2*gamma*lam)) / sqrt(2*pi*lam/gamma)
#
# with gamma = B / Lambda (seconds per unit rate).  Its Laplace transform
# has the closed form  exp(b*(1-u)) / u  with  u = sqrt(1 + 2s/gamma).


def posterior_laplace(b: float, gamma: float, s: float) -> float:
    """E[exp(-s*lam)] under the block-count posterior; value in (0, 1]."""
    if not (gamma > 0):
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    u2 = 1.0 + 2.0 * s / gamma
    u = math.sqrt(u2)
    return math.exp(b * (1.0 - u) - 0.5 * math.log(u2))


def posterior_laplace_weighted(b: float, gamma: float, s: float) -> float:
    """E[lam * exp(-s*lam)] under the block-count posterior."""
    if not (gamma > 0):
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    u2 = 1.0 + 2.0 * s / gamma
    u = math.sqrt(u2)
    return math.exp(
        math.log1p(b * u) + b * (1.0 - u) - math.log(gamma) - 1.5 * math.log(u2)
    )


# ---------------------------------------------------------------------------
# Vectorized log-domain transforms for the fork-rate engine
# ---------------------------------------------------------------------------


class ExpTransform:
    """Log-domain transform of an exponential rate distribution."""

    def __init__(self, rate: float):
        if not (rate > 0 and math.isfinite(rate)):
            raise InvalidFamily(f"rate must be > 0, got {rate}")
        self.rate = rate

    def log_laplace(self, s: np.ndarray) -> np.ndarray:
        return math.log(self.rate) - np.log(self.rate + s)

    def log_laplace_weighted(self, s: np.ndarray) -> np.ndarray:
        return math.log(self.rate) - 2.0 * np.log(self.rate + s)

    def log_laplace_decrement(self, s: np.ndarray, d: float) -> np.ndarray:
        return -np.log1p(d / (self.rate + s))

    def mean(self) -> float:
        return 1.0 / self.rate


class TplTransform:
    """Log-domain transform of a truncated power law (Gamma form)."""

    def __init__(self, alpha: float, beta: float):
        fam = TruncatedPowerLaw(alpha, beta)  # parameter validation
        self.alpha = fam.alpha
        self.beta = fam.beta
        self.shape = fam.shape

    def log_laplace(self, s: np.ndarray) -> np.ndarray:
        return self.shape * (math.log(self.beta) - np.log(self.beta + s))

    def log_laplace_weighted(self, s: np.ndarray) -> np.ndarray:
        return (
            math.log(self.shape)
            + self.shape * math.log(self.beta)
            - (self.shape + 1.0) * np.log(self.beta + s)
        )

    def log_laplace_decrement(self, s: np.ndarray, d: float) -> np.ndarray:
        return -self.shape * np.log1p(d / (self.beta + s))

    def mean(self) -> float:
        return self.shape / self.beta


class LogNormalTransform:
    """Numeric transform of a log-normal rate distribution."""

    def __init__(self, mu: float, sigma: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
        LogNormal(mu, sigma)  # parameter validation
        self.mu = mu
        self.sigma = sigma
        # inner integrals must be tighter than the outer quadrature that
        # consumes them; the absolute floors (relative to each transform's
        # maximum: 1 for L, the mean for W) let deep-tail evaluations that
        # underflowed to nothing terminate instead of chasing relative
        # accuracy of denormals
        rel = 0.1 * cfg.rel_tol
        subs = cfg.max_subdivisions
        self._cfg_plain = QuadratureConfig(rel, 1e-18, subs)
        self._cfg_weighted = QuadratureConfig(
            rel, 1e-18 * math.exp(mu + 0.5 * sigma**2), subs
        )

    def log_laplace(self, s: np.ndarray) -> np.ndarray:
        vals = _lognormal_expect(self.mu, self.sigma, s, self._cfg_plain)
        with np.errstate(divide="ignore"):
            return np.log(vals)

    def log_laplace_weighted(self, s: np.ndarray) -> np.ndarray:
        vals = _lognormal_expect(
            self.mu, self.sigma, s, self._cfg_weighted, weighted=True
        )
        with np.errstate(divide="ignore"):
            return np.log(vals)

    def log_laplace_decrement(self, s: np.ndarray, d: float) -> np.ndarray:
        if d == 0.0:
            return np.zeros_like(np.atleast_1d(np.asarray(s, dtype=float)))
        base = _lognormal_expect(self.mu, self.sigma, s, self._cfg_plain)
        diff = _lognormal_expect(
            self.mu, self.sigma, s, self._cfg_plain, decrement=d
        )
        # quadrature noise on underflowed tails could push the ratio a hair
        # outside [0, 1]; both clips are harmless (term drops out)
        with np.errstate(divide="ignore"):
            return np.log1p(-np.clip(diff / base, 0.0, 1.0))

    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)


class PointMassTransform:
    """Degenerate transform of a known, fixed rate."""

    def __init__(self, rate: float):
        if not (rate > 0 and math.isfinite(rate)):
            raise InvalidFamily(f"rate must be > 0, got {rate}")
        self.rate = rate

    def log_laplace(self, s: np.ndarray) -> np.ndarray:
        return -self.rate * np.asarray(s, dtype=float)

    def log_laplace_weighted(self, s: np.ndarray) -> np.ndarray:
        return math.log(self.rate) - self.rate * np.asarray(s, dtype=float)

    def log_laplace_decrement(self, s: np.ndarray, d: float) -> np.ndarray:
        return np.full_like(np.atleast_1d(np.asarray(s, dtype=float)), -self.rate * d)

    def mean(self) -> float:
        return self.rate


class PosteriorTransform:
    """Transform of the block-count posterior for one miner."""

    def __init__(self, blocks: float, gamma: float):
        if blocks < 0:
            raise ValueError(f"blocks must be >= 0, got {blocks}")
        if not (gamma > 0 and math.isfinite(gamma)):
            raise ValueError(f"gamma must be > 0, got {gamma}")
        self.blocks = float(blocks)
        self.gamma = gamma

    def _u(self, s: np.ndarray) -> np.ndarray:
        return np.sqrt(1.0 + 2.0 * np.asarray(s, dtype=float) / self.gamma)

    def log_laplace(self, s: np.ndarray) -> np.ndarray:
        u = self._u(s)
        return self.blocks * (1.0 - u) - np.log(u)

    def log_laplace_weighted(self, s: np.ndarray) -> np.ndarray:
        u = self._u(s)
        return (
            np.log1p(self.blocks * u)
            + self.blocks * (1.0 - u)
            - math.log(self.gamma)
            - 3.0 * np.log(u)
        )

    def log_laplace_decrement(self, s: np.ndarray, d: float) -> np.ndarray:
        u1 = self._u(s)
        step = 2.0 * d / self.gamma
        u2 = np.sqrt(u1 * u1 + step)
        # u1 - u2 formed through the difference of squares: no cancellation
        return -self.blocks * step / (u1 + u2) - 0.5 * np.log1p(step / (u1 * u1))

    def mean(self) -> float:
        return (1.0 + self.blocks) / self.gamma


def _logsumexp(rows: np.ndarray, axis: int = 0) -> np.ndarray:
    m = np.max(rows, axis=axis)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = safe_m + np.log(np.sum(np.exp(rows - safe_m), axis=axis))
    return np.where(np.isfinite(m), out, m)


class MixtureTransform:
    """Equal- or general-weight mixture of component transforms.

    The decrement is assembled from the components' own decrements so the
    mixture keeps full relative precision for small ``d``.
    """

    def __init__(self, components: Sequence, log_weights: Sequence[float] | None = None):
        if not components:
            raise ValueError("mixture needs at least one component")
        self.components = tuple(components)
        if log_weights is None:
            lw = -math.log(len(self.components))
            self.log_weights = np.full(len(self.components), lw)
        else:
            self.log_weights = np.asarray(log_weights, dtype=float)
            if self.log_weights.shape != (len(self.components),):
                raise ValueError("log_weights length mismatch")

    def _stack(self, method: str, *args) -> np.ndarray:
        return np.stack([getattr(c, method)(*args) for c in self.components])

    def log_laplace(self, s: np.ndarray) -> np.ndarray:
        rows = self._stack("log_laplace", s) + self.log_weights[:, None]
        return _logsumexp(rows)

    def log_laplace_weighted(self, s: np.ndarray) -> np.ndarray:
        rows = self._stack("log_laplace_weighted", s) + self.log_weights[:, None]
        return _logsumexp(rows)

    def log_laplace_decrement(self, s: np.ndarray, d: float) -> np.ndarray:
        log_l = self._stack("log_laplace", s) + self.log_weights[:, None]
        dec = self._stack("log_laplace_decrement", s, d)
        m = np.max(log_l, axis=0)
        a = np.exp(log_l - m)
        drop = np.sum(a * (-np.expm1(dec)), axis=0)
        total = np.sum(a, axis=0)
        return np.log1p(-drop / total)

    def mean(self) -> float:
        w = np.exp(self.log_weights)
        return float(np.sum(w * np.array([c.mean() for c in self.components])))


def transform_for(family: NullFamily, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Build the log-domain transform backing a null family."""
    if isinstance(family, Exponential):
        return ExpTransform(family.rate)
    if isinstance(family, TruncatedPowerLaw):
        return TplTransform(family.alpha, family.beta)
    if isinstance(family, LogNormal):
        return LogNormalTransform(family.mu, family.sigma, cfg)
    raise InvalidFamily(f"unknown family {family!r}")


def posterior_mixture(counts: Sequence[int], gamma: float) -> MixtureTransform:
    """Equal-weight mixture of per-miner block-count posteriors."""
    return MixtureTransform([PosteriorTransform(b, gamma) for b in counts])
