"""Scalar special functions and the Poisson / binomial tail bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import DomainError

_SQRT2 = math.sqrt(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# B_{2k} / (2k (2k-1)) for the Stirling series of log n!
_STIRLING_COEFFS = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
)


def q_function(lam: float) -> float:
    """Poisson large-deviation rate Q(lam) = lam log lam - lam + 1."""
    if lam < 0:
        raise DomainError(f"Q needs lambda >= 0, got {lam}")
    if lam == 0:
        return 1.0
    return lam * math.log(lam) - lam + 1.0


def normal_cdf(z: float) -> float:
    """Standard normal CDF through the complementary error function."""
    return 0.5 * math.erfc(-z / _SQRT2)


def log_factorial(n: int) -> float:
    """log n!; exact factorials below 20, Stirling series above."""
    if n < 0:
        raise DomainError("log_factorial needs n >= 0")
    if n < 20:
        return math.log(math.factorial(n))
    x = float(n)
    s = (x + 0.5) * math.log(x) - x + _HALF_LOG_2PI
    inv = 1.0 / x
    inv2 = inv * inv
    p = inv
    for c in _STIRLING_COEFFS:
        s += c * p
        p *= inv2
    return s


def poisson_tail_bound(lam: float, alpha: float, side: str) -> float:
    """Upper bound for P(X <= alpha lam) or P(X >= alpha lam), X ~ Poisson(lam).

    The prefactor is min(1, 1/((1-alpha) sqrt(alpha lam))) on the lower side
    and min(1, sqrt(alpha / (2 pi lam)) / (alpha - 1)) on the upper side.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if side == "lower":
        if not 0 <= alpha <= 1:
            raise DomainError("lower tail needs 0 <= alpha <= 1")
        denom = (1.0 - alpha) * math.sqrt(alpha * lam)
    elif side == "upper":
        if alpha < 1:
            raise DomainError("upper tail needs alpha >= 1")
        denom = (alpha - 1.0) / math.sqrt(alpha / (2.0 * math.pi * lam))
    else:
        raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")
    pref = 1.0 if denom <= 1.0 else 1.0 / denom
    return pref * math.exp(-q_function(alpha) * lam)


def _xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0 else x * math.log(y)


@dataclass(frozen=True)
class BinomialTailBound:
    """Chernoff bounds for a binomial tail.

    ``value`` is the relative-entropy form, ``quadratic`` the
    exp(-(p - beta)^2 n / (3 p (1 - p))) form.  The quadratic form is only
    weaker than the entropy form near p: it holds for |beta - p| <= p(1 - p)
    but not everywhere (at p = 0.9, beta = 0 it is exp(-3n) while the exact
    lower tail is 0.1^n).
    """

    value: float
    quadratic: float

    def __float__(self):
        return self.value


def binomial_tail_bound(n_trials: int, p: float, beta: float, side: str) -> BinomialTailBound:
    """Bound for P(Bin(n,p) <= beta n) (lower) or P(Bin(n,p) >= beta n) (upper)."""
    if not 0 < p < 1:
        raise DomainError("need 0 < p < 1")
    if n_trials < 0:
        raise DomainError("need n_trials >= 0")
    if not 0 <= beta <= 1:
        raise DomainError("need 0 <= beta <= 1")
    if side == "lower":
        if beta > p:
            raise DomainError("lower tail needs beta <= p")
    elif side == "upper":
        if beta < p:
            raise DomainError("upper tail needs beta >= p")
    else:
        raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")
    rate = _xlogy(beta, beta / p) + _xlogy(1.0 - beta, (1.0 - beta) / (1.0 - p))
    quad = (p - beta) ** 2 * n_trials / (3.0 * p * (1.0 - p))
    return BinomialTailBound(math.exp(-n_trials * rate), math.exp(-quad))


def _loglog_shape(x: float, constant: float) -> float:
    if x <= 20:
        return 0.0
    return x * math.log(x) - x * math.log(math.log(math.log(x))) + constant * x


def no_small_error_exponent(x: float, constant: float = 0.0) -> float:
    """Reference shape x log x - x log log log x + c x of the error exponent
    for P(no cycle <= m) at x = n/m (zero for x <= 20).

    The O(x) constant is unknown; ``constant`` is a free parameter and
    nothing in the package asserts against it.
    """
    return _loglog_shape(x, constant)


def poisson_tv_exponent(x: float, constant: float = 0.0) -> float:
    """Same reference shape for the total-variation decay at x = n/k."""
    return _loglog_shape(x, constant)
