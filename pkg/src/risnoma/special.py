"""Real-argument special functions used by the closed-form metrics.

Regularized incomplete gamma ratios are evaluated with the power series
when ``x < k + 1`` and with the Legendre continued fraction (modified
Lentz) otherwise.  The common prefactor ``x**k * exp(-x) / Gamma(k)`` is
formed in log space; for ``k >= 10`` it is rewritten around ``x = k`` with
a Stirling remainder so that large shapes keep full relative accuracy.

The exponential integral is only needed for negative arguments, so
``Ei(-y) = -E1(y)`` with ``E1`` from its series (``y <= 1``) or continued
fraction (``y > 1``).  Scaled variants (``exp(y) * E1(y)`` and friends)
avoid the overflow/underflow pairs that show up in the outage and rate
formulas.
"""

from __future__ import annotations

import math

__all__ = [
    "DomainError",
    "reg_inc_gamma",
    "log_reg_upper_inc_gamma",
    "exp_integral_ei",
    "exp_integral_e1",
    "exp_e1_scaled",
    "upper_inc_gamma_neg1",
    "exp_upper_inc_gamma_neg1_scaled",
]

EULER_GAMMA = 0.57721566490153286061
_EPS = 2.0 ** -53
_TINY = 1e-300
_MAX_ITER = 1_000_000
_STIRLING_MIN_SHAPE = 10.0


class DomainError(ValueError):
    """Argument outside the domain on which a function is defined here."""


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


def _log1pmx(t: float) -> float:
    """log(1 + t) - t, accurate for small |t|."""
    if abs(t) > 0.25:
        return math.log1p(t) - t
    # alternating series starting at -t**2/2
    total = 0.0
    power = t * t
    n = 2
    while True:
        term = power / n
        total += -term if n % 2 == 0 else term
        if abs(term) <= _EPS * abs(total):
            return total
        power *= t
        n += 1


def _stirling_remainder(k: float) -> float:
    # lgamma(k) - [(k - 1/2) ln k - k + ln(2 pi)/2], asymptotic series, k >= 10
    inv = 1.0 / k
    inv2 = inv * inv
    return inv * (
        1.0 / 12.0
        - inv2 * (1.0 / 360.0
                  - inv2 * (1.0 / 1260.0
                            - inv2 * (1.0 / 1680.0
                                      - inv2 * (1.0 / 1188.0
                                                - inv2 * (691.0 / 360360.0
                                                          - inv2 / 156.0)))))
    )


def _log_prefix(k: float, x: float) -> float:
    """log(x**k * exp(-x) / Gamma(k)) for k > 0, x > 0."""
    if k < _STIRLING_MIN_SHAPE:
        return k * math.log(x) - x - math.lgamma(k)
    t = (x - k) / k
    core = _log1pmx(t) if abs(t) <= 0.5 else (math.log(x) - math.log(k)) - t
    return k * core + 0.5 * math.log(k / (2.0 * math.pi)) - _stirling_remainder(k)


def _lower_series(k: float, x: float) -> float:
    # sum_{n>=0} x**n / (k (k+1) ... (k+n))
    ap = k
    term = 1.0 / k
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if term <= total * _EPS:
            return total
    raise ArithmeticError(f"incomplete gamma series did not converge (k={k}, x={x})")


def _upper_cf(k: float, x: float) -> float:
    # Legendre continued fraction for Gamma(k, x) * exp(x) * x**-k, modified Lentz
    b = x + 1.0 - k
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - k)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (k={k}, x={x})")


def _check_gamma_args(k: float, x: float) -> None:
    _require_finite(k=k, x=x)
    if k <= 0.0:
        raise DomainError(f"shape must be positive, got {k!r}")
    if x < 0.0:
        raise DomainError(f"argument must be nonnegative, got {x!r}")


def reg_inc_gamma(k: float, x: float) -> tuple[float, float]:
    """Regularized incomplete gamma pair ``(P, Q)`` with ``P + Q = 1``.

    ``P = gamma(k, x) / Gamma(k)`` and ``Q = Gamma(k, x) / Gamma(k)``.  The
    branch that is computed directly is the one that does not suffer from
    cancellation; the other is its complement.
    """
    k = float(k)
    x = float(x)
    _check_gamma_args(k, x)
    if x == 0.0:
        return 0.0, 1.0
    lp = _log_prefix(k, x)
    if x < k + 1.0:
        p = min(1.0, math.exp(lp) * _lower_series(k, x))
        return p, 1.0 - p
    q = min(1.0, math.exp(lp) * _upper_cf(k, x))
    return 1.0 - q, q


def log_reg_upper_inc_gamma(k: float, x: float) -> float:
    """``log Q(k, x)``, finite even where ``Q`` itself underflows."""
    k = float(k)
    x = float(x)
    _check_gamma_args(k, x)
    if x == 0.0:
        return 0.0
    lp = _log_prefix(k, x)
    if x < k + 1.0:
        return math.log1p(-min(1.0, math.exp(lp) * _lower_series(k, x)))
    return lp + math.log(_upper_cf(k, x))


def _e1_series(y: float) -> float:
    total = 0.0
    term = 1.0
    n = 1
    while True:
        term *= -y / n
        contrib = term / n
        total -= contrib
        if abs(contrib) <= _EPS * abs(total):
            break
        n += 1
    return -EULER_GAMMA - math.log(y) + total


def _e1_cf_scaled(y: float) -> float:
    # exp(y) * E1(y) via the continued fraction, y > 1
    b = y + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge (y={y})")


def exp_integral_e1(y: float) -> float:
    """Exponential integral ``E1(y)`` for ``y > 0``."""
    y = float(y)
    if math.isinf(y) and y > 0:
        return 0.0
    _require_finite(y=y)
    if y <= 0.0:
        raise DomainError(f"E1 needs a positive argument, got {y!r}")
    if y <= 1.0:
        return _e1_series(y)
    return math.exp(-y) * _e1_cf_scaled(y)


def exp_e1_scaled(y: float) -> float:
    """``exp(y) * E1(y)``, i.e. ``-exp(y) * Ei(-y)``, for ``y > 0``.

    Tends to ``1/y`` for large ``y``; never overflows.
    """
    y = float(y)
    if math.isinf(y) and y > 0:
        return 0.0
    _require_finite(y=y)
    if y <= 0.0:
        raise DomainError(f"scaled E1 needs a positive argument, got {y!r}")
    if y <= 1.0:
        return math.exp(y) * _e1_series(y)
    return _e1_cf_scaled(y)


def exp_integral_ei(x: float) -> float:
    """Exponential integral ``Ei(x)`` restricted to ``x < 0``."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("Ei argument is NaN")
    if x >= 0.0:
        raise DomainError(f"Ei is only provided for negative arguments, got {x!r}")
    if math.isinf(x):
        return 0.0
    return -exp_integral_e1(-x)


# above this the recurrence loses ~log10(x) digits to cancellation; use the
# continued fraction of Gamma(-1, x) instead
_NEG1_CF_MIN = 2.0


def _check_neg1(x: float) -> float:
    x = float(x)
    _require_finite(x=x)
    if x <= 0.0:
        raise DomainError(f"Gamma(-1, x) needs x > 0, got {x!r}")
    return x


def upper_inc_gamma_neg1(x: float) -> float:
    """``Gamma(-1, x)`` for ``x > 0``.

    Uses ``Gamma(-1, x) = exp(-x)/x + Ei(-x)`` up to ``x = 2`` and the
    Legendre continued fraction beyond.
    """
    x = _check_neg1(x)
    if x <= _NEG1_CF_MIN:
        return math.exp(-x) / x - exp_integral_e1(x)
    return math.exp(-x) * _upper_cf(-1.0, x) / x


def exp_upper_inc_gamma_neg1_scaled(x: float) -> float:
    """``exp(x) * Gamma(-1, x)`` for ``x > 0``; behaves like ``1/x**2`` for large ``x``."""
    x = _check_neg1(x)
    if x <= _NEG1_CF_MIN:
        return 1.0 / x - exp_e1_scaled(x)
    return _upper_cf(-1.0, x) / x
