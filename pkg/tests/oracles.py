"""Independent reference distributions used to check the production code.

Everything here is built from textbook series and continued-fraction
identities, deliberately without importing anything from ``gofpower``, so
that agreement between the two is a genuine two-route check.
"""

import math

_EPS = 1e-16
_MAX_ITER = 10_000


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x).

    Power series for x < a + 1, Lentz continued fraction for the upper
    tail otherwise.
    """
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 0.0
    lg = math.lgamma(a)
    if x < a + 1.0:
        # series: P(a,x) = x^a e^-x / Gamma(a) * sum_k x^k / (a(a+1)...(a+k))
        total = 1.0 / a
        term = total
        denom = a
        for _ in range(_MAX_ITER):
            denom += 1.0
            term *= x / denom
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return total * math.exp(-x + a * math.log(x) - lg)
    # modified Lentz for Q(a,x) = x^a e^-x / Gamma(a) * 1/(x+1-a- 1(1-a)/(x+3-a- ...))
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    q = math.exp(-x + a * math.log(x) - lg) * h
    return 1.0 - q


def chi2_cdf(df: float, x: float) -> float:
    """Central chi-square CDF with df degrees of freedom."""
    if x <= 0:
        return 0.0
    return regularized_gamma_p(0.5 * df, 0.5 * x)


def chi2_quantile(df: float, p: float, tol: float = 1e-12) -> float:
    """Inverse of chi2_cdf by bisection; good enough for test fixtures."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = 0.0, max(1.0, float(df))
    while chi2_cdf(df, hi) < p:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("quantile bracket failure")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(df, mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def noncentral_chi2_cdf(df: float, noncentrality: float, x: float) -> float:
    """Noncentral chi-square CDF as a Poisson mixture of central CDFs.

    F(x) = sum_j e^{-l/2} (l/2)^j / j! * chi2_cdf(df + 2j, x).  Forward
    summation from j = 0; adequate for the moderate noncentralities used
    in the tests (the leading Poisson weight must not underflow).
    """
    if x <= 0:
        return 0.0
    lam = noncentrality
    if lam < 0:
        raise ValueError("noncentrality must be nonnegative")
    if lam == 0.0:
        return chi2_cdf(df, x)
    half = 0.5 * lam
    weight = math.exp(-half)
    if weight == 0.0:
        raise ValueError("noncentrality too large for forward summation")
    cum_weight = weight
    total = weight * chi2_cdf(df, x)
    for j in range(1, _MAX_ITER):
        weight *= half / j
        cum_weight += weight
        total += weight * chi2_cdf(df + 2 * j, x)
        # chi2_cdf is decreasing in df, so the dropped tail is below 1 - cum_weight
        if 1.0 - cum_weight < 1e-14:
            break
    return min(1.0, total)
