"""CDF of a weighted sum of squared shifted Gaussians via contour integrals.

Evaluates F(x) for X = sum_k sigma_k^2 (Z_k + zeta_k)^2 with two integral
representations:

* a shifted-contour form whose integrand carries an e^{1-y} envelope and a
  denominator bounded away from zero, used whenever an a-priori bound on
  its numerator (``stability_rhs``) is moderate;
* the classical real-axis inversion form (Imhof-style), whose numerator is
  bounded by 1 and decays sub-Gaussian fast exactly when that bound is
  large.

Semi-infinite integrals are evaluated by an adaptive scheme built on the
embedded 10-point Gauss / 21-point Kronrod pair: the initial window is
split into panels, the worst panel is bisected until the summed error
estimate meets tolerance, and the upper limit doubles until the last
window's contribution is negligible.
"""

from __future__ import annotations

import enum
import heapq
import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .spectrum import Spectrum

__all__ = [
    "Method", "QuadratureConfig", "CdfEvaluation", "IntegralResult",
    "NumericalFailureError", "adaptive_integrate", "integrand_shifted",
    "integrand_imhof", "stability_bound", "stability_rhs", "cdf",
]

# exponent cap: exp(x) overflows just above x = 709
_EXP_OVERFLOW = 700.0
# relative gap under which two variances are treated as one eigenvalue group
_GROUP_RTOL = 1e-12


class NumericalFailureError(ArithmeticError):
    """The integrand produced a NaN or infinity at some node."""

    def __init__(self, y: float):
        super().__init__(f"non-finite integrand value at y={y!r}")
        self.y = y


class Method(str, enum.Enum):
    SHIFTED_CONTOUR = "ShiftedContour"
    IMHOF = "Imhof"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets for CDF evaluation."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    stability_threshold: float = 1e8

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.stability_threshold <= 0:
            raise ValueError("tolerances and stability threshold must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class CdfEvaluation:
    """A CDF value with its error estimate and cost accounting."""

    value: float
    abs_error_estimate: float
    nodes_used: int
    method: Method
    converged: bool = True


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    nodes_used: int
    converged: bool


# 10-point Gauss / 21-point Kronrod nodes and weights on [-1, 1]
# (QUADPACK dqk21 constants; the Gauss nodes are every second Kronrod node).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

PANEL_SIZE = 21
_NODES = np.concatenate([-_XGK[:10], [0.0], _XGK[9::-1]])
_WK_FULL = np.concatenate([_WGK[:10], [_WGK[10]], _WGK[9::-1]])
_WG_FULL = np.zeros(PANEL_SIZE)
for _j in range(5):
    _WG_FULL[2 * _j + 1] = _WG[_j]
    _WG_FULL[20 - (2 * _j + 1)] = _WG[_j]
del _j


def stability_bound(zeta, ell: int | None = None) -> float:
    """Product over k of exp(zeta_k^2 sqrt(1 + 1/ell) / 2).

    Computed as a single exp of the summed exponent so that individual
    factors cannot overflow; an exponent beyond the double-precision range
    returns +inf, which always routes evaluation away from the shifted
    contour.
    """
    z = np.asarray(zeta, dtype=float)
    if ell is None:
        ell = z.size
    if ell < 1:
        raise ValueError("ell must be a positive integer")
    exponent = 0.5 * math.sqrt(1.0 + 1.0 / ell) * float(z @ z)
    if exponent > _EXP_OVERFLOW:
        return math.inf
    return math.exp(exponent)


def stability_rhs(spec: "Spectrum") -> float:
    """The numerator bound governing method selection for a spectrum."""
    return stability_bound(spec.zeta, spec.ell)


def _compress(spec: "Spectrum"):
    """Group equal variances: (sigma2 per group, multiplicity, summed zeta^2).

    The distribution depends on the zetas of an eigenvalue group only
    through their summed squares, so the grouped integrand is exactly the
    ungrouped one at a fraction of the cost when eigenvalues repeat.
    """
    sigma2 = np.asarray(spec.sigma, dtype=float) ** 2
    zeta2 = np.asarray(spec.zeta, dtype=float) ** 2
    order = np.argsort(sigma2)[::-1]
    s2 = sigma2[order]
    z2 = zeta2[order]
    lead = s2[0]
    g_s, g_n, g_z = [lead], [0], [0.0]
    for s, z in zip(s2, z2):
        if lead - s > _GROUP_RTOL * lead:
            lead = s
            g_s.append(s)
            g_n.append(0)
            g_z.append(0.0)
        g_n[-1] += 1
        g_z[-1] += z
    return (np.array(g_s), np.array(g_n, dtype=float), np.array(g_z),
            int(sigma2.size))


def _shifted_values(y, x, s2, cnt, z2, ell):
    """Vectorized shifted-contour integrand over an array of y > 0."""
    rt = math.sqrt(ell)
    yc = y[:, None]
    w = 1.0 - 2.0 * (yc - 1.0) * (s2 / x) + 2.0j * yc * (s2 * rt / x)
    logw = np.log(w)
    if __debug__:
        # denominator bound: |prod sqrt(w_k)| > e^{-1/4}
        assert np.all(0.5 * (logw.real * cnt).sum(axis=1) > -0.25 - 1e-9)
        # per-factor bound: |(1 - w)/w| <= sqrt(1 + 1/ell)
        assert np.all(np.abs(1.0 - w) <= math.sqrt(1.0 + 1.0 / ell) * np.abs(w) * (1.0 + 1e-9))
    expo = (1.0 - y) + 1.0j * y * rt - (0.5 * cnt * logw).sum(axis=1)
    if z2.any():
        expo = expo + ((0.5 * z2) * (1.0 / w - 1.0)).sum(axis=1)
    denom = math.pi * (y - 1.0 / (1.0 - 1.0j * rt))
    return (np.exp(expo) / denom).imag


def _imhof_values(y, x, s2, cnt, z2, ell):
    """Vectorized real-axis inversion integrand over an array of y > 0."""
    yc = y[:, None]
    v = 1.0 - 2.0j * yc * (s2 / x)
    expo = -1.0j * y - (0.5 * cnt * np.log(v)).sum(axis=1)
    if z2.any():
        term = (0.5 * z2) * (1.0 / v - 1.0)
        if __debug__:
            # numerator factors bounded by 1: Re((1-v)/(2v)) <= 0
            assert np.all(term.real <= 1e-12)
        expo = expo + term.sum(axis=1)
    return np.exp(expo).imag / (math.pi * y)


def _as_batch(y):
    arr = np.asarray(y, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def integrand_shifted(y, x: float, spec: "Spectrum"):
    """Shifted-contour integrand at y > 0 for the CDF argument x > 0.

    The product of square roots in the denominator is accumulated factor
    by factor on the principal branch (as a summed principal log), never
    as a single root of the full product.
    """
    s2, cnt, z2, ell = _compress(spec)
    yv, scalar = _as_batch(y)
    out = _shifted_values(yv, float(x), s2, cnt, z2, ell)
    return float(out[0]) if scalar else out


def integrand_imhof(y, x: float, spec: "Spectrum"):
    """Real-axis inversion integrand at y > 0 for the CDF argument x > 0.

    The y -> 0 singularity is removable; open quadrature rules never
    evaluate y = 0.
    """
    s2, cnt, z2, ell = _compress(spec)
    yv, scalar = _as_batch(y)
    out = _imhof_values(yv, float(x), s2, cnt, z2, ell)
    return float(out[0]) if scalar else out


def _eval_panels(f, intervals, nodes_counter):
    """Evaluate the embedded pair on a batch of intervals in one call to f."""
    arr = np.asarray(intervals, dtype=float)
    half = 0.5 * (arr[:, 1] - arr[:, 0])
    mid = 0.5 * (arr[:, 0] + arr[:, 1])
    ys = (mid[:, None] + half[:, None] * _NODES).ravel()
    fv = np.asarray(f(ys), dtype=float).reshape(arr.shape[0], PANEL_SIZE)
    if not np.all(np.isfinite(fv)):
        bad = ys[np.flatnonzero(~np.isfinite(fv.ravel()))[0]]
        raise NumericalFailureError(float(bad))
    kron = half * (fv @ _WK_FULL)
    gauss = half * (fv @ _WG_FULL)
    nodes_counter[0] += ys.size
    return kron, np.abs(kron - gauss)


def adaptive_integrate(f: Callable, cfg: QuadratureConfig | None = None, *,
                       initial_upper: float = 16.0,
                       initial_panels: int = 4) -> IntegralResult:
    """Integrate f over (0, inf) with the adaptive Gauss-Kronrod scheme.

    ``f`` must accept a numpy array of abscissae and return the matching
    array of values.  The window (0, initial_upper] starts as
    ``initial_panels`` equal panels; each panel's 21-point value is kept
    and the 10/21 difference is its error estimate.  Bisection of the
    worst panel and geometric extension of the upper limit (Y -> 2Y,
    until a window contributes less than 0.1 * abs_tol) both draw on the
    shared subdivision budget.  On budget exhaustion or an unresolvable
    oscillatory tail the best-effort value is returned with ``converged``
    False, a RuntimeWarning, and an error estimate that includes the
    unresolved-tail allowance.
    """
    cfg = cfg or DEFAULT_CONFIG
    nodes = [0]
    heap: list = []
    seq = 0

    def push(pairs):
        nonlocal seq
        vals, errs = _eval_panels(f, pairs, nodes)
        for (a, b), v, e in zip(pairs, vals, errs):
            heapq.heappush(heap, (-e, seq, a, b, v, e))
            seq += 1
        return vals, errs

    edges = np.linspace(0.0, initial_upper, initial_panels + 1)
    push(list(zip(edges[:-1], edges[1:])))
    total = math.fsum(item[4] for item in heap)
    err_sum = math.fsum(item[5] for item in heap)

    # extension windows are pre-split so wide oscillatory tails do not have
    # to be rediscovered by bisection; one window costs one budget unit
    ext_cap = max(initial_upper / initial_panels, 2.0 * math.pi)
    budget = cfg.max_subdivisions
    upper = initial_upper
    tail_done = False
    truncation_err = 0.0
    last_window_scale = 0.0
    while True:
        # refine the worst panel until the summed error meets tolerance
        while err_sum > max(cfg.abs_tol, cfg.rel_tol * abs(total)) and budget > 0:
            _, _, a, b, v, e = heapq.heappop(heap)
            total -= v
            err_sum -= e
            vals, errs = push([(a, 0.5 * (a + b)), (0.5 * (a + b), b)])
            total += float(vals.sum())
            err_sum += float(errs.sum())
            budget -= 1
        if err_sum > max(cfg.abs_tol, cfg.rel_tol * abs(total)) or budget <= 0:
            break
        # candidate extension window, evaluated before being committed;
        # wide windows carry proportionally more panels and budget weight
        n_ext = min(256, max(1, math.ceil(upper / ext_cap)))
        ext_edges = np.linspace(upper, 2.0 * upper, n_ext + 1)
        pairs = list(zip(ext_edges[:-1], ext_edges[1:]))
        vals, errs = _eval_panels(f, pairs, nodes)
        window_value = float(vals.sum())
        window_err = float(errs.sum())
        budget -= max(1, n_ext // 16)
        negligible = abs(window_value) + window_err < 0.1 * cfg.abs_tol
        if not negligible and window_err > 0.5 * abs(window_value):
            # the rule no longer resolves the oscillation at this width:
            # committing the window would add noise, so truncate here and
            # charge the window's magnitude as unresolved tail error
            truncation_err = abs(window_value) + window_err
            break
        for (a, b), v, e in zip(pairs, vals, errs):
            heapq.heappush(heap, (-e, seq, a, b, float(v), float(e)))
            seq += 1
        total += window_value
        err_sum += window_err
        last_window_scale = abs(window_value) + window_err
        if negligible:
            tail_done = True
            break
        upper *= 2.0

    if not tail_done and truncation_err == 0.0:
        # ran out of budget mid-march: the last window sets the scale of
        # whatever tail was never reached
        truncation_err = 2.0 * last_window_scale
    total = math.fsum(item[4] for item in heap)
    err_sum = math.fsum(item[5] for item in heap) + truncation_err
    converged = tail_done and err_sum <= max(cfg.abs_tol, cfg.rel_tol * abs(total))
    if not converged:
        warnings.warn(
            f"adaptive quadrature budget exhausted (error estimate {err_sum:.3e}, "
            f"upper limit {upper:g})", RuntimeWarning, stacklevel=2)
    return IntegralResult(total, err_sum, nodes[0], converged)


def _initial_panels(y0: float, ell: int) -> int:
    # aim for a few oscillation periods (wavelength ~ 2 pi / sqrt(ell)) per panel
    return max(4, math.ceil(y0 * math.sqrt(ell) / (4.0 * math.pi)))


def cdf(x: float, spec: "Spectrum", cfg: QuadratureConfig | None = None,
        method: Method | None = None) -> CdfEvaluation:
    """CDF of sum_k sigma_k^2 (Z_k + zeta_k)^2 at x.

    F(x) = 0 for x <= 0 with no quadrature spent.  Otherwise the shifted
    contour is integrated directly, unless the spectrum's stability bound
    exceeds the configured threshold, in which case F = 1/2 minus the
    real-axis inversion integral.  The returned value is clamped to [0, 1].
    """
    cfg = cfg or DEFAULT_CONFIG
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    if method is None:
        method = (Method.SHIFTED_CONTOUR
                  if spec.stability_rhs <= cfg.stability_threshold
                  else Method.IMHOF)
    method = Method(method)
    if x <= 0.0:
        return CdfEvaluation(0.0, 0.0, 0, method)

    s2, cnt, z2, ell = _compress(spec)
    y0 = 10.0 + math.sqrt(ell)
    n0 = _initial_panels(y0, ell)
    if method is Method.SHIFTED_CONTOUR:
        f = lambda y: _shifted_values(y, x, s2, cnt, z2, ell)
    else:
        f = lambda y: _imhof_values(y, x, s2, cnt, z2, ell)
    res = adaptive_integrate(f, cfg, initial_upper=y0, initial_panels=n0)
    value = res.value if method is Method.SHIFTED_CONTOUR else 0.5 - res.value
    return CdfEvaluation(
        value=min(1.0, max(0.0, value)),
        abs_error_estimate=res.error_estimate,
        nodes_used=res.nodes_used,
        method=method,
        converged=res.converged,
    )
