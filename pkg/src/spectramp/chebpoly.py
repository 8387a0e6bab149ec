"""Chebyshev-basis polynomials and the factory of certified approximants.

A :class:`ChebPoly` stores coefficients against T_0, T_1, ... with a declared
parity.  The factories below construct bounded polynomial approximants to the
decaying exponential, Gaussian, erf, sign, rectangular, truncated-linear,
gapped-linear and arcsine targets, each with an explicitly measured error
certificate.  All of them keep max |p| <= 1 on [-1, 1] after rescaling, which
is what downstream phase synthesis requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.fft import dct
from scipy.special import erf as _erf

__all__ = [
    "ChebPoly",
    "ApproxCertificate",
    "Target",
    "cheb_eval",
    "cheb_interpolate",
    "jacobi_anger_exp",
    "gauss_poly",
    "erf_poly",
    "sgn_poly",
    "rect_poly",
    "lin_amp_poly",
    "gap_amp_poly",
    "arcsin_poly",
    "certify",
    "scaled_bessel_i",
    "exp_tail",
    "exp_degree_for_eps",
    "LIN_AMP_EPS_RATIO",
]

# lin_amp_poly admits eps <= LIN_AMP_EPS_RATIO * Gamma.  The ratio keeps the
# implicit constraint (rect truncation error <= 2*Gamma) satisfiable with
# margin; it is surfaced here rather than buried in the implementation.
LIN_AMP_EPS_RATIO = 0.1

# Factories rescale so max |p| stays at or below this headroom under 1.
# Leaving a sliver keeps 1 - p(x)^2 bounded away from zero, which downstream
# spectral factorization needs.
_BOUND_HEADROOM = 1.0 - 1e-9

_TRIM_TOL = 1e-14
_DOMAIN_TOL = 1e-12


# ---------------------------------------------------------------------------
# core type


@dataclass(frozen=True)
class ChebPoly:
    """Real polynomial in the Chebyshev-T basis with a declared parity."""

    coeffs: np.ndarray
    parity: str = "none"  # "even" | "odd" | "none"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
        # trim trailing zeros so degree == index of last nonzero coefficient
        nz = np.nonzero(np.abs(c) > _TRIM_TOL * scale)[0]
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        if self.parity == "even":
            c[1::2] = 0.0
        elif self.parity == "odd":
            c[0::2] = 0.0
        elif self.parity != "none":
            raise ValueError(f"parity must be 'even', 'odd' or 'none', got {self.parity!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return cheb_eval(self, x)

    # -- arithmetic (results carry the inferred parity) --

    def __mul__(self, other):
        if isinstance(other, ChebPoly):
            return from_coeffs(_cheb.chebmul(self.coeffs, other.coeffs))
        return from_coeffs(self.coeffs * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "ChebPoly") -> "ChebPoly":
        return from_coeffs(_cheb.chebadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "ChebPoly") -> "ChebPoly":
        return from_coeffs(_cheb.chebsub(self.coeffs, other.coeffs))

    def __neg__(self) -> "ChebPoly":
        return from_coeffs(-self.coeffs)

    def times_x(self) -> "ChebPoly":
        return from_coeffs(_cheb.chebmulx(self.coeffs))

    def even_part(self) -> "ChebPoly":
        c = self.coeffs.copy()
        c[1::2] = 0.0
        return ChebPoly(c, "even")

    def odd_part(self) -> "ChebPoly":
        c = self.coeffs.copy()
        c[0::2] = 0.0
        return ChebPoly(c, "odd")

    def max_abs(self, npts: int | None = None) -> float:
        """max |p| on [-1, 1], grid plus local refinement."""
        fn = lambda x: np.abs(cheb_eval(self, x, check=False))
        return _sup_on_interval(fn, -1.0, 1.0, npts or max(10 * self.degree + 1, 257))

    def to_json(self) -> dict:
        return {"parity": self.parity, "coeffs": [float(v) for v in self.coeffs]}

    @staticmethod
    def from_json(obj: dict) -> "ChebPoly":
        return ChebPoly(np.asarray(obj["coeffs"], dtype=float), obj.get("parity", "none"))


def from_coeffs(c) -> ChebPoly:
    """Wrap raw coefficients, detecting parity."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    tol = 1e-13 * scale
    even_ok = np.all(np.abs(c[1::2]) <= tol)
    odd_ok = np.all(np.abs(c[0::2]) <= tol)
    parity = "even" if even_ok else ("odd" if odd_ok else "none")
    if parity == "even" and odd_ok:
        parity = "even" if len(c) == 1 else "even"
    return ChebPoly(c, parity)


def cheb_eval(p: ChebPoly | np.ndarray, x, check: bool = True):
    """Evaluate via the Clenshaw recurrence.  Rejects |x| > 1 + 1e-12."""
    coeffs = p.coeffs if isinstance(p, ChebPoly) else np.asarray(p, dtype=float)
    xa = np.asarray(x, dtype=float)
    if check and np.any(np.abs(xa) > 1.0 + _DOMAIN_TOL):
        bad = np.max(np.abs(xa))
        raise ValueError(f"evaluation point outside [-1, 1]: |x| = {bad}")
    out = _cheb.chebval(xa, coeffs)
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def cheb_interpolate(fn: Callable[[np.ndarray], np.ndarray], degree: int) -> ChebPoly:
    """Interpolate at the degree+1 first-kind Chebyshev nodes (DCT-II)."""
    n = degree + 1
    k = np.arange(n)
    nodes = np.cos(np.pi * (k + 0.5) / n)
    vals = np.asarray(fn(nodes), dtype=float)
    c = dct(vals, type=2) / n
    c[0] *= 0.5
    return from_coeffs(c)


# ---------------------------------------------------------------------------
# scaled modified Bessel coefficients (backward Miller recurrence)


def scaled_bessel_i(beta: float, jmax: int) -> np.ndarray:
    """e^{-beta} I_j(beta) for j = 0..jmax.

    Backward recurrence with sum normalization, so the j >> beta tail (where
    truncation bounds live) is computed stably and without overflow.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0.0:
        out = np.zeros(jmax + 1)
        out[0] = 1.0
        return out
    start = max(jmax, int(math.ceil(beta))) + 1
    start += int(2.0 * math.sqrt(start * 40.0)) + 20
    vals = np.zeros(start + 2)
    vals[start + 1] = 0.0
    vals[start] = 1e-280
    for j in range(start, 0, -1):
        vals[j - 1] = vals[j + 1] + (2.0 * j / beta) * vals[j]
        if vals[j - 1] > 1e260:  # renormalize mid-recurrence to avoid overflow
            vals *= 1e-260
    total = vals[0] + 2.0 * np.sum(vals[1:])
    vals /= total  # e^{-beta}(I_0 + 2 sum_j I_j) = 1
    return vals[: jmax + 1]


def _scaled_bessel_full(beta: float) -> np.ndarray:
    """Scaled coefficients out to where they are negligible (< 1e-300 rel)."""
    if beta == 0.0:
        return np.array([1.0])
    jmax = int(math.ceil(beta + 12.0 * math.sqrt(beta + 1.0) + 60.0))
    return scaled_bessel_i(beta, jmax)


def exp_tail(beta: float, n: int) -> float:
    """2 e^{-beta} sum_{j>n} I_j(beta): sup truncation error of the degree-n
    Jacobi-Anger series of e^{-beta(x+1)}, attained at x = -1."""
    s = _scaled_bessel_full(beta)
    if n >= len(s) - 1:
        return 0.0
    return float(2.0 * np.sum(s[n + 1 :]))


def exp_degree_for_eps(beta: float, eps: float) -> int:
    """Closed-form degree guaranteeing exp_tail(beta, n) <= eps."""
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    t = math.ceil(max(beta * math.e**2, math.log(2.0 / eps)))
    return int(math.ceil(math.sqrt(2.0 * t * math.log(4.0 / eps))))


def _min_exp_degree(beta: float, eps: float) -> int:
    s = _scaled_bessel_full(beta)
    tails = 2.0 * np.cumsum(s[::-1])[::-1]  # tails[j] = 2*sum_{k>=j} s_k
    ok = np.nonzero(tails <= eps)[0]
    if ok.size == 0:
        return len(s)
    return max(int(ok[0]) - 1, 0)


def _min_erf_degree(k: float, eps: float) -> int:
    """Smallest odd n with the erf truncation bound (4k/(sqrt(pi) n)) *
    gauss_tail(k, n-1) <= eps."""
    beta = 0.5 * k * k
    n = 1
    while True:
        bound = (4.0 * k / (math.sqrt(math.pi) * n)) * exp_tail(beta, (n - 1) // 2)
        if bound <= eps:
            return n
        n += 2
        if n > 200_000:
            raise RuntimeError("erf degree search did not converge")


# ---------------------------------------------------------------------------
# factories: Jacobi-Anger family


def jacobi_anger_exp(beta: float, n: int) -> ChebPoly:
    """Degree-n truncation of e^{-beta(x+1)} = e^{-beta}(I_0 + 2 sum I_j T_j(-x)).

    The truncation error equals the Bessel tail 2 e^{-beta} sum_{j>n} I_j(beta)
    exactly (all coefficients are nonnegative at x = -1); see exp_tail.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    s = scaled_bessel_i(beta, n)
    c = np.zeros(n + 1)
    c[0] = s[0]
    for j in range(1, n + 1):
        c[j] = 2.0 * s[j] * (-1.0) ** j  # T_j(-x) = (-1)^j T_j(x)
    return from_coeffs(c)


def gauss_poly(gamma: float, n: int) -> ChebPoly:
    """Even degree-n approximant of e^{-(gamma x)^2} via x -> 2x^2 - 1."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if n % 2 != 0:
        raise ValueError("degree must be even")
    base = jacobi_anger_exp(0.5 * gamma * gamma, n // 2)
    c = np.zeros(2 * base.degree + 1)
    c[0::2] = base.coeffs  # T_j(2x^2-1) = T_{2j}(x)
    return ChebPoly(c, "even")


def erf_poly(k: float, n: int) -> ChebPoly:
    """Odd degree-n approximant of erf(k x), the term-by-term integral of the
    Gaussian series using int T_j = (T_{j+1}/(j+1) - T_{j-1}/(j-1))/2."""
    if k <= 0:
        raise ValueError("k must be positive")
    if n % 2 != 1:
        raise ValueError("degree must be odd")
    m = (n - 1) // 2
    s = scaled_bessel_i(0.5 * k * k, m)
    pref = 2.0 * k / math.sqrt(math.pi)
    c = np.zeros(n + 1)
    c[1] = pref * s[0]
    for j in range(1, m + 1):
        term = pref * s[j] * (-1.0) ** j
        c[2 * j + 1] += term / (2 * j + 1)
        c[2 * j - 1] -= term / (2 * j - 1)
    return ChebPoly(c, "odd")


def _erf_shifted(k: float, delta: float, eps_trunc: float) -> ChebPoly:
    """Polynomial approximant of erf(k(x - delta)) on [-1, 1].

    Uses the affine map u = (x - delta)/s with s = 1 + |delta|, which keeps u
    in [-1, 1]; the base polynomial then needs sharpness K = k s.
    """
    s = 1.0 + abs(delta)
    K = k * s
    n = _min_erf_degree(K, eps_trunc)
    base = erf_poly(K, n)
    if delta == 0.0:
        return base
    comp = cheb_interpolate(lambda x: cheb_eval(base, (x - delta) / s, check=False), n)
    return comp


def _rescale_into_bound(p: ChebPoly) -> tuple[ChebPoly, float]:
    """Divide by (1 + measured excess) so max |p| <= 1 - 1e-9."""
    m = p.max_abs()
    if m <= _BOUND_HEADROOM:
        return p, 0.0
    factor = m / _BOUND_HEADROOM
    return ChebPoly(p.coeffs / factor, p.parity), factor - 1.0


# ---------------------------------------------------------------------------
# factories: sign / rect / truncated linear / gapped linear / arcsine

_SGN_EPS_MAX = math.sqrt(2.0 / (math.e * math.pi))


def sgn_poly(kappa: float, delta: float, eps: float) -> ChebPoly:
    """Bounded approximant of sgn(x - delta), accurate for |x - delta| >= kappa/2."""
    if not 0 < eps <= _SGN_EPS_MAX:
        raise ValueError(f"eps must lie in (0, {_SGN_EPS_MAX:.4f}]")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if not -1.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [-1, 1]")
    e1, e2 = 0.5 * eps, 0.2 * eps
    for _ in range(4):
        k = (math.sqrt(2.0) / kappa) * math.sqrt(math.log(2.0 / (math.pi * e1 * e1)))
        p, _ = _rescale_into_bound(_erf_shifted(k, delta, e2))
        cert = certify(p, target_sgn(kappa, delta), sgn_domain(kappa, delta))
        if cert.measured_sup_error <= eps and cert.bound_ok:
            return p
        e1 *= 0.6
        e2 *= 0.6
    raise RuntimeError("sgn_poly certificate did not converge")


def sgn_domain(kappa: float, delta: float) -> list[tuple[float, float]]:
    segs = []
    if delta - kappa / 2 > -1.0:
        segs.append((-1.0, delta - kappa / 2))
    if delta + kappa / 2 < 1.0:
        segs.append((delta + kappa / 2, 1.0))
    return segs


def rect_poly(w: float, kappa: float, eps: float) -> ChebPoly:
    """Even approximant of rect(x/w): 1 on |x| <= w/2, 0 beyond w/2 + kappa.

    Half-sum of two shifted sign approximants, realized as the even part of a
    single erf approximant shifted to -(w + kappa)/2.
    """
    if not 0 < kappa <= 2.0:
        raise ValueError("kappa must lie in (0, 2]")
    if not 0 <= w <= 2.0 - kappa:
        raise ValueError("w must lie in [0, 2 - kappa]")
    if not 0 < eps <= _SGN_EPS_MAX:
        raise ValueError(f"eps must lie in (0, {_SGN_EPS_MAX:.4f}]")
    delta = 0.5 * (w + kappa)
    e1, e2 = 0.5 * eps, 0.2 * eps
    for _ in range(4):
        k = (math.sqrt(2.0) / kappa) * math.sqrt(math.log(2.0 / (math.pi * e1 * e1)))
        p, _ = _rescale_into_bound(_erf_shifted(k, -delta, e2).even_part())
        cert = certify(p, target_rect(w, kappa), rect_domain(w, kappa))
        if cert.measured_sup_error <= eps and cert.bound_ok:
            return p
        e1 *= 0.6
        e2 *= 0.6
    raise RuntimeError("rect_poly certificate did not converge")


def rect_domain(w: float, kappa: float) -> list[tuple[float, float]]:
    segs = []
    if w > 0:
        segs.append((-w / 2, w / 2))
    if w / 2 + kappa < 1.0:
        segs.append((w / 2 + kappa, 1.0))
        segs.append((-1.0, -(w / 2 + kappa)))
    return segs


def lin_amp_poly(gamma: float, eps: float) -> ChebPoly:
    """Odd approximant of x/(2 Gamma) with relative error <= eps on [-Gamma, Gamma].

    Built as (x / 2 Gamma) * rect_poly(2 Gamma, 2 Gamma, .), rescaled into the
    unit bound; the relative-error form is what uniform amplitude
    multiplication needs.
    """
    if not 0 < gamma <= 0.5:
        raise ValueError("gamma must lie in (0, 1/2]")
    if eps > LIN_AMP_EPS_RATIO * gamma:
        raise ValueError(
            f"eps must be <= {LIN_AMP_EPS_RATIO} * gamma = {LIN_AMP_EPS_RATIO * gamma:.3e}"
        )
    er = 0.9 * eps * (2.0 * gamma) / (2.0 * gamma + 1.0)
    for _ in range(4):
        r = rect_poly(2.0 * gamma, 2.0 * gamma, er)
        p = r.times_x() * (0.5 / gamma)
        p, _ = _rescale_into_bound(p)
        p = p.odd_part()
        cert = certify(p, target_lin(gamma), [(-gamma, gamma)])
        if cert.measured_sup_error <= eps and cert.bound_ok:
            return p
        er *= 0.6
    raise RuntimeError("lin_amp_poly certificate did not converge")


def gap_amp_poly(delta: float, eps: float) -> ChebPoly:
    """Odd approximant of the gapped linear ramp (x + 1 - delta)/delta on
    [-1, -1 + delta], bounded by 1 everywhere.

    Interpolates the entire erf-windowed ramp at Chebyshev nodes and escalates
    the degree until the certificate passes; the Bernstein-ellipse estimate
    only seeds the initial degree.
    """
    if not 0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    e1 = 0.25 * eps
    k = (math.sqrt(2.0) / delta) * math.sqrt(math.log(1.0 / (2.0 * math.pi * e1 * e1)))

    def ramp(x):
        return ((x + 1.0 - delta) / delta) * 0.5 * (1.0 - _erf(k * (x + 1.0 - 1.5 * delta)))

    n = int(math.ceil(max(16.0, 0.9 * delta**-0.5 * math.log(1.0 / (delta * eps)) ** 1.5)))
    for _ in range(10):
        # antisymmetrize as p(x) - p(-x): the mirrored branch is ~0 on the
        # ramp, so the half-sum convention would lose a factor of two
        p = ChebPoly(2.0 * cheb_interpolate(ramp, n).odd_part().coeffs, "odd")
        p, _ = _rescale_into_bound(p)
        cert = certify(p, target_gap(delta), [(-1.0, -1.0 + delta)])
        if cert.measured_sup_error <= eps and cert.bound_ok:
            return p
        n = int(math.ceil(1.3 * n))
    raise RuntimeError("gap_amp_poly certificate did not converge")


def _arcsin_taylor_coeffs(eps_tail: float) -> np.ndarray:
    """Monomial coefficients of the arcsine Taylor series, truncated once the
    tail at x = 1/2 drops below eps_tail."""
    coeffs = []
    c = 1.0
    m = 0
    while True:
        coeffs.append(c / (2 * m + 1))
        # next c_{m+1} = c * (2m+1)/(2m+2)
        c *= (2 * m + 1) / (2 * m + 2)
        m += 1
        tail_est = (c / (2 * m + 1)) * 0.5 ** (2 * m + 1) / (1.0 - 0.25)
        if tail_est < eps_tail:
            break
        if m > 4000:
            raise RuntimeError("arcsine Taylor truncation did not converge")
    mono = np.zeros(2 * len(coeffs))
    mono[1::2] = coeffs
    return mono


def arcsin_poly(eps: float) -> ChebPoly:
    """Odd approximant of arcsin(x) on [-1/2, 1/2], bounded by 1 on [-1, 1].

    A truncated arcsine Taylor series (degree O(log(1/eps))) is multiplied by
    an even window 1 - c*T_2M((2x^2 - xp^2)/xp^2)/T_2M(u1) that is 1 to within
    eps on the plateau |x| <= xp and sinks below 2/pi toward the endpoints, so
    the product stays inside the unit bound.  The certificate, not an
    asymptotic constant, is the contract; degrees still scale ~ log(1/eps).
    """
    if not 0 < eps <= 0.3:
        raise ValueError("eps must lie in (0, 0.3]")
    et, ew = 0.45 * eps, 0.45 * eps
    xp = 0.52
    u1 = 2.0 / (xp * xp) - 1.0

    for _ in range(5):
        mono = _arcsin_taylor_coeffs(et)
        taylor = from_coeffs(_cheb.poly2cheb(mono))
        window = _arcsin_window(taylor, xp, u1, ew)
        p = (taylor * window).odd_part()
        p, _ = _rescale_into_bound(p)
        cert = certify(p, target_arcsin(), [(-0.5, 0.5)])
        if cert.measured_sup_error <= eps and cert.bound_ok:
            return p
        et *= 0.6
        ew *= 0.6
    raise RuntimeError("arcsin_poly certificate did not converge")


def _arcsin_window(taylor: ChebPoly, xp: float, u1: float, ew: float) -> ChebPoly:
    """Even window keeping taylor * window inside the unit bound."""
    ramp = np.linspace(xp, 1.0, 801)
    tvals = np.abs(cheb_eval(taylor, ramp, check=False))
    m = 1
    while True:
        tm1 = _cheb_t_scalar(2 * m, u1)
        # window(x) = 1 - c * T_2M(u(x^2)) / T_2M(u1), u affine with u(xp^2)=1
        def tnorm(x, m=m, tm1=tm1):
            u = 2.0 * (x * x) / (xp * xp) - 1.0
            return _cheb_t_vec(2 * m, u) / tm1

        ok_c = None
        for c in np.linspace(0.40, 0.985, 40):
            if c / tm1 > ew:  # plateau deviation too large
                continue
            win_ramp = 1.0 - c * tnorm(ramp)
            if np.all(win_ramp * tvals <= 1.0 - 2e-9) and np.all(np.abs(win_ramp) <= 1.0):
                ok_c = c
                break
        if ok_c is not None:
            deg = 4 * m
            win = cheb_interpolate(lambda x: 1.0 - ok_c * tnorm(np.abs(x)), deg).even_part()
            return win
        m += 1
        if m > 64:
            raise RuntimeError("arcsine window search did not converge")


def _cheb_t_scalar(n: int, u: float) -> float:
    if abs(u) <= 1.0:
        return math.cos(n * math.acos(u))
    return math.cosh(n * math.acosh(abs(u))) * (1.0 if u > 0 or n % 2 == 0 else -1.0)


def _cheb_t_vec(n: int, u):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    inside = np.abs(u) <= 1.0
    out[inside] = np.cos(n * np.arccos(u[inside]))
    uo = u[~inside]
    out[~inside] = np.cosh(n * np.arccosh(np.abs(uo))) * np.where(
        (uo > 0) | (n % 2 == 0), 1.0, -1.0
    )
    return out


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class Target:
    """Named target function for a certificate."""

    name: str
    params: dict
    fn: Callable[[np.ndarray], np.ndarray]
    relative: bool = False  # measure |p - f| * (2 Gamma / |x|) instead of |p - f|


def target_exp_decay(beta: float) -> Target:
    return Target("exp_decay", {"beta": beta}, lambda x: np.exp(-beta * (x + 1.0)))


def target_gauss(gamma: float) -> Target:
    return Target("gauss", {"gamma": gamma}, lambda x: np.exp(-((gamma * x) ** 2)))


def target_erf(k: float) -> Target:
    return Target("erf", {"k": k}, lambda x: _erf(k * x))


def target_sgn(kappa: float, delta: float) -> Target:
    return Target("sgn", {"kappa": kappa, "delta": delta}, lambda x: np.sign(x - delta))


def target_rect(w: float, kappa: float) -> Target:
    def fn(x):
        ax = np.abs(x)
        return np.where(ax <= w / 2, 1.0, np.where(ax >= w / 2 + kappa, 0.0, 0.5))

    return Target("rect", {"w": w, "kappa": kappa}, fn)


def target_lin(gamma: float) -> Target:
    return Target(
        "lin", {"gamma": gamma}, lambda x: x / (2.0 * gamma), relative=True
    )


def target_gap(delta: float) -> Target:
    return Target("gap", {"delta": delta}, lambda x: (x + 1.0 - delta) / delta)


def target_arcsin() -> Target:
    return Target("arcsin", {}, np.arcsin)


def target_cheb_t(n: int) -> Target:
    return Target("cheb_t", {"n": n}, lambda x: _cheb_t_vec(n, x))


@dataclass(frozen=True)
class ApproxCertificate:
    target: str
    params: dict
    measured_sup_error: float
    domain: tuple
    bound_ok: bool
    degree: int
    max_abs: float

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "params": {k: float(v) for k, v in self.params.items()},
            "measured_sup_error": self.measured_sup_error,
            "domain": [list(seg) for seg in self.domain],
            "bound_ok": self.bound_ok,
            "degree": self.degree,
            "max_abs": self.max_abs,
        }


def certify(
    p: ChebPoly,
    target: Target,
    domain: Sequence[tuple[float, float]],
) -> ApproxCertificate:
    """Measure the sup error of p against the target on the given intervals.

    Each interval gets >= 10*degree Chebyshev-distributed points plus local
    golden-section refinement around the worst points; bound_ok reports
    max |p| <= 1 + 1e-9 over all of [-1, 1].
    """
    npts = max(10 * p.degree + 1, 257)

    if target.relative:
        gamma = target.params["gamma"]

        def err(x):
            x = np.asarray(x, dtype=float)
            e = np.abs(cheb_eval(p, x, check=False) - target.fn(x))
            with np.errstate(divide="ignore", invalid="ignore"):
                rel = e * (2.0 * gamma) / np.abs(x)
            return np.where(np.abs(x) < 1e-300, 0.0, rel)

    else:

        def err(x):
            x = np.asarray(x, dtype=float)
            return np.abs(cheb_eval(p, x, check=False) - target.fn(x))

    worst = 0.0
    for lo, hi in domain:
        worst = max(worst, _sup_on_interval(err, lo, hi, npts))
    m = p.max_abs()
    return ApproxCertificate(
        target=target.name,
        params=dict(target.params),
        measured_sup_error=float(worst),
        domain=tuple(tuple(seg) for seg in domain),
        bound_ok=bool(m <= 1.0 + 1e-9),
        degree=p.degree,
        max_abs=float(m),
    )


_INVGOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _sup_on_interval(fn, lo: float, hi: float, npts: int) -> float:
    """Grid sup of fn >= 0 with golden-section polish near the top maxima."""
    if hi <= lo:
        return float(fn(np.array([lo]))[0])
    t = np.linspace(0.0, math.pi, npts)
    grid = lo + (hi - lo) * 0.5 * (1.0 - np.cos(t))  # Chebyshev-distributed + endpoints
    vals = np.asarray(fn(grid), dtype=float)
    best = float(np.max(vals))
    order = np.argsort(vals)[::-1]
    polished: list[int] = []
    for idx in order:
        if len(polished) >= 3:
            break
        if any(abs(idx - q) <= 2 for q in polished):
            continue
        polished.append(int(idx))
        a = grid[max(idx - 1, 0)]
        b = grid[min(idx + 1, npts - 1)]
        best = max(best, _golden_max(fn, a, b))
    return best


def _golden_max(fn, a: float, b: float, iters: int = 40) -> float:
    x1 = b - _INVGOLD * (b - a)
    x2 = a + _INVGOLD * (b - a)
    f1 = float(fn(np.array([x1]))[0])
    f2 = float(fn(np.array([x2]))[0])
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVGOLD * (b - a)
            f2 = float(fn(np.array([x2]))[0])
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVGOLD * (b - a)
            f1 = float(fn(np.array([x1]))[0])
        if b - a < 1e-13:
            break
    return max(f1, f2)
