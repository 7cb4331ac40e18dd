"""Closed-form laws for the sign changes of the localization process.

Everything here is deterministic given its arguments; samplers take a
caller-owned ``numpy.random.Generator`` and only advance that stream.

Notation used in the code: ``lam1``/``lam2`` are the two exponents of the
generating function, ``c1``/``c2`` their coefficients.  The generating
function of the flip count is ``a(x, z) = c1 x**lam1 + c2 x**lam2`` and its
companion ``b(x, z)`` is the linear-in-excess coefficient of the joint
generating function ``M(x, y, z) = (a + b*y) * exp(-y)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationNotConverged

BRANCH_POINT = -1.25

# Taylor cut-over for phi/psi; below this coth/sinh lose digits
_SMALL_S = 1e-6
# below this time the length series needs many terms
_SMALL_T = 0.05
_SMALL_T_BUDGET = 10_000
_TERM_BUDGET = 1_000_000


@dataclass(frozen=True)
class AnalyticEval:
    z: complex
    lambda1: complex
    lambda2: complex
    c1: complex
    c2: complex


def exponents(z) -> AnalyticEval:
    """Exponents and coefficients of ``E z**k(x)`` at ``z``.

    Real ``z > -5/4`` gives real fields; any other admissible ``z`` uses the
    principal square root.  The cut ``(-inf, -5/4]`` raises ``DomainError``.
    """
    if isinstance(z, (complex, np.complexfloating)):
        zc = complex(z)
        if zc.imag == 0.0 and zc.real <= BRANCH_POINT:
            raise DomainError(f"z={z} lies on the branch cut (-inf, -5/4]")
        root = cmath.sqrt(5.0 + 4.0 * zc)
    else:
        zc = float(z)
        if not math.isfinite(zc):
            raise DomainError(f"z={z} is not finite")
        if zc <= BRANCH_POINT:
            raise DomainError(f"z={z} lies on the branch cut (-inf, -5/4]")
        root = math.sqrt(5.0 + 4.0 * zc)
    lam1 = (-3.0 + root) / 2.0
    lam2 = (-3.0 - root) / 2.0
    gap = lam1 - lam2
    c1 = ((zc - 1.0) / 3.0 - lam2) / gap
    c2 = (-(zc - 1.0) / 3.0 + lam1) / gap
    return AnalyticEval(z=zc, lambda1=lam1, lambda2=lam2, c1=c1, c2=c2)


# exponents at z = 0 drive the ratio law and the first-flip law
_E0 = exponents(0.0)
LAM1 = _E0.lambda1
LAM2 = _E0.lambda2
C1 = _E0.c1
C2 = _E0.c2


def _check_x(x):
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 1.0):
        raise DomainError("x must be finite and >= 1")
    return xa


def _powers(xa, e: AnalyticEval):
    if isinstance(e.lambda1, complex):
        xa = xa.astype(complex)
    return np.power(xa, e.lambda1), np.power(xa, e.lambda2)


def _out(v):
    return v.item() if np.ndim(v) == 0 else v


def genfun(x, z):
    """``a(x, z) = E z**k(x)`` for ``x >= 1``."""
    xa = _check_x(x)
    e = exponents(z)
    p1, p2 = _powers(xa, e)
    return _out(e.c1 * p1 + e.c2 * p2)


def b_coeff(x, z):
    """Coefficient ``b(x, z)``; undefined at ``z = 1``."""
    xa = _check_x(x)
    e = exponents(z)
    if e.z == 1.0:
        raise DomainError("b(x, z) is undefined at z = 1")
    p1, p2 = _powers(xa, e)
    w = 1.0 - e.z
    return _out(e.c1 * (1.0 + e.lambda1 / w) * p1 + e.c2 * (1.0 + e.lambda2 / w) * p2)


def _derivs(x: float, z):
    """Closed-form a, b and their x-derivatives at scalar x."""
    e = exponents(z)
    p1, p2 = x ** e.lambda1, x ** e.lambda2
    w = 1.0 - e.z
    k1, k2 = e.c1 * (1.0 + e.lambda1 / w), e.c2 * (1.0 + e.lambda2 / w)
    a = e.c1 * p1 + e.c2 * p2
    b = k1 * p1 + k2 * p2
    da = (e.c1 * e.lambda1 * p1 + e.c2 * e.lambda2 * p2) / x
    db = (k1 * e.lambda1 * p1 + k2 * e.lambda2 * p2) / x
    return a, b, da, db, e.z


def central_excess_genfun(x, y, z):
    """``M(x, y, z) = (a(x,z) + b(x,z) y) e^{-y}``.

    At ``x = 1`` this is the survival function ``(2y/3 + 1) e^{-y}`` of the
    central excess for every admissible ``z``.
    """
    a = genfun(x, z)
    b = b_coeff(x, z)
    y = np.asarray(y, dtype=float)
    return _out((a + b * y) * np.exp(-y))


def ode_residual(x: float, z) -> tuple[float, float]:
    """Residuals of the two first-order equations solved by ``a`` and ``b``."""
    a, b, da, db, zz = _derivs(float(x), z)
    r_a = x * da + (zz - 1.0) * (b - a)
    r_b = x * db + (2.0 + zz) * b - (1.0 + zz) * a
    return r_a, r_b


def pde_residual(x: float, y: float, z, fd_step: float) -> float:
    """Left minus right side of the evolution equation for ``M``.

    Derivatives in x and y are central differences of step ``fd_step``; the
    convolution with ``e^{-y}`` uses its closed form.
    """
    if fd_step <= 0:
        raise DomainError("fd_step must be positive")

    def m(xx, yy):
        return central_excess_genfun(xx, yy, z)

    h = fd_step
    mx = (m(x + h, y) - m(x - h, y)) / (2 * h)
    my = (m(x, y + h) - m(x, y - h)) / (2 * h)
    my0 = (m(x, h) - m(x, -h)) / (2 * h)
    a = genfun(x, z)
    b = b_coeff(x, z)
    # (M(x,.) * e^{-.})(y) = e^{-y} (a y + b y^2 / 2)
    conv = math.exp(-y) * (a * y + b * y * y / 2.0)
    lhs = x * mx - (1.0 + y) * my + 2.0 * m(x, y)
    rhs = 2.0 * conv + 2.0 * math.exp(-y) * m(x, 0.0) - (y + 1.0) * math.exp(-y) * z * my0
    return lhs - rhs


# --------------------------------------------------------------- ratio law


def ratio_density(r):
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 1.0):
        raise DomainError("ratio density is supported on r >= 1")
    return _out((np.power(ra, LAM1 - 1.0) - np.power(ra, LAM2 - 1.0)) / (LAM1 - LAM2))


def ratio_cdf(r):
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 1.0):
        raise DomainError("ratio cdf is supported on r >= 1")
    with np.errstate(over="ignore"):
        v = ((np.power(ra, LAM1) - 1.0) / LAM1 - (np.power(ra, LAM2) - 1.0) / LAM2) / (LAM1 - LAM2)
    return _out(np.clip(v, 0.0, 1.0))


def sample_log_ratio(rng: np.random.Generator, size=None):
    """Exact draw of ``log r``: a sum of exponentials with rates ``-lam1``, ``-lam2``."""
    n = 1 if size is None else size
    ea = rng.standard_exponential(n)
    eb = rng.standard_exponential(n)
    y = ea / -LAM1 + eb / -LAM2
    return y[0] if size is None else y


def sample_ratio(rng: np.random.Generator, size=None):
    return np.exp(sample_log_ratio(rng, size))


def log_ratio_density(y):
    """Density of ``log r``: hypoexponential with rates ``-lam1`` and ``-lam2``."""
    ya = np.asarray(y, dtype=float)
    mu1, mu2 = -LAM1, -LAM2
    v = mu1 * mu2 / (mu2 - mu1) * (np.exp(-mu1 * ya) - np.exp(-mu2 * ya))
    return _out(np.where(ya >= 0, v, 0.0))


def log_ratio_cdf(y):
    """CDF of ``log r``."""
    ya = np.maximum(np.asarray(y, dtype=float), 0.0)
    m1, m2 = -LAM1, -LAM2
    v = 1.0 - (m2 * np.exp(-m1 * ya) - m1 * np.exp(-m2 * ya)) / (m2 - m1)
    return _out(np.clip(v, 0.0, 1.0))


def log_ratio_quantile(p):
    """Inverse of :func:`log_ratio_cdf` by bisection (vectorized)."""
    pa = np.asarray(p, dtype=float)
    if np.any((pa < 0) | (pa >= 1)):
        raise DomainError("probabilities must lie in [0, 1)")
    m1, m2 = -LAM1, -LAM2
    lo = np.zeros_like(pa)
    # the survival is below m2/(m2-m1) e^{-m1 y}
    hi = np.maximum(np.log(m2 / ((m2 - m1) * (1.0 - pa))) / m1, 0.0) + 1e-9
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = log_ratio_cdf(mid) < pa
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return _out(0.5 * (lo + hi))


def transition_density(y, x: float):
    """Density of the next flip level after a flip at level ``x``."""
    if x <= 0:
        raise DomainError("x must be positive")
    ya = np.asarray(y, dtype=float)
    q = np.where(ya >= x, ya / x, 1.0)
    v = (np.power(q, LAM1) - np.power(q, LAM2)) / ((LAM1 - LAM2) * np.where(ya > 0, ya, 1.0))
    return _out(np.where(ya >= x, v, 0.0))


# ------------------------------------------------------------ central slope


def central_excess_density(y):
    ya = np.asarray(y, dtype=float)
    return _out(np.where(ya >= 0, (2.0 * ya + 1.0) * np.exp(-np.maximum(ya, 0.0)) / 3.0, 0.0))


def central_excess_cdf(y):
    ya = np.maximum(np.asarray(y, dtype=float), 0.0)
    return _out(1.0 - (1.0 + 2.0 * ya / 3.0) * np.exp(-ya))


def sample_central_excess(rng: np.random.Generator, size=None):
    """Mixture draw: Exp(1) w.p. 1/3, Gamma(2, 1) w.p. 2/3."""
    n = 1 if size is None else size
    u = rng.random(n)
    e1 = rng.standard_exponential(n)
    e2 = rng.standard_exponential(n)
    y = np.where(u < 1.0 / 3.0, e1, e1 + e2)
    return y[0] if size is None else y


def exp_cdf(y, mean: float = 1.0):
    ya = np.maximum(np.asarray(y, dtype=float), 0.0)
    return _out(-np.expm1(-ya / mean))


# ------------------------------------------------------------ slope length


def _length_terms_needed(t: float, tol: float) -> int:
    """Number of folded series terms after which the alternating tail is < tol."""
    c = math.pi**2 * t / 2.0
    # terms (k+1/2) exp(-c (k+1/2)^2) decrease once k+1/2 > 1/sqrt(2c)
    k = max(0, math.ceil(1.0 / math.sqrt(2.0 * c) - 0.5))
    budget = _SMALL_T_BUDGET if t < _SMALL_T else _TERM_BUDGET
    while True:
        m = k + 0.5
        if math.pi * m * math.exp(-c * m * m) < tol:
            return k
        k += 1
        if k > budget:
            raise TruncationNotConverged(f"length series at t={t} needs more than {budget} terms")


def slope_length_density(t, tol: float = 1e-16):
    """Density of the length of a non-central unit slope.

    Folded theta series ``pi * sum_{k>=0} (-1)^k (k+1/2) exp(-pi^2 (k+1/2)^2 t / 2)``,
    truncated once the alternating tail bound drops below ``tol``.
    """
    ta = np.asarray(t, dtype=float)
    if np.any(ta <= 0) or np.any(~np.isfinite(ta)):
        raise DomainError("t must be finite and positive")
    if tol <= 0:
        raise DomainError("tol must be positive")
    kmax = _length_terms_needed(float(ta.min()), tol)
    m = np.arange(kmax + 1) + 0.5
    sign = np.where(np.arange(kmax + 1) % 2 == 0, 1.0, -1.0)
    tt = ta.reshape(-1, 1)
    v = math.pi * np.sum(sign * m * np.exp(-(math.pi**2) / 2.0 * m * m * tt), axis=1)
    return _out(np.maximum(v, 0.0).reshape(ta.shape))


def length_laplace(lam):
    """``E exp(-lam * l) = 1 / cosh(sqrt(2 lam))``."""
    la = np.asarray(lam, dtype=float)
    return _out(1.0 / np.cosh(np.sqrt(2.0 * la)))


def phi_psi(s) -> tuple:
    """The two Laplace exponents of the slope decomposition at ``s > 0``."""
    sa = np.asarray(s, dtype=float)
    if np.any(sa < 0):
        raise DomainError("s must be non-negative")
    small = sa < _SMALL_S
    safe = np.where(small, 1.0, sa)
    u = np.sqrt(2.0 * safe)
    phi = u / np.tanh(u) - 1.0
    psi = u / np.sinh(u)
    phi_series = 2.0 * sa / 3.0 - 4.0 * sa**2 / 45.0 + 16.0 * sa**3 / 945.0
    psi_series = 1.0 - sa / 3.0 + 7.0 * sa**2 / 90.0 - 31.0 * sa**3 / 1890.0
    phi = np.where(small, phi_series, phi)
    psi = np.where(small, psi_series, psi)
    return _out(phi), _out(psi)


# ------------------------------------------------------------ large deviations


def rate_function(a):
    """Rate function of ``k(e^t)/t``; ``+inf`` for negative arguments."""
    aa = np.asarray(a, dtype=float)
    pos = np.maximum(aa, 0.0)
    root = pos + np.sqrt(pos * pos + 1.25)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(pos > 0, pos * np.log(2.0 * pos * root), 0.0)
    v = term + 1.5 - root
    return _out(np.where(aa < 0, np.inf, v))


def scaled_cgf(theta):
    """Limit of ``t^{-1} log E exp(theta k(e^t))``, i.e. ``lam1(e^theta)``."""
    th = np.asarray(theta, dtype=float)
    return _out((-3.0 + np.sqrt(5.0 + 4.0 * np.exp(th))) / 2.0)


def count_pmf(x: float, m_max: int, radius: float = 1.2, n_points: int = 4096):
    """``P(k(x) = m)`` for ``m = 0..m_max`` by Cauchy inversion of ``a(x, z)``.

    Contour radius must stay inside the disc avoiding the cut at -5/4.
    """
    if not 0 < radius < 1.25:
        raise DomainError("radius must lie in (0, 5/4)")
    if m_max >= n_points:
        raise DomainError("m_max must be smaller than n_points")
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    zs = radius * np.exp(1j * theta)
    root = np.sqrt(5.0 + 4.0 * zs)
    lam1 = (-3.0 + root) / 2.0
    lam2 = (-3.0 - root) / 2.0
    gap = lam1 - lam2
    c1 = ((zs - 1.0) / 3.0 - lam2) / gap
    c2 = (-(zs - 1.0) / 3.0 + lam1) / gap
    lx = math.log(float(x))
    vals = c1 * np.exp(lam1 * lx) + c2 * np.exp(lam2 * lx)
    coef = np.fft.fft(vals) / n_points
    m = np.arange(m_max + 1)
    return np.real(coef[: m_max + 1]) * radius ** (-m.astype(float))


# ------------------------------------------------------------ first flip


def first_flip_cdf(x):
    """``P(X_1 <= x) = 1 - a(x, 0)``."""
    xa = _check_x(x)
    return _out(1.0 - (C1 * np.power(xa, LAM1) + C2 * np.power(xa, LAM2)))


def first_flip_log_quantile(survival, tol: float = 1e-12):
    """Solve ``a(e^s, 0) = survival`` for ``s >= 0`` (vectorized).

    ``e^{lam1 s} <= a(e^s, 0) <= c1 e^{lam1 s}`` gives a bracket of width
    ``log(c1) / -lam1``; a few bisection steps shrink it and Newton finishes
    from the left end, where convexity makes the iterates increase
    monotonically to the root.
    """
    u = np.asarray(survival, dtype=float)
    if np.any((u <= 0) | (u > 1)):
        raise DomainError("survival probabilities must lie in (0, 1]")
    mu = -LAM1
    lo = np.log(1.0 / u) / mu
    hi = np.maximum(np.log(C1 / u) / mu, lo)

    def surv(s):
        return C1 * np.exp(LAM1 * s) + C2 * np.exp(LAM2 * s)

    for _ in range(6):
        mid = 0.5 * (lo + hi)
        above = surv(mid) > u
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    s = lo
    for _ in range(60):
        d = C1 * LAM1 * np.exp(LAM1 * s) + C2 * LAM2 * np.exp(LAM2 * s)
        step = (surv(s) - u) / d
        s = np.clip(s - step, lo, hi)
        if np.all(np.abs(step) <= tol * np.maximum(1.0, s)):
            break
    return _out(s)


def first_flip_quantile(p):
    pa = np.asarray(p, dtype=float)
    return _out(np.exp(first_flip_log_quantile(1.0 - pa)))


def sample_first_flip(rng: np.random.Generator, size=None, log: bool = False):
    n = 1 if size is None else size
    u = 1.0 - rng.random(n)  # in (0, 1]
    s = first_flip_log_quantile(u)
    s = np.atleast_1d(s)
    out = s if log else np.exp(s)
    return out[0] if size is None else out
