"""Zeta-family special functions and the long-range spectral kernels.

Everything here works in double precision.  The kernels ``f_alpha``, ``g0``,
``gm`` and ``h_kernel`` describe the small-angle structure of
``Li_a(e^{i theta}) + Li_a(e^{-i theta})``, which is what the eigenvalues of
the power-law ring reduce to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import bernoulli

from .errors import ConvergenceError, NumericalDomainError, PoleError

TAIL_TOL = 1e-12
MAX_TERMS = 1_000_000

# B_{2k} / (2k)! for k = 1..15, used by the Euler-Maclaurin tails.
_B = bernoulli(30)
_EM_COEFFS = [_B[2 * k] / math.factorial(2 * k) for k in range(1, 16)]


def _is_int(x: float) -> bool:
    return float(x).is_integer()


def sin_half_pi(x: float) -> float:
    """``sin(pi x / 2)`` with the argument reduced exactly, so it keeps full
    relative accuracy next to the even integers where it vanishes."""
    k = round(0.5 * x)
    f = x - 2 * k  # exact for |x| < 2^52
    return (-1.0) ** (k % 2) * math.sin(0.5 * math.pi * f)


@dataclass(frozen=True)
class KernelParams:
    """Truncation settings for the ``h`` kernel's m-series."""

    alpha: float
    m_max: int = 60
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        if self.m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {self.m_max}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}")


# ---------------------------------------------------------------- zeta family


def hurwitz_zeta(s: float, a: float) -> float:
    """Hurwitz zeta ``sum_{j>=0} (j + a)^-s``, analytically continued in ``s``.

    A block of leading terms is summed directly, the rest is an
    Euler-Maclaurin tail.  Valid for every real ``s != 1`` and ``a > 0``.
    """
    s = float(s)
    a = float(a)
    if s == 1.0:
        raise PoleError("hurwitz_zeta has a pole at s = 1")
    if not a > 0:
        raise NumericalDomainError(f"hurwitz_zeta needs a > 0, got a={a}")

    shift = max(0, math.ceil(max(15.0, abs(s) + 15.0) - a))
    head = math.fsum((a + j) ** -s for j in range(shift))
    b = a + shift
    tail = [b ** (1.0 - s) / (s - 1.0), 0.5 * b**-s]
    # rising factorial s (s+1) ... (s+2k-2), updated two factors at a time
    rising = s
    power = b ** (-s - 1.0)
    for k, coeff in enumerate(_EM_COEFFS, start=1):
        term = coeff * rising * power
        tail.append(term)
        if abs(term) < 1e-17 * (abs(head) + abs(tail[0]) + 1e-300):
            break
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= b * b
    return head + math.fsum(tail)


def riemann_zeta(s: float) -> float:
    """Riemann zeta; negative arguments go through the functional equation."""
    s = float(s)
    if s == 1.0:
        raise PoleError("riemann_zeta has a pole at s = 1")
    if s >= 0:
        return hurwitz_zeta(s, 1.0)
    if _is_int(s) and int(s) % 2 == 0:
        return 0.0
    t = 1.0 - s
    sin_part = sin_half_pi(s)
    if t < 150:
        pref = 2.0**s * math.pi ** (s - 1.0) * math.gamma(t)
        return pref * sin_part * hurwitz_zeta(t, 1.0)
    log_pref = s * math.log(2.0) + (s - 1.0) * math.log(math.pi) + math.lgamma(t)
    return math.exp(log_pref) * sin_part * hurwitz_zeta(t, 1.0)


def hurwitz_zeta_expansion(s: float, n: float, order: int = 2) -> float:
    """Large-``n`` asymptotic series of ``zeta(s, n)``.

    ``order=1`` keeps ``n^(1-s)/(s-1)``, ``order=2`` adds ``n^-s / 2`` and
    each further order adds one Bernoulli correction.
    """
    if s == 1:
        raise PoleError("hurwitz_zeta_expansion has a pole at s = 1")
    if n < 2:
        raise NumericalDomainError(f"expansion needs n >= 2, got {n}")
    if order < 1:
        raise ValueError("order must be >= 1")
    terms = [n ** (1.0 - s) / (s - 1.0)]
    if order >= 2:
        terms.append(0.5 * n**-s)
    rising = s
    for k in range(1, order - 1):
        terms.append(_EM_COEFFS[k - 1] * rising * n ** (-s - 2 * k + 1))
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return math.fsum(terms)


def gamma_fn(x: float) -> float:
    x = float(x)
    if x <= 0 and _is_int(x):
        raise PoleError(f"gamma has a pole at x = {x:g}")
    try:
        return math.gamma(x)
    except OverflowError:
        raise PoleError(f"gamma overflows at x = {x!r}, too close to a pole") from None


def harmonic_number(n_half: int, s: float) -> float:
    """Generalised harmonic number ``sum_{j=1}^{n_half} j^-s`` (exact partial sum)."""
    if n_half < 1:
        raise NumericalDomainError(f"n_half must be >= 1, got {n_half}")
    if s == 1:
        raise PoleError("harmonic_number: s = 1 is excluded")
    if n_half > 10_000_000:
        return riemann_zeta(s) - hurwitz_zeta(s, n_half + 1)
    j = np.arange(n_half, 0, -1, dtype=float)
    return float(np.sum(j**-s))


def harmonic_expansion(n_half: float, s: float) -> float:
    """Euler-Maclaurin form of ``H_{n/2, s}`` through the ``s/12`` term."""
    if s == 1:
        raise PoleError("harmonic_expansion: s = 1 is excluded")
    m = float(n_half)
    return math.fsum(
        [
            riemann_zeta(s),
            m ** (1.0 - s) / (1.0 - s),
            0.5 * m**-s,
            -s / 12.0 * m ** (-s - 1.0),
        ]
    )


# ---------------------------------------------------------------- kernels


def f_alpha(alpha: float) -> float:
    """``(4 - 2^(2-alpha)) zeta(alpha)``: top-minus-bottom eigenvalue limit."""
    if alpha == 1:
        raise PoleError("f_alpha has a pole at alpha = 1")
    return (4.0 - 2.0 ** (2.0 - alpha)) * riemann_zeta(alpha)


def g0(alpha: float) -> float:
    """Coefficient of the non-analytic ``(n/k)^(1-alpha)`` term.

    At even positive integers ``sin * Gamma`` is 0 * inf; the finite limit
    comes from the functional equation, ``g0 = -zeta(alpha)/zeta(1-alpha)``.
    Odd positive integers are genuine poles.
    """
    alpha = float(alpha)
    if alpha > 0 and _is_int(alpha):
        if int(alpha) % 2 == 1:
            raise PoleError(f"g0 has a pole at alpha = {alpha:g}")
        return -riemann_zeta(alpha) / riemann_zeta(1.0 - alpha)
    return (
        -(2.0**alpha)
        * math.pi ** (alpha - 1.0)
        * sin_half_pi(alpha)
        * math.gamma(1.0 - alpha)
    )


def _zeta_coeff(alpha: float, m: int) -> float:
    """``zeta(alpha - 2m) (2 pi)^(2m) / (2m)!`` without overflow."""
    s = alpha - 2 * m
    if s < 0 and _is_int(s) and int(s) % 2 == 0:
        return 0.0
    if s >= -1:
        return riemann_zeta(s) * (2 * math.pi) ** (2 * m) / math.factorial(2 * m)
    t = 2 * m + 1 - alpha
    ratio = math.exp(math.lgamma(t) - math.lgamma(2 * m + 1))
    return (
        (-1) ** m
        * 2.0**alpha
        * math.pi ** (alpha - 1.0)
        * sin_half_pi(alpha)
        * riemann_zeta(t)
        * ratio
    )


def gm(alpha: float, m: int) -> float:
    """``-2 zeta(alpha - 2m) (2 pi i)^(2m) / (2m)!`` (real)."""
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if alpha - 2 * m == 1:
        raise PoleError(f"g_{m} has a pole at alpha = {alpha:g}")
    return -2.0 * (-1) ** m * _zeta_coeff(alpha, m)


def _g_series(alpha: float, x, m_max: int, tol: float):
    """Sum ``g_m x^m`` for ``x = (k/n)^2``; returns (sum, tail estimate).

    The tail estimate treats the last two terms as geometric; it is
    ``inf`` wherever the terms stopped shrinking.
    """
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    est = np.full_like(x, np.inf)
    xm = np.ones_like(x)
    prev = None
    passed = 0
    for m in range(1, m_max + 1):
        xm = xm * x
        term = gm(alpha, m) * xm
        total = total + term
        if prev is not None:
            mag, pmag = np.abs(term), np.abs(prev)
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = np.where(pmag > 0, mag / pmag, np.where(mag > 0, np.inf, 0.0))
                est = np.where(mag == 0, 0.0, np.where(rho < 1, mag * rho / (1 - rho), np.inf))
            # one term can sit near a trivial zero of zeta, so demand two passes in a row
            passed = passed + 1 if np.all(est < 0.01 * tol) else 0
            if passed == 2:
                break
        prev = term
    return total, est


def h_kernel(alpha: float, ratio, params: KernelParams | None = None):
    """Normalised small-angle kernel ``h(alpha, n/k)``.

    ``ratio`` is ``n/k`` (scalar or array, each >= 2).  ``h(alpha, 2) == 1``
    holds identically; ``h -> 0`` as the ratio grows when ``alpha > 1``.
    """
    if params is None:
        params = KernelParams(alpha)
    elif params.alpha != alpha:
        raise ValueError("params.alpha does not match alpha")
    if alpha == 1:
        raise PoleError("h_kernel is undefined at alpha = 1")
    r = np.asarray(ratio, dtype=float)
    if np.any(r < 2):
        raise NumericalDomainError("h_kernel expansion only holds for n/k >= 2")
    f = f_alpha(alpha)
    if f == 0.0:
        raise NumericalDomainError(f"f(alpha) vanishes at alpha = {alpha:g}")
    series, est = _g_series(alpha, r**-2.0, params.m_max, params.tail_tol)
    worst = float(np.max(est)) / abs(f)
    if not worst < params.tail_tol:
        # at n/k = 2 the terms shrink like 4^-m; anything else is a bug upstream
        raise ConvergenceError(
            f"h_kernel m-series not converged within m_max={params.m_max}", estimate=worst
        )
    out = (g0(alpha) * r ** (1.0 - alpha) + series) / f
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- polylog / Lerch


def _reduce_theta(theta):
    theta = np.asarray(theta, dtype=float)
    # nearest-multiple subtraction keeps small angles exact (and exactly even)
    th = np.abs(theta - 2 * np.pi * np.round(theta / (2 * np.pi)))
    if np.any(th == 0):
        raise PoleError("polylog_pair needs theta != 0 mod 2 pi (z = 1)")
    return th


def polylog_pair(alpha: float, theta, method: str = "auto", tail_tol: float = TAIL_TOL):
    """``Li_a(e^{i theta}) + Li_a(e^{-i theta})``, real and even in ``theta``.

    ``method="auto"`` uses the small-angle expansion (convergent for every
    reduced angle in (0, pi]); positive integer ``alpha`` switches to the
    logarithmic form of that expansion.  ``method="series"`` sums the
    defining series with an Euler-type transform instead.
    """
    th = _reduce_theta(theta)
    if method == "series":
        # Li_a(z) = z * Phi(z, a, 1)
        vals = np.array(
            [2.0 * (np.exp(1j * t) * lerch_phi(t, alpha, 1, tail_tol)).real for t in th.ravel()]
        ).reshape(th.shape)
        return float(vals) if vals.ndim == 0 else vals
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    alpha = float(alpha)
    if alpha > 0 and _is_int(alpha):
        out = _polylog_pair_integer(int(alpha), th, tail_tol)
    else:
        r = 2 * np.pi / th
        series, est = _g_series(alpha, r**-2.0, 200, tail_tol)
        if not np.max(est) < tail_tol:
            raise ConvergenceError("polylog_pair expansion did not converge", float(np.max(est)))
        out = 2.0 * riemann_zeta(alpha) - g0(alpha) * r ** (1.0 - alpha) - series
    return float(out) if np.ndim(out) == 0 else out


def _polylog_pair_integer(p: int, th, tol: float):
    x = (th / (2 * np.pi)) ** 2
    lead = th ** (p - 1) / math.factorial(p - 1)
    if p % 2 == 1:
        h = math.fsum(1.0 / j for j in range(1, p))
        out = (-1) ** ((p - 1) // 2) * lead * 2.0 * (h - np.log(th))
    else:
        out = (-1) ** (p // 2) * math.pi * lead
    if p != 1:
        out = out + 2.0 * riemann_zeta(p)
    xm = np.ones_like(th)
    for m in range(1, 201):
        xm = xm * x
        if 2 * m == p - 1:
            continue
        coeff = _zeta_coeff(p, m)
        term = 2.0 * (-1) ** m * coeff * xm
        out = out + term
        if 2 * m > p and np.all(np.abs(term) < 0.01 * tol):
            break
    return out


def lerch_phi(theta: float, alpha: float, n: int, tail_tol: float = TAIL_TOL) -> complex:
    """``sum_{j>=0} e^{i j theta} / (j + n)^alpha`` for ``alpha >= 0``.

    Leading terms are summed directly; the tail is resummed with repeated
    differences (an Euler transform for series on the unit circle), whose
    remainder is bounded by ``|Delta^{p-1} a_N| / |1 - z|^p`` for completely
    monotone coefficients.
    """
    if alpha < 0:
        raise NumericalDomainError("lerch_phi needs alpha >= 0")
    if n < 1:
        raise NumericalDomainError("lerch_phi needs a positive integer n")
    z = complex(math.cos(theta), math.sin(theta))
    one_minus_z = abs(1 - z)
    if one_minus_z < 1e-15:
        raise PoleError("lerch_phi needs theta != 0 mod 2 pi")

    n_direct = max(0, math.ceil(40.0 / one_minus_z) - n)
    if n_direct > MAX_TERMS:
        raise ConvergenceError(
            f"lerch_phi would need {n_direct} direct terms (cap {MAX_TERMS})"
        )
    j = np.arange(n_direct, dtype=float)
    head = np.sum(np.exp(1j * theta * j) * (j + n) ** -alpha) if n_direct else 0j

    p_max = 40
    with mpmath.workdps(30 + p_max):
        start = n + n_direct
        a = [mpmath.mpf(start + i) ** (-mpmath.mpf(alpha)) for i in range(p_max + 1)]
        zc = mpmath.mpc(z.real, z.imag)
        w = 1 / (1 - zc)
        tail = mpmath.mpc(0)
        diffs = a
        estimate = None
        for p in range(p_max):
            term = zc**p * diffs[0] * w ** (p + 1)
            tail += term
            # remainder is bounded by |w|^(p+1) |Delta^p a_N|, i.e. |term|
            estimate = float(abs(term))
            if estimate < tail_tol:
                break
            diffs = [diffs[i + 1] - diffs[i] for i in range(len(diffs) - 1)]
        else:
            raise ConvergenceError("lerch_phi tail did not converge", estimate=estimate)
        tail_c = complex(tail)
    return complex(head) + z**n_direct * tail_c
