"""Search-optimality analytics built on the rescaled spectrum.

The central quantities are the spectral sums ``S_q`` of the hopping
Hamiltonian, the amplitude ``nu = S_1 / sqrt(S_2)`` and the asymptotic peak
fidelity ``F_inf = nu^2``, together with their closed-form approximations
and the runtime estimate ``(pi/2) sqrt(n / F_inf)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import specfun
from .errors import DegenerateSpectrumError, NumericalDomainError, PoleError
from .spectrum import (
    ChainSpec,
    Spectrum,
    gap_asymptotic,
    spectral_gap_exact,
    spectrum as compute_spectrum,
)

POLE_GUARD = 1e-3


def s_q(spec: Spectrum, q: int) -> float:
    """``(1/n) sum_{i<n} (1 - lambda~_i)^-q`` with the top mode excluded."""
    if q < 1 or int(q) != q:
        raise ValueError(f"q must be a positive integer, got {q}")
    gaps = 1.0 - spec.lam_tilde[:-1]
    if np.any(gaps <= 0):
        raise DegenerateSpectrumError("a non-top rescaled eigenvalue equals 1")
    return float(np.sum(gaps ** -float(q)) / spec.n)


def amplitude_and_fidelity(spec: Spectrum) -> tuple[float, float]:
    s1, s2 = s_q(spec, 1), s_q(spec, 2)
    nu = s1 / math.sqrt(s2)
    return nu, nu * nu


def s_q_bar(chain: ChainSpec, q: int) -> float:
    """Closed-form leading behaviour of ``S_q`` for ``1 < alpha < 3``."""
    a = chain.alpha
    if not 1 < a < 3:
        raise NumericalDomainError(f"s_q_bar needs 1 < alpha < 3, got {a}")
    pole = 1.0 + 1.0 / q
    if abs(a - pole) < POLE_GUARD:
        raise PoleError(f"s_q_bar(q={q}) has a pole at alpha = {pole:g}")
    e = q * a - q
    ratio = specfun.f_alpha(a) / specfun.g0(a)
    return 2.0 * ratio**q * (
        chain.n ** (e - 1.0) * specfun.riemann_zeta(e) + 2.0 ** (e - 1.0) / (1.0 + q - q * a)
    )


def nu_bar(chain: ChainSpec) -> float:
    """Closed-form amplitude ``S1bar / sqrt(S2bar)``, for ``1 < alpha < 1.5``."""
    a, n = chain.alpha, chain.n
    if not 1 < a < 1.5:
        raise NumericalDomainError(f"nu_bar needs 1 < alpha < 1.5, got {a}")
    num = n ** (a - 2.0) * specfun.riemann_zeta(a - 1.0) + 2.0 ** (a - 2.0) / (2.0 - a)
    den = n ** (2 * a - 3.0) * specfun.riemann_zeta(2 * a - 2.0) + 2.0 ** (2 * a - 3.0) / (3.0 - 2 * a)
    return math.sqrt(2.0) * num / math.sqrt(den)


def f_inf_limit(alpha: float) -> float:
    """``(3 - 2 alpha) / (2 - alpha)^2``, the n -> infinity limit of ``nu_bar^2``.

    Defined on the closed interval [1, 1.5]; the endpoints give 1 and 0.
    """
    if not 1 <= alpha <= 1.5:
        raise NumericalDomainError(f"f_inf_limit needs 1 <= alpha <= 1.5, got {alpha}")
    return (3.0 - 2.0 * alpha) / (2.0 - alpha) ** 2


def inset_value(alpha: float) -> tuple[float, str]:
    """Asymptotic fidelity curve over all alpha, with the source of each value.

    Below 1 the gap stays finite and the value is 1 by the constant-gap
    argument rather than the closed form; above 1.5 it is 0.
    """
    if alpha <= 1:
        return 1.0, "asymptotic-argument"
    if alpha >= 1.5:
        return 0.0, "asymptotic-argument"
    return f_inf_limit(alpha), "closed-form"


def predicted_time(n: int, f_inf: float) -> float:
    if not 0 < f_inf <= 1:
        raise NumericalDomainError(f"f_inf must lie in (0, 1], got {f_inf}")
    return 0.5 * math.pi * math.sqrt(n / f_inf)


def spectral_condition(
    chain: ChainSpec, c: float = 1.0, method: str = "exact"
) -> tuple[bool, float]:
    """Whether ``Delta >= c / sqrt(n)``; the second item is ``Delta sqrt(n) / c``."""
    if not c > 0:
        raise ValueError("c must be positive")
    if method == "exact":
        delta = spectral_gap_exact(compute_spectrum(chain))
    elif method == "asymptotic":
        delta = gap_asymptotic(chain)
    else:
        raise ValueError(f"unknown method {method!r}")
    margin = delta * math.sqrt(chain.n) / c
    return margin >= 1.0, margin


# ---------------------------------------------------------------- reports


@dataclass
class AsymptoticReport:
    n: int
    alpha: float
    delta_exact: float
    delta_asym: float | None
    s1: float
    s2: float
    nu: float
    f_inf: float
    s1_bar: float | None
    s2_bar: float | None
    nu_bar: float | None
    f_inf_bar: float | None
    f_inf_limit: float
    f_inf_limit_source: str
    t_pred: float

    def to_dict(self) -> dict:
        return asdict(self)


def _maybe(fn, *args):
    try:
        return fn(*args)
    except (NumericalDomainError, ArithmeticError):
        return None


def asymptotic_report(chain: ChainSpec, spec: Spectrum | None = None) -> AsymptoticReport:
    """Exact finite-n quantities next to every closed form defined at ``chain``."""
    if spec is None:
        spec = compute_spectrum(chain)
    s1, s2 = s_q(spec, 1), s_q(spec, 2)
    nu = s1 / math.sqrt(s2)
    f_inf = nu * nu
    nb = _maybe(nu_bar, chain)
    limit, source = inset_value(chain.alpha)
    return AsymptoticReport(
        n=chain.n,
        alpha=chain.alpha,
        delta_exact=spectral_gap_exact(spec),
        delta_asym=_maybe(gap_asymptotic, chain),
        s1=s1,
        s2=s2,
        nu=nu,
        f_inf=f_inf,
        s1_bar=_maybe(s_q_bar, chain, 1),
        s2_bar=_maybe(s_q_bar, chain, 2),
        nu_bar=nb,
        f_inf_bar=None if nb is None else nb * nb,
        f_inf_limit=limit,
        f_inf_limit_source=source,
        t_pred=predicted_time(chain.n, f_inf),
    )


# ---------------------------------------------------------------- convergence probes


@dataclass
class ConvergenceProbe:
    alpha: float
    q: int
    n: int
    A_at_k: dict[int, float]
    B_at_k: dict[int, float]
    B_min: float
    B_max: float
    b_bounded: bool
    divergence_exponent: float
    ns: list[int]
    s_q_values: list[float]
    relative_changes: list[float]
    slope: float
    cauchy: bool


def leading_term(chain: ChainSpec, k) -> np.ndarray:
    """``A = (g0/f) (n/k)^(1-alpha)``."""
    a = chain.alpha
    return specfun.g0(a) / specfun.f_alpha(a) * (chain.n / np.asarray(k, dtype=float)) ** (1.0 - a)


def remainder_term(chain: ChainSpec, k) -> np.ndarray:
    """``B = (2 zeta - Li pair) / f - A`` evaluated through the polylog itself."""
    a = chain.alpha
    k = np.asarray(k, dtype=float)
    pair = specfun.polylog_pair(a, 2 * np.pi * k / chain.n)
    return (2.0 * specfun.riemann_zeta(a) - pair) / specfun.f_alpha(a) - leading_term(chain, k)


def s_q_sequence(alpha: float, q: int, ns) -> list[float]:
    return [s_q(compute_spectrum(ChainSpec(int(n), alpha)), q) for n in ns]


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def convergence_probe(
    chain: ChainSpec, q: int, doublings: int = 4, cauchy_tol: float = 1e-2
) -> ConvergenceProbe:
    """Finite-n stand-in for the S_q convergence statements.

    Evaluates the leading term A and remainder B at ``k = 1`` and ``k = n/2``,
    then follows ``S_q`` over ``n, 2n, ..., 2^doublings n``.  The sequence is
    called Cauchy when every successive relative change is below
    ``cauchy_tol``.
    """
    a = chain.alpha
    if not 1 < a < 3:
        raise NumericalDomainError(f"convergence_probe needs 1 < alpha < 3, got {a}")
    if a == 1 + 1 / q:
        raise PoleError(f"alpha = 1 + 1/q = {a:g} is the divergence threshold")
    n = chain.n - chain.n % 2
    probe_chain = ChainSpec(n, a)
    ks = [1, n // 2]
    A = {k: float(leading_term(probe_chain, k)) for k in ks}
    B = {k: float(remainder_term(probe_chain, k)) for k in ks}
    ns = [n * 2**j for j in range(doublings + 1)]
    vals = s_q_sequence(a, q, ns)
    changes = [abs(vals[i + 1] - vals[i]) / abs(vals[i]) for i in range(len(vals) - 1)]
    return ConvergenceProbe(
        alpha=a,
        q=q,
        n=n,
        A_at_k=A,
        B_at_k=B,
        B_min=B[1],
        B_max=B[n // 2],
        b_bounded=all(0 < abs(b) < 1 for b in B.values()),
        divergence_exponent=q * a - q - 1.0,
        ns=ns,
        s_q_values=vals,
        relative_changes=changes,
        slope=loglog_slope(ns, vals),
        cauchy=all(c < cauchy_tol for c in changes),
    )
