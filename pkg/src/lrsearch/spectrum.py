"""Spectrum of the power-law hopping Hamiltonian on a ring.

In the single-excitation sector the hopping matrix is a real symmetric
circulant, so its eigenvectors are Fourier modes and its eigenvalues are the
discrete Fourier transform of the first row.  Index convention: ``k = 1..n``
with ``k = n`` the top (uniform) mode.  Arrays are stored zero-based, so
``lam[k - 1]`` holds ``lambda_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft

from . import specfun
from .errors import DegenerateSpectrumError, NumericalDomainError


@dataclass(frozen=True)
class ChainSpec:
    """A closed chain of ``n`` spins with ``1/r^alpha`` couplings."""

    n: int
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class Spectrum:
    chain: ChainSpec
    lam: np.ndarray
    lam_tilde: np.ndarray
    lambda_min_index: int  # one-based

    @property
    def k_max(self) -> int:
        return self.chain.n

    @property
    def n(self) -> int:
        return self.chain.n

    def k(self) -> np.ndarray:
        """One-based mode labels matching ``lam`` and ``lam_tilde``."""
        return np.arange(1, self.n + 1)


def coupling_row(chain: ChainSpec) -> np.ndarray:
    """Couplings ``c_d = d^-alpha + (n-d)^-alpha`` for circular distance d = 1..n-1."""
    d = np.arange(1, chain.n, dtype=float)
    return d**-chain.alpha + (chain.n - d) ** -chain.alpha


def circulant_first_row(chain: ChainSpec) -> np.ndarray:
    return np.concatenate(([0.0], coupling_row(chain)))


def eigenvalues_fft(chain: ChainSpec) -> np.ndarray:
    """All n eigenvalues in O(n log n); element ``k-1`` is ``lambda_k``."""
    n = chain.n
    half = fft.rfft(circulant_first_row(chain)).real  # modes 0..n//2
    full = np.empty(n)
    full[: half.size] = half
    # lambda_{n-k} = lambda_k fills the upper half
    full[half.size :] = half[1 : n - half.size + 1][::-1]
    # roll so that index k-1 holds mode k (mode 0 == mode n goes last)
    return np.roll(full, -1)


def eigenvalues_direct(chain: ChainSpec) -> np.ndarray:
    """O(n^2) oracle: ``lambda_k = 2 sum_j cos(2 pi k j / n) / j^alpha``."""
    n = chain.n
    k = np.arange(1, n + 1, dtype=float)[:, None]
    j = np.arange(1, n, dtype=float)[None, :]
    return 2.0 * np.sum(np.cos(2 * np.pi * ((k * j) % n) / n) * j**-chain.alpha, axis=1)


def eigenvalues_exact(chain: ChainSpec, method: str = "fft") -> np.ndarray:
    if method == "fft":
        return eigenvalues_fft(chain)
    if method == "direct":
        return eigenvalues_direct(chain)
    raise ValueError(f"unknown method {method!r}")


def rescale(chain: ChainSpec, lam: np.ndarray) -> Spectrum:
    """Affine map sending the spectrum minimum to 0 and ``lambda_n`` to 1.

    For odd ``n`` the minimum sits at ``k = (n +- 1)/2`` rather than ``n/2``;
    the actual minimum is used either way.
    """
    lam = np.asarray(lam, dtype=float)
    i_min = int(np.argmin(lam))
    top, bottom = lam[-1], lam[i_min]
    width = top - bottom
    if not width > 0:
        raise DegenerateSpectrumError(f"degenerate spectrum for {chain}: max == min")
    lt = (lam - bottom) / width
    lt[-1] = 1.0
    lt[i_min] = 0.0
    return Spectrum(chain=chain, lam=lam, lam_tilde=lt, lambda_min_index=i_min + 1)


def spectrum(chain: ChainSpec, method: str = "fft") -> Spectrum:
    return rescale(chain, eigenvalues_exact(chain, method))


def spectral_gap_exact(spec: Spectrum) -> float:
    """``1 - lambda~_{n-1}``: rescaled distance between the two top eigenvalues."""
    return float(1.0 - spec.lam_tilde[-2])


# ---------------------------------------------------------------- closed forms


def lambda_top_closed(chain: ChainSpec) -> float:
    """``lambda_n = 2 zeta(alpha) - 2 zeta(alpha, n)``."""
    a = chain.alpha
    return 2.0 * specfun.riemann_zeta(a) - 2.0 * specfun.hurwitz_zeta(a, chain.n)


def lambda_half_closed(chain: ChainSpec) -> float:
    """Bottom eigenvalue ``lambda_{n/2}`` for even n via Hurwitz zeta."""
    n, a = chain.n, chain.alpha
    if n % 2:
        raise NumericalDomainError("lambda_half_closed needs even n")
    z = specfun.riemann_zeta(a)
    return 2.0 ** (1.0 - a) * (
        2.0 * z
        - specfun.hurwitz_zeta(a, n / 2)
        - 2.0**a * z
        + specfun.hurwitz_zeta(a, (n + 1) / 2)
    )


def gap_asymptotic(chain: ChainSpec) -> float:
    """Large-n gap keeping the leading ``n^(1-alpha)`` pieces.

    Defined for ``alpha < 3``, ``alpha != 1``; the ring at ``alpha = 1`` is
    only handled by the exact spectrum.
    """
    a = chain.alpha
    if a == 1 or a >= 3:
        raise NumericalDomainError(f"gap_asymptotic needs alpha < 3 and alpha != 1, got {a}")
    f = specfun.f_alpha(a)
    x = chain.n ** (1.0 - a)
    num = 1.0 - specfun.g0(a) / f * x
    den = 1.0 - 2.0 / f * x / (a - 1.0)
    return 1.0 - num / den


def gap_limit_subcritical(alpha: float) -> float:
    """n -> infinity gap for ``0 <= alpha < 1``."""
    if not 0 <= alpha < 1:
        raise NumericalDomainError("gap limit is finite only for alpha < 1")
    return 1.0 - (
        2.0 ** (alpha - 1.0)
        * math.pi ** (alpha - 1.0)
        * (1.0 - alpha)
        * specfun.sin_half_pi(alpha)
        * math.gamma(1.0 - alpha)
    )


def gap_leading_coefficient(alpha: float) -> float:
    """Prefactor of ``n^(1-alpha)`` in the gap for ``1 < alpha < 3``.

    First-order expansion of :func:`gap_asymptotic` in ``x = n^(1-alpha)``:
    ``1 - (1 - a x)/(1 - b x) = (a - b) x + O(x^2)`` with ``a = g0/f`` and
    ``b = 2/((alpha-1) f)``.
    """
    if not 1 < alpha < 3:
        raise NumericalDomainError("gap power law holds for 1 < alpha < 3")
    f = specfun.f_alpha(alpha)
    return specfun.g0(alpha) / f - 2.0 / ((alpha - 1.0) * f)


def rescaled_asymptotic(chain: ChainSpec, k) -> np.ndarray:
    """Asymptotic ``lambda~_k`` from the ``h`` kernel, for ``1 <= k <= n/2``."""
    a = chain.alpha
    f = specfun.f_alpha(a)
    h = specfun.h_kernel(a, chain.n / np.asarray(k, dtype=float))
    return (1.0 - h) / (1.0 - 2.0 / f * chain.n ** (1.0 - a) / (a - 1.0))
