"""Search dynamics: Hamiltonian assembly, hopping-rate choice, propagation.

Sign convention: every coupling is positive, so the uniform state |s> is the
*top* eigenvector of the hopping matrix and the search happens between the
two largest eigenvalues of ``gamma H + |w><w|``.  All gaps below refer to
that top pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft, linalg, optimize
from scipy.special import jv

from .analytics import amplitude_and_fidelity
from .errors import DenseCapError, NumericalDomainError, OptimizationError, SpectralBoundError
from .spectrum import ChainSpec, Spectrum, circulant_first_row, eigenvalues_fft, spectrum

DENSE_CAP = 8192
INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class SearchProblem:
    chain: ChainSpec
    gamma: float
    w: int = 1  # one-based marked site
    noise_diag: np.ndarray | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 1 <= self.w <= self.chain.n:
            raise ValueError(f"marked site w={self.w} outside 1..{self.chain.n}")
        if self.noise_diag is not None:
            nd = np.asarray(self.noise_diag, dtype=float)
            if nd.shape != (self.chain.n,):
                raise ValueError("noise_diag must have length n")
            object.__setattr__(self, "noise_diag", nd)

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.chain.n) if self.noise_diag is None else self.noise_diag.copy()
        d[self.w - 1] += 1.0
        return d


@dataclass
class FidelityTrace:
    times: np.ndarray
    fidelities: np.ndarray
    std: np.ndarray | None = None


@dataclass
class SearchResult:
    t_star: float
    f_star: float
    gamma_used: float
    method: str
    window: tuple[float, float]
    at_edge: bool = False


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    realizations: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")


@dataclass
class EnsembleResult:
    noise: NoiseSpec
    trace: FidelityTrace
    peak_time: float
    peak_fidelity: float
    realization_peak_mean: float
    realization_peak_std: float
    realization_peaks: np.ndarray = field(repr=False)


# ---------------------------------------------------------------- Hamiltonian


def build_search_hamiltonian(problem: SearchProblem, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``gamma J + diag(e_w + noise)`` in the single-excitation basis."""
    n = problem.chain.n
    if n > dense_cap:
        raise DenseCapError(f"n={n} exceeds the dense cap {dense_cap}; use the Chebyshev path")
    h = problem.gamma * linalg.circulant(circulant_first_row(problem.chain))
    h[np.diag_indices(n)] = problem.diagonal()
    return h


def uniform_state(n: int) -> np.ndarray:
    return np.full(n, 1.0 / math.sqrt(n))


# ---------------------------------------------------------------- top gap and gamma


def _top_pair_offsets(lam: np.ndarray, gamma: float) -> tuple[float, float]:
    """Top two eigenvalues of ``gamma H + |w><w|`` minus ``gamma lambda_n``.

    Rank-one update of a circulant: the eigenvalues that move solve
    ``(1/n) sum_k 1 / (u + d_k) = 1`` with ``d_k = gamma (lambda_n - lambda_k)``.
    The top root lies in (0, 1], the next one in (-d_min, 0).
    """
    n = lam.size
    d = gamma * (lam[-1] - lam[:-1])
    d_min = float(d.min())

    def secular(u):
        return (1.0 / u + np.sum(1.0 / (u + d))) / n - 1.0

    u1 = optimize.brentq(secular, 1e-3 / n, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    eps = 1e-13 * d_min
    u2 = optimize.brentq(secular, -d_min + eps, -eps, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    return u1, u2


def top_gap(chain: ChainSpec, gamma: float, lam: np.ndarray | None = None) -> float:
    """Noiseless gap between the two largest eigenvalues of the search Hamiltonian."""
    if lam is None:
        lam = eigenvalues_fft(chain)
    u1, u2 = _top_pair_offsets(lam, gamma)
    return u1 - u2


def top_gap_dense(problem: SearchProblem) -> float:
    """Dense-eigensolver oracle for :func:`top_gap`; also valid with noise."""
    h = build_search_hamiltonian(problem)
    n = problem.chain.n
    e = linalg.eigh(h, eigvals_only=True, subset_by_index=[n - 2, n - 1])
    return float(e[1] - e[0])


def gamma_seed(spec: Spectrum) -> float:
    """``(1/n) sum_{k<n} 1/(lambda_n - lambda_k)``, i.e. S_1 in unscaled units."""
    lam = spec.lam
    return float(np.sum(1.0 / (lam[-1] - lam[:-1])) / spec.n)


def golden_section(f, a: float, b: float, tol: float, maximize: bool = False) -> tuple[float, float]:
    """Golden-section search for an extremum of a unimodal ``f`` on [a, b].

    Returns ``(x, f(x))`` once the bracket is narrower than ``tol``.
    """
    sign = -1.0 if maximize else 1.0
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = sign * f(d)
    if fc < fd:
        return c, sign * fc
    return d, sign * fd


def _is_unimodal(values: np.ndarray, rtol: float = 1e-12) -> bool:
    diffs = np.diff(values)
    slack = rtol * np.max(np.abs(values))
    i = int(np.argmin(values))
    return bool(np.all(diffs[:i] <= slack) and np.all(diffs[i:] >= -slack))


def gamma_star(
    chain: ChainSpec,
    w: int = 1,
    spec: Spectrum | None = None,
    scan_points: int = 41,
    rtol: float = 1e-6,
) -> float:
    """Hopping rate minimising the top gap of the noiseless search Hamiltonian.

    The ring is translation invariant, so ``w`` does not change the answer;
    it is accepted for interface symmetry.  The bracket is
    ``[gamma0/4, 4 gamma0]`` around the analytic seed; a log-spaced scan
    checks unimodality before golden-section refinement.
    """
    if not 1 <= w <= chain.n:
        raise ValueError(f"marked site w={w} outside 1..{chain.n}")
    if spec is None:
        spec = spectrum(chain)
    g0 = gamma_seed(spec)
    grid = np.geomspace(g0 / 4, 4 * g0, scan_points)
    gaps = np.array([top_gap(chain, g, spec.lam) for g in grid])
    i = int(np.argmin(gaps))
    scan = list(zip(grid.tolist(), gaps.tolist()))
    if i in (0, scan_points - 1):
        raise OptimizationError(f"top-gap minimum at the bracket edge for {chain}", scan=scan)
    if not _is_unimodal(gaps):
        raise OptimizationError(f"top gap is not unimodal on the bracket for {chain}", scan=scan)
    x, _ = golden_section(lambda g: top_gap(chain, g, spec.lam), grid[i - 1], grid[i + 1], rtol * g0)
    return float(x)


# ---------------------------------------------------------------- propagation


class DenseEvolver:
    """Diagonalise once, then evaluate amplitudes at any time in O(n)."""

    def __init__(self, problem: SearchProblem, dense_cap: int = DENSE_CAP):
        self.problem = problem
        h = build_search_hamiltonian(problem, dense_cap)
        self.energies, self.vectors = linalg.eigh(h)
        n = problem.chain.n
        self.initial = uniform_state(n)
        self.coeffs = self.vectors.T @ self.initial
        self.marked_row = self.vectors[problem.w - 1] * self.coeffs

    def fidelity(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty(times.size)
        chunk = max(1, 2_000_000 // self.energies.size)
        for start in range(0, times.size, chunk):
            t = times[start : start + chunk]
            phases = np.exp(-1j * np.outer(t, self.energies))
            out[start : start + chunk] = np.abs(phases @ self.marked_row) ** 2
        out[times == 0] = 1.0 / self.energies.size
        return out

    def state(self, t: float) -> np.ndarray:
        return self.vectors @ (np.exp(-1j * self.energies * t) * self.coeffs)


def evolve_dense(problem: SearchProblem, times) -> FidelityTrace:
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise NumericalDomainError("times must be nonnegative")
    return FidelityTrace(times=times, fidelities=DenseEvolver(problem).fidelity(times))


class ChebyshevEvolver:
    """Chebyshev expansion of ``exp(-i H tau)`` using FFT matrix-vector products."""

    def __init__(self, problem: SearchProblem, coeff_tol: float = 1e-14):
        self.problem = problem
        self.coeff_tol = coeff_tol
        lam = eigenvalues_fft(problem.chain)
        # np.fft ordering: mode 0 (the top, k = n) first
        self.mode_eigs = problem.gamma * np.roll(lam, 1)
        self.diag = problem.diagonal()
        lo = problem.gamma * lam.min() + self.diag.min()
        hi = problem.gamma * lam.max() + self.diag.max()
        pad = 1e-3 * (hi - lo) + 1e-12
        self.center = 0.5 * (hi + lo)
        self.half_width = 0.5 * (hi - lo) + pad
        self._cache: dict[float, np.ndarray] = {}

    def apply(self, v: np.ndarray) -> np.ndarray:
        return fft.ifft(self.mode_eigs * fft.fft(v)) + self.diag * v

    def _coefficients(self, tau: float) -> np.ndarray:
        if tau in self._cache:
            return self._cache[tau]
        x = self.half_width * tau
        kmax = int(x + 10.0 * max(x, 1.0) ** (1 / 3) + 40)
        while True:
            js = jv(np.arange(kmax), x)
            if abs(js[-1]) < self.coeff_tol and abs(js[-2]) < self.coeff_tol:
                break
            kmax *= 2
        order = int(np.nonzero(np.abs(js) >= self.coeff_tol)[0].max()) + 1 if x > 0 else 1
        c = 2.0 * (-1j) ** np.arange(order) * js[:order]
        c[0] = js[0]
        if len(self._cache) < 8:
            self._cache[tau] = c
        return c

    def step(self, psi: np.ndarray, tau: float) -> np.ndarray:
        if tau == 0:
            return psi.copy()
        c = self._coefficients(tau)
        a, b = self.half_width, self.center
        norm0 = np.linalg.norm(psi)

        def x_apply(v):
            return (self.apply(v) - b * v) / a

        prev = psi
        out = c[0] * prev
        if c.size > 1:
            cur = x_apply(psi)
            out = out + c[1] * cur
            for k in range(2, c.size):
                prev, cur = cur, 2.0 * x_apply(cur) - prev
                out = out + c[k] * cur
                # T_k(X) is bounded by 1 only when the spectrum sits in [-1, 1]
                if np.linalg.norm(cur) > 1.01 * norm0:
                    raise SpectralBoundError("Chebyshev terms grew: spectral bounds violated")
        return np.exp(-1j * b * tau) * out


def evolve_chebyshev(problem: SearchProblem, t: float, dt_report: float) -> FidelityTrace:
    """Fidelity at ``0, dt, 2 dt, ...`` up to ``t`` via repeated Chebyshev steps."""
    if t < 0 or not dt_report > 0:
        raise NumericalDomainError("need t >= 0 and dt_report > 0")
    ev = ChebyshevEvolver(problem)
    steps = int(round(t / dt_report))
    times = dt_report * np.arange(steps + 1)
    psi = uniform_state(problem.chain.n).astype(complex)
    w = problem.w - 1
    fids = np.empty(steps + 1)
    fids[0] = 1.0 / problem.chain.n
    for i in range(1, steps + 1):
        psi = ev.step(psi, dt_report)
        fids[i] = abs(psi[w]) ** 2
    return FidelityTrace(times=times, fidelities=fids)


# ---------------------------------------------------------------- peak search


def _fidelity_estimate(chain: ChainSpec) -> float:
    try:
        return amplitude_and_fidelity(spectrum(chain))[1]
    except (NumericalDomainError, ArithmeticError):
        return 0.25


def find_peak(
    problem: SearchProblem,
    window_factor: float = 1.5,
    coarse_points: int = 400,
    method: str = "dense",
    f_hat: float | None = None,
    t_rtol: float = 1e-7,
) -> SearchResult:
    """Peak fidelity and its time inside ``(0, window_factor (pi/2) sqrt(n / F))``.

    A coarse scan locates the global maximum of the window, golden-section
    search refines it.  If the maximum sits on the window edge the window is
    doubled once; if it is still on the edge a warning is issued and the edge
    value is reported.
    """
    if window_factor < 1:
        raise ValueError("window_factor must be >= 1")
    if coarse_points < 200:
        raise ValueError("coarse_points must be >= 200")
    n = problem.chain.n
    if f_hat is None:
        f_hat = _fidelity_estimate(problem.chain)
    t_max = window_factor * 0.5 * math.pi * math.sqrt(n / f_hat)

    if method == "dense":
        scan = _DenseScan(problem)
    elif method == "chebyshev":
        scan = _ChebyshevScan(problem)
    else:
        raise ValueError(f"unknown method {method!r}")

    for attempt in range(2):
        i, grid, fids = scan.coarse(t_max, coarse_points)
        at_edge = i == grid.size - 1
        if not at_edge:
            break
        if attempt == 0:
            t_max *= 2
    if at_edge:
        warnings.warn(
            f"fidelity maximum at the window edge t={t_max:.6g} for {problem.chain}",
            RuntimeWarning,
            stacklevel=2,
        )
        return SearchResult(float(grid[i]), float(fids[i]), problem.gamma, method, (0.0, t_max), True)
    lo, hi = grid[max(i - 1, 0)], grid[i + 1]
    t_star, f_star = golden_section(scan.fidelity_near, lo, hi, t_rtol * grid[i], maximize=True)
    if fids[i] > f_star:
        t_star, f_star = grid[i], fids[i]
    return SearchResult(float(t_star), float(f_star), problem.gamma, method, (0.0, t_max), False)


class _DenseScan:
    def __init__(self, problem):
        self.ev = DenseEvolver(problem)

    def coarse(self, t_max, points):
        grid = np.linspace(0.0, t_max, points + 1)
        fids = self.ev.fidelity(grid)
        return int(np.argmax(fids)), grid, fids

    def fidelity_near(self, t):
        return float(self.ev.fidelity(t)[0])


class _ChebyshevScan:
    """Coarse trace without storing every state; keeps the one left of the max."""

    def __init__(self, problem):
        self.ev = ChebyshevEvolver(problem)
        self.w = problem.w - 1
        self.n = problem.chain.n

    def coarse(self, t_max, points):
        dt = t_max / points
        grid = dt * np.arange(points + 1)
        psi = uniform_state(self.n).astype(complex)
        fids = np.empty(points + 1)
        fids[0] = 1.0 / self.n
        best, prev_state = 0, psi
        self.anchor = (0.0, psi)
        for i in range(1, points + 1):
            nxt = self.ev.step(psi, dt)
            fids[i] = abs(nxt[self.w]) ** 2
            if fids[i] > fids[best]:
                best = i
                self.anchor = (grid[i - 1], psi)
            psi = nxt
        return best, grid, fids

    def fidelity_near(self, t):
        t0, psi0 = self.anchor
        return float(abs(self.ev.step(psi0, t - t0)[self.w]) ** 2)


# ---------------------------------------------------------------- dephasing


def realization_rng(seed: int, realization: int) -> np.random.Generator:
    """Independent generator for one noise realization, fixed by (seed, realization)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(realization,)))


def noise_sample(n: int, noise: NoiseSpec, realization: int) -> np.ndarray:
    if noise.sigma == 0:
        return np.zeros(n)
    return realization_rng(noise.seed, realization).normal(0.0, noise.sigma, n)


def noisy_ensemble(
    chain: ChainSpec,
    gamma: float,
    w: int,
    noise: NoiseSpec,
    times,
    method: str = "dense",
) -> EnsembleResult:
    """Average fidelity over static Gaussian diagonal disorder.

    Traces are averaged pointwise first; the peak of the mean trace and the
    spread of per-realization peaks (both on the ``times`` grid) are reported.
    """
    times = np.asarray(times, dtype=float)
    # without disorder every realization is the same run, so do it once
    count = 1 if noise.sigma == 0 else noise.realizations
    traces = np.empty((count, times.size))
    for r in range(count):
        prob = SearchProblem(chain, gamma, w, noise_sample(chain.n, noise, r))
        if method == "dense":
            traces[r] = DenseEvolver(prob).fidelity(times)
        elif method == "chebyshev":
            traces[r] = _chebyshev_on_grid(prob, times)
        else:
            raise ValueError(f"unknown method {method!r}")
    mean = traces.mean(axis=0)
    std = traces.std(axis=0)
    peaks = traces.max(axis=1)
    i = int(np.argmax(mean))
    return EnsembleResult(
        noise=noise,
        trace=FidelityTrace(times, mean, std),
        peak_time=float(times[i]),
        peak_fidelity=float(mean[i]),
        realization_peak_mean=float(peaks.mean()),
        realization_peak_std=float(peaks.std()),
        realization_peaks=peaks,
    )


def _chebyshev_on_grid(problem: SearchProblem, times: np.ndarray) -> np.ndarray:
    ev = ChebyshevEvolver(problem)
    psi = uniform_state(problem.chain.n).astype(complex)
    out = np.empty(times.size)
    t_prev = 0.0
    for i, t in enumerate(times):
        psi = ev.step(psi, t - t_prev)
        t_prev = t
        out[i] = abs(psi[problem.w - 1]) ** 2 if t > 0 else 1.0 / problem.chain.n
    return out
