import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrsearch import specfun
from lrsearch.errors import ConvergenceError, NumericalDomainError, PoleError

ZETA2 = math.pi**2 / 6


# ---------------------------------------------------------------- zeta family


@pytest.mark.parametrize(
    "s, expected",
    [(2.0, ZETA2), (-1.0, -1.0 / 12.0), (0.0, -0.5), (4.0, math.pi**4 / 90), (-2.0, 0.0)],
)
def test_riemann_zeta_classical_values(s, expected):
    assert specfun.riemann_zeta(s) == pytest.approx(expected, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("s", np.round(np.linspace(-10, 10, 81), 6))
def test_riemann_zeta_matches_mpmath(s):
    if s == 1:
        return
    ref = float(mpmath.zeta(s))
    got = specfun.riemann_zeta(s)
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_zeta_pole():
    with pytest.raises(PoleError):
        specfun.riemann_zeta(1.0)
    with pytest.raises(PoleError):
        specfun.hurwitz_zeta(1.0, 3.0)


def test_hurwitz_half_argument_identity():
    assert specfun.hurwitz_zeta(2.0, 0.5) == pytest.approx(3 * ZETA2, rel=1e-13)
    assert specfun.hurwitz_zeta(2.0, 1.0) == pytest.approx(ZETA2, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    # mpmath itself breaks down for vanishingly small s, so those are left out
    s=st.floats(-4.0, 8.0).filter(lambda x: abs(x - 1) > 1e-3 and (x == 0 or abs(x) > 1e-8)),
    a=st.floats(0.05, 500.0),
)
def test_hurwitz_matches_mpmath(s, a):
    ref = float(mpmath.zeta(s, a))
    # for negative s the head and tail both grow like b^(1-s), b the shifted argument,
    # and their cancellation sets the absolute accuracy floor
    b = max(a, abs(s) + 15.0)
    scale = max(1.0, b ** max(0.0, -s + 1))
    assert abs(specfun.hurwitz_zeta(s, a) - ref) <= max(1e-10, 1e-15 * scale) + 1e-12 * abs(ref)


def test_hurwitz_two_term_expansion_at_100():
    exact = 0.20050124998177190742  # mpmath, 30 digits
    assert specfun.hurwitz_zeta(1.5, 100) == pytest.approx(exact, rel=1e-13)
    assert abs(exact - specfun.hurwitz_zeta_expansion(1.5, 100, 2)) < 1e-4


def test_hurwitz_expansion_orders_improve():
    exact = specfun.hurwitz_zeta(2.5, 50)
    errs = [abs(specfun.hurwitz_zeta_expansion(2.5, 50, k) - exact) for k in (1, 2, 3, 4)]
    assert errs == sorted(errs, reverse=True)


# ---------------------------------------------------------------- gamma, harmonic


@pytest.mark.parametrize(
    "x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (-0.5, -3.5449077018110320546)]
)
def test_gamma_values(x, expected):
    assert specfun.gamma_fn(x) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0, 1e-310])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        specfun.gamma_fn(x)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-10, 10).filter(lambda v: not (v <= 0.5 and abs(v - round(v)) < 1e-6)))
def test_gamma_matches_mpmath(x):
    assert specfun.gamma_fn(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-12)


def test_harmonic_numbers():
    for s in (0.3, 2.0, 5.5):
        assert specfun.harmonic_number(1, s) == 1.0
    assert specfun.harmonic_number(4, 2.0) == pytest.approx(1.4236111111111111111, rel=1e-15)
    with pytest.raises(PoleError):
        specfun.harmonic_number(4, 1.0)


def test_harmonic_expansion_at_ten_thousand():
    exact = specfun.harmonic_number(10_000, 0.5)
    assert abs(exact - specfun.harmonic_expansion(10_000, 0.5)) < 1e-6


@pytest.mark.parametrize("s", [0.5, 1.5, 2.5])
def test_harmonic_expansion_truncation_error_shrinks(s):
    # high-precision truncation error, free of the double-precision floor
    def err(m):
        with mpmath.workdps(40):
            exact = mpmath.zeta(s) - mpmath.zeta(s, m + 1)
            m = mpmath.mpf(m)
            approx = mpmath.zeta(s) + m ** (1 - s) / (1 - s) + m**-s / 2 - s / 12 * m ** (-s - 1)
            return abs((exact - approx) / exact)

    errs = [err(m) for m in (100, 1000, 10_000)]
    assert errs[0] > errs[1] > errs[2]


# ---------------------------------------------------------------- kernels


def test_f_alpha_values():
    assert specfun.f_alpha(2.0) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    assert specfun.f_alpha(0.0) == 0.0
    assert specfun.f_alpha(3.0) == pytest.approx(4.2071991610585799989, rel=1e-14)
    with pytest.raises(PoleError):
        specfun.f_alpha(1.0)


def test_ratio_identity_at_two():
    assert specfun.f_alpha(2.0) / specfun.g0(2.0) == pytest.approx(0.25, rel=1e-13)


@pytest.mark.parametrize("alpha", np.linspace(1.01, 2.99, 60))
def test_ratio_identity_and_bound(alpha):
    ratio = specfun.f_alpha(alpha) / specfun.g0(alpha)
    identity = -(4 - 2 ** (2 - alpha)) * specfun.riemann_zeta(1 - alpha)
    assert ratio == pytest.approx(identity, rel=1e-10)
    assert abs(ratio) < 1


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.5, 2.5, 4.5])
def test_g0_matches_mpmath(alpha):
    a = mpmath.mpf(alpha)
    ref = -(2**a) * mpmath.pi ** (a - 1) * mpmath.sin(a * mpmath.pi / 2) * mpmath.gamma(1 - a)
    assert specfun.g0(alpha) == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("alpha", [1.0, 3.0, 5.0])
def test_g0_odd_integer_poles(alpha):
    with pytest.raises(PoleError):
        specfun.g0(alpha)


def test_g1_at_half():
    assert specfun.gm(0.5, 1) == pytest.approx(-1.0061154429381878848, rel=1e-13)


@pytest.mark.parametrize("alpha, m", [(0.5, 3), (1.3, 7), (2.5, 12), (1.7, 30)])
def test_gm_matches_mpmath(alpha, m):
    with mpmath.workdps(40):
        ref = -2 * (-1) ** m * mpmath.zeta(alpha - 2 * m) * (2 * mpmath.pi) ** (2 * m) / mpmath.factorial(2 * m)
    assert specfun.gm(alpha, m) == pytest.approx(float(ref), rel=1e-11)


def test_gm_pole():
    with pytest.raises(PoleError):
        specfun.gm(3.0, 1)


@pytest.mark.parametrize("alpha", np.linspace(1.05, 2.95, 39))
def test_h_normalisation(alpha):
    if abs(alpha - 2.0) < 1e-9:
        return
    assert abs(specfun.h_kernel(alpha, 2.0) - 1.0) < 1e-12


def test_h_vanishes_for_large_ratio():
    vals = specfun.h_kernel(1.7, np.array([1e2, 1e4, 1e6]))
    assert np.all(np.diff(np.abs(vals)) < 0) and abs(vals[-1]) < 1e-3


def test_h_against_polylog_oracle():
    alpha, theta = 0.5, 2 * math.pi / 10
    pair = 0.25168793685861359102  # mpmath polylog, 30 digits
    lhs = 2 * specfun.riemann_zeta(alpha) - specfun.f_alpha(alpha) * specfun.h_kernel(alpha, 10.0)
    assert abs(lhs - pair) < 1e-8


def test_h_domain():
    with pytest.raises(NumericalDomainError):
        specfun.h_kernel(1.5, 1.9)
    with pytest.raises(PoleError):
        specfun.h_kernel(1.0, 4.0)


def test_h_reports_non_convergence():
    params = specfun.KernelParams(1.5, m_max=3)
    with pytest.raises(ConvergenceError) as exc:
        specfun.h_kernel(1.5, 2.0, params)
    assert exc.value.estimate is not None and exc.value.estimate > 0


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        specfun.KernelParams(1.5, m_max=0)
    with pytest.raises(ValueError):
        specfun.KernelParams(1.5, tail_tol=0.0)


# ---------------------------------------------------------------- polylog and Lerch


@pytest.mark.parametrize(
    "alpha, theta, expected",
    [
        (0.5, 2 * math.pi / 10, 0.25168793685861359102),
        (1.5, 1.0, 0.42009884385106198934),
        (2.5, 0.3, 2.2652144690634073873),
    ],
)
def test_polylog_pair_frozen_values(alpha, theta, expected):
    assert specfun.polylog_pair(alpha, theta) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0])
def test_polylog_pair_matches_mpmath(alpha):
    thetas = np.array([1e-3, 0.05, 0.7, 2.0, 3.1])
    got = specfun.polylog_pair(alpha, thetas)
    with mpmath.workdps(40):
        ref = [2 * float(mpmath.re(mpmath.polylog(alpha, mpmath.expj(t)))) for t in thetas]
    np.testing.assert_allclose(got, ref, rtol=1e-11, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.5, 2.5, 3.5])
def test_polylog_at_minus_one(alpha):
    expected = -2 * (1 - 2 ** (1 - alpha)) * specfun.riemann_zeta(alpha)
    assert specfun.polylog_pair(alpha, math.pi) == pytest.approx(expected, rel=1e-12)


def test_polylog_alpha_one_log_form():
    theta = np.linspace(0.01, 3.1, 25)
    expected = -2 * np.log(np.abs(1 - np.exp(1j * theta)))
    np.testing.assert_allclose(specfun.polylog_pair(1.0, theta), expected, rtol=1e-13, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.0, 4.0), theta=st.floats(1e-3, 2 * math.pi - 1e-3))
def test_polylog_pair_even_and_matches_series(alpha, theta):
    a = specfun.polylog_pair(alpha, theta)
    assert a == pytest.approx(specfun.polylog_pair(alpha, -theta), rel=1e-13, abs=1e-13)
    if theta > 0.05 and theta < 2 * math.pi - 0.05:
        b = specfun.polylog_pair(alpha, theta, method="series")
        assert a == pytest.approx(b, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("alpha", [1.2, 1.8, 2.6])
def test_polylog_pair_below_twice_zeta(alpha):
    theta = np.linspace(1e-3, math.pi, 200)
    assert np.all(2 * specfun.riemann_zeta(alpha) - specfun.polylog_pair(alpha, theta) >= 0)


def test_polylog_pole():
    with pytest.raises(PoleError):
        specfun.polylog_pair(1.5, 0.0)


def test_lerch_phi_value():
    got = specfun.lerch_phi(0.7, 1.3, 5)
    assert got == pytest.approx(0.111257778762258912 + 0.144230331895422619j, rel=1e-12)


def test_lerch_phi_leading_order():
    theta, alpha = 1.1, 1.4
    z = np.exp(1j * theta)
    errs = [abs(specfun.lerch_phi(theta, alpha, n) * n**alpha - 1 / (1 - z)) for n in (10, 100, 1000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_lerch_phi_reports_cap():
    with pytest.raises(ConvergenceError):
        specfun.lerch_phi(1e-6, 1.5, 1)


@pytest.mark.parametrize("alpha", [2.00001, 1.99999, 4.0000001, 2.0 + 1e-9])
def test_polylog_pair_next_to_even_integers(alpha):
    # a term of the small-angle series nearly vanishes here and must not end the sum
    with mpmath.workdps(30):
        ref = float(2 * mpmath.re(mpmath.polylog(mpmath.mpf(alpha), mpmath.expj(1))))
    assert specfun.polylog_pair(alpha, 1.0) == pytest.approx(ref, abs=1e-14)


@pytest.mark.parametrize("x", [2.0 + 1e-9, -2.0 - 1e-12, 4.0 - 1e-10, 7.0, 0.3])
def test_sin_half_pi_keeps_relative_accuracy(x):
    with mpmath.workdps(30):
        ref = float(mpmath.sin(mpmath.pi * mpmath.mpf(x) / 2))
    assert specfun.sin_half_pi(x) == pytest.approx(ref, rel=1e-14)
