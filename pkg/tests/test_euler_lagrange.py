import math

import mpmath
import numpy as np
import pytest

from saddle_strichartz.errors import DegenerateChangeError, DomainError
from saddle_strichartz.euler_lagrange import (A_of_s, B_of_s, _lhs_integrand, criticality_residual,
                                              diagonal_moment, diagonal_moments, el_lhs_constant,
                                              el_lhs_normalized, el_weight, first_variation,
                                              gamma_inverse, moment, moments, phi_inverse,
                                              project_orthogonal)
from saddle_strichartz.exponents import Signature, critical_exponent, kappa, strichartz_q
from saddle_strichartz.grid import GridFunction
from saddle_strichartz.quadrature import integrate_line

SADDLE = Signature(1, 1)
MIXED = Signature(2, 1)
SAMPLES = [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_el_weight_even_in_each_coordinate():
    a, b = 0.7, -0.4
    assert el_weight([a, b], 2.0, SADDLE) == pytest.approx(el_weight([-a, b], 2.0, SADDLE), abs=1e-11)


def test_el_weight_origin_real_positive():
    w = el_weight([0.0, 0.0], 2.0, SADDLE)
    assert w.real > 0 and abs(w.imag) < 1e-12 * w.real


@pytest.mark.parametrize("sig, p", [(SADDLE, 2.0), (MIXED, 2.2)])
def test_el_weight_matches_normalized_lhs(sig, p):
    rng = np.random.default_rng(17)
    q = strichartz_q(p, sig.d)
    for xi in rng.uniform(-1.2, 1.2, (10, sig.d)):
        r_plus = float(np.sum(xi[:sig.d_plus] ** 2))
        r_minus = float(np.sum(xi[sig.d_plus:] ** 2))
        lhs = el_lhs_normalized(r_plus, r_minus, p, sig)
        scaled = el_lhs_constant(p, sig) * math.exp(-0.5 * math.pi * (p - 1) * xi @ xi) * lhs
        w = el_weight(xi, p, sig)
        assert abs(w - scaled) <= 1e-8 * abs(w)


def test_lhs_origin_finite_nonzero():
    val = el_lhs_normalized(0, 0, 2.0, MIXED)
    assert np.isfinite(val) and abs(val) > 0


def test_lhs_real_on_balanced_diagonal():
    val, err = el_lhs_normalized(0.8, 0.8, 2.0, SADDLE, return_error=True)
    assert abs(val.imag) <= 10 * err + 1e-15


def test_lhs_swap_symmetry():
    a = el_lhs_normalized(0.3, 1.1, 2.1, Signature(2, 1))
    b = el_lhs_normalized(1.1, 0.3, 2.1, Signature(1, 2))
    assert b == pytest.approx(np.conj(a), abs=1e-11)


def test_lhs_rejects_negative_radius():
    with pytest.raises(DomainError):
        el_lhs_normalized(-1, 0, 2.0, SADDLE)


def test_lambda_stable_under_tighter_tolerance():
    a = el_lhs_normalized(0, 0, 2.0, SADDLE)
    b = el_lhs_normalized(0, 0, 2.0, SADDLE, tol=(1e-14, 1e-13))
    assert a.real > 0 and abs(a - b) < 1e-8


@pytest.mark.parametrize("sig", [SADDLE, MIXED])
def test_residual_witness(sig):
    rep = criticality_residual(2.0, sig, SAMPLES)
    assert rep.residual > 10 * rep.combined_error
    assert rep.witnessed and rep.witness_k is not None


def test_residual_single_point_is_zero():
    rep = criticality_residual(2.0, SADDLE, [(0, 0)])
    assert rep.residual == 0.0
    assert not rep.witnessed


def test_A_even_and_positive_for_balanced():
    s = np.random.default_rng(1).uniform(-20, 20, 50)
    for sig in (SADDLE, MIXED):
        assert np.allclose(A_of_s(s, 2.0, sig), A_of_s(-s, 2.0, sig), rtol=1e-14, atol=0)
    q = 4.0
    expected = (1 + 4 * s * s) ** -1 * np.abs((1 + 2j * s) / (q - 1 + 2j * s))
    assert np.allclose(A_of_s(s, 2.0, SADDLE), expected, rtol=1e-13)
    assert np.all(A_of_s(s, 2.0, SADDLE) > 0)


def test_A_nonvanishing_tail():
    # (2s)^{d(q-2)/2} A(s) approaches a nonzero constant
    p, sig = 2.0, MIXED
    q = strichartz_q(p, 3)
    vals = [(2 * s) ** (3 * (q - 2) / 2) * A_of_s(s, p, sig) for s in (1e4, 1e5, 1e6)]
    assert abs(vals[-1]) > 0.1
    assert abs(vals[-1] - vals[-2]) < 1e-3 * abs(vals[-1])


def test_B_relations():
    p, sig = 2.0, MIXED
    d, q = 3, strichartz_q(2.0, 3)
    assert B_of_s(0.0, p, sig) == pytest.approx((p / d) ** 2 / (q - 1) ** 2 * A_of_s(0.0, p, sig), rel=1e-14)
    s = np.linspace(-30, 30, 301)
    assert np.all(np.sign(B_of_s(s, p, sig)) == np.sign(A_of_s(s, p, sig)))
    assert np.all(B_of_s(s, 2.0, SADDLE) > 0)


def test_moment_near_upper_endpoint():
    # p = 2.9, d = 2: the integrand decays only like |s|^(-1.05); the oracle is
    # mpmath on [0, 1e8] plus the leading-order power tail
    mpmath.mp.dps = 30
    p = mpmath.mpf("2.9")
    q = 2 * p / (p - 1)
    alpha = q - 2
    f = lambda s: (((p / 2) ** 2 + s * s * (q - p) ** 2) / ((q - 1) ** 2 + 4 * s * s)
                   * (1 + 4 * s * s) ** (-alpha / 2) * abs((1 + 2j * s) / (q - 1 + 2j * s)))
    S = mpmath.mpf(10) ** 8
    exact = 2 * (mpmath.quad(f, [0] + [mpmath.mpf(10) ** k for k in range(9)]) + f(S) * S / (alpha - 1))
    rep = moment(1, 2.9, SADDLE)
    assert abs(rep.value - float(exact)) < 1e-9


def test_moment_one_against_mpmath():
    mpmath.mp.dps = 30
    exact = mpmath.quad(lambda s: mpmath.sqrt(1 + 4 * s * s) / (9 + 4 * s * s) ** 1.5, [-mpmath.inf, 0, mpmath.inf])
    rep = moment(1, 2.0, SADDLE)
    assert abs(rep.value - float(exact)) < 1e-12
    assert rep.nonzero_at_tolerance


@pytest.mark.parametrize("p", [1.5, 2.0, 2.4, 2.9])
def test_moment_positivity_balanced(p):
    for rep in moments(6, p, SADDLE):
        assert rep.value.real > 0
        assert abs(rep.value.imag) <= 10 * rep.abs_error + 1e-15


def test_mixed_sweep_has_nonzero():
    assert any(r.nonzero_at_tolerance for r in moments(5, 2.0, MIXED))


def test_moments_conjugate_under_sign_flip():
    a = moments(4, 2.1, Signature(2, 1))
    b = moments(4, 2.1, Signature(1, 2))
    for ra, rb in zip(a, b):
        assert rb.value == pytest.approx(np.conj(ra.value), abs=1e-12)


def _lhs_raw(r_plus, r_minus, p, sig):
    q = strichartz_q(p, sig.d)
    res = integrate_line(_lhs_integrand(q, p, sig, r_plus, r_minus), tol=(1e-14, 1e-13))
    return np.atleast_1d(res.value)


@pytest.mark.parametrize("sig, p", [(SADDLE, 2.0), (MIXED, 2.2)])
def test_mixed_derivative_equals_moment(sig, p):
    # d^2/(dr+ dr-) of the normalized LHS at the origin is pi^2 M_1
    def central(h):
        vals = _lhs_raw([h, h, -h, -h], [h, -h, h, -h], p, sig)
        return (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h * h)

    h = 0.02
    estimate = (4 * central(h / 2) - central(h)) / 3
    m1 = moment(1, p, sig).value
    assert abs(estimate - math.pi**2 * m1) <= 1e-6 * abs(math.pi**2 * m1)


@pytest.mark.parametrize("d, sig", [(2, SADDLE), (3, MIXED)])
def test_diagonal_derivative_equals_diagonal_moment(d, sig):
    # at p = p_d: d/dr of the LHS along r+ = r- = r is -pi (q - p) times the first diagonal moment
    p = critical_exponent(d)
    q = strichartz_q(p, d)

    def central(h):
        vals = _lhs_raw([h, -h], [h, -h], p, sig)
        return (vals[0] - vals[1]) / (2 * h)

    h = 0.02
    estimate = (4 * central(h / 2) - central(h)) / 3
    target = -math.pi * (q - p) * diagonal_moment(1, d, sig).value
    assert abs(estimate - target) <= 1e-6 * abs(target)


def test_phi_inverse_endpoints_and_monotonicity():
    d, p = 2, 2.0
    q = strichartz_q(p, d)
    assert phi_inverse(0.0, p, d) == pytest.approx((p / d) ** 2 / (q - 1) ** 2, rel=1e-15)
    assert phi_inverse(1e8, p, d) == pytest.approx((q - p) ** 2 / 4, rel=1e-12)
    s = np.logspace(-3, 3, 200)
    assert np.all(np.diff(phi_inverse(s, 2.0, 2)) > 0)  # p < p_2
    assert np.all(np.diff(phi_inverse(s, 2.8, 2)) < 0)  # p > p_2


def test_phi_inverse_degenerate_at_critical():
    with pytest.raises(DegenerateChangeError):
        phi_inverse(1.0, critical_exponent(3), 3)


def test_gamma_inverse():
    kap = kappa(2)
    assert gamma_inverse(kap, kap) == 0.0
    assert gamma_inverse(1e-12, kap) == pytest.approx(-1.0, abs=1e-20)
    assert gamma_inverse(1e12, kap) == pytest.approx(1.0, abs=1e-20)
    s = np.logspace(-4, 4, 400)
    vals = gamma_inverse(s, kap)
    assert np.all(np.diff(vals) > 0) and np.all(np.abs(vals) < 1)
    with pytest.raises(DomainError):
        gamma_inverse(1.0, 0.0)


def test_diagonal_moments_balanced_real_and_nonzero():
    reps = diagonal_moments(10, 2, SADDLE)
    assert all(abs(r.value.imag) <= 10 * r.abs_error + 1e-15 for r in reps)
    assert any(r.nonzero_at_tolerance for r in reps)


def test_diagonal_moment_d3_exact_kappa():
    # p_3 = 9/4, q_3 = 3, kappa_3 = 1
    def integrand(s):
        master = (1 + 4 * s * s) ** -0.75 * ((1 + 2j * s) / (2 + 2j * s)) * np.sqrt((1 - 2j * s) / (2 - 2j * s))
        return ((s * s - 1) / (s * s + 1)) ** 2 * master

    exact = integrate_line(integrand).value
    assert diagonal_moment(2, 3, MIXED).value == pytest.approx(exact, abs=1e-9)


def test_diagonal_moment_signature_mismatch():
    with pytest.raises(DomainError):
        diagonal_moment(1, 3, SADDLE)


def _grid(fn, n=48, box=6.0):
    return GridFunction.symmetric(fn, box, n)


def test_projection_annihilates_gaussian_power():
    p = 2.0
    phi = _grid(lambda a, b: np.exp(-0.5 * math.pi * (p - 1) * (a * a + b * b)))
    assert np.max(np.abs(project_orthogonal(phi, p).samples)) < 1e-14


def test_projection_keeps_odd_and_is_idempotent():
    odd = _grid(lambda a, b: a * np.exp(-a * a - b * b))
    assert np.allclose(project_orthogonal(odd, 2.0).samples, odd.samples, atol=1e-15)
    phi = _grid(lambda a, b: (1 + a * a) * np.exp(-a * a - 2 * b * b))
    once = project_orthogonal(phi, 2.3)
    twice = project_orthogonal(once, 2.3)
    assert np.max(np.abs(twice.samples - once.samples)) < 1e-12
    from saddle_strichartz.quadrature import integrate_grid
    w = np.exp(-0.5 * math.pi * 1.3 * sum(c * c for c in once.mesh()))
    assert abs(integrate_grid(once.with_samples(once.samples * w))) < 1e-12


def test_first_variation_zero_and_nonzero():
    zero = _grid(lambda a, b: 0 * a, n=24)
    assert first_variation(zero, 2.0, SADDLE) == 0.0
    bump = project_orthogonal(_grid(lambda a, b: (a * a + b * b) ** 2 * np.exp(-0.5 * math.pi * (a * a + b * b)),
                                    n=64), 2.0)
    val, err = first_variation(bump, 2.0, SADDLE, return_error=True)
    assert abs(val) > 10 * err
