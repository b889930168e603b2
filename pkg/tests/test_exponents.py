import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saddle_strichartz.errors import DomainError, ParaboloidSignatureError
from saddle_strichartz.exponents import (ExponentTriple, Signature, admissible_range, critical_exponent,
                                         critical_exponent_bisection, dual_exponent, eval_Q, kappa,
                                         strichartz_q)


def test_signature_fields_and_signs():
    sig = Signature(2, 1)
    assert sig.d == 3
    assert list(sig.signs) == [1, 1, -1]
    assert sig.flipped() == Signature(1, 2)


def test_paraboloid_rejected():
    with pytest.raises(ParaboloidSignatureError):
        Signature(2, 0)
    with pytest.raises(ParaboloidSignatureError):
        Signature.from_signs([-1, -1])


@given(st.lists(st.sampled_from([1, -1]), min_size=2, max_size=8))
def test_from_signs_is_permutation_invariant(signs):
    if len(set(signs)) < 2:
        return
    sig = Signature.from_signs(signs)
    assert sig == Signature.from_signs(sorted(signs))
    assert sig == Signature.from_signs(list(sig.signs))


@pytest.mark.parametrize("p, expected", [(2, 2), (4, 4 / 3), (9 / 4, 9 / 5)])
def test_dual_exponent(p, expected):
    assert dual_exponent(p) == pytest.approx(expected, rel=1e-15)


def test_dual_exponent_domain():
    with pytest.raises(DomainError):
        dual_exponent(1.0)


@pytest.mark.parametrize("p, d, expected", [(2, 2, 4), (2, 1, 6), (9 / 4, 3, 3)])
def test_strichartz_q(p, d, expected):
    assert strichartz_q(p, d) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("d, upper", [(2, 3.0), (3, 8 / 3), (4, 2.5)])
def test_admissible_range(d, upper):
    lo, hi = admissible_range(d)
    assert lo == 1.0 and hi == pytest.approx(upper, rel=1e-15)


def test_critical_exponent_values():
    assert abs(critical_exponent(3) - 2.25) < 1e-12
    assert abs(critical_exponent(2) - (1 + math.sqrt(2))) < 1e-12
    lo, hi = admissible_range(2)
    assert lo < critical_exponent(2) < hi
    with pytest.raises(DomainError):
        critical_exponent(1)


@pytest.mark.parametrize("d", range(2, 11))
def test_closed_form_matches_bisection(d):
    assert abs(critical_exponent(d) - critical_exponent_bisection(d)) < 1e-12


@pytest.mark.parametrize("d", range(2, 11))
def test_kappa_two_definitions(d):
    p = critical_exponent(d)
    q = strichartz_q(p, d)
    assert abs(kappa(d) - (p / d) / (q - p)) < 1e-12
    assert abs(kappa(d) - (q - 1) / 2) < 1e-12


def test_kappa_values():
    assert abs(kappa(3) - 1.0) < 1e-12
    assert abs(kappa(2) - (1 + math.sqrt(2)) / 2) < 1e-12


@settings(max_examples=200)
@given(st.integers(2, 12), st.floats(0.001, 0.999))
def test_scaling_line_invariants(d, frac):
    lo, hi = admissible_range(d)
    p = lo + frac * (hi - lo)
    q = strichartz_q(p, d)
    assert q > 2 * (d + 1) / d > p
    assert abs(1 - (p - 1) * (q - 1) + 2 * p / d) < 1e-12 * max(1.0, q)
    t = ExponentTriple.from_p(p, d)
    assert abs(t.p_prime - p / (p - 1)) <= 1e-12 * t.p_prime
    assert abs(t.q - (d + 2) * t.p_prime / d) <= 1e-12 * t.q


def test_triple_kappa_only_at_critical():
    assert ExponentTriple.from_p(2.0, 3).kappa is None
    assert ExponentTriple.from_p(2.25, 3).kappa == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        ExponentTriple.from_p(3.0, 2)


@pytest.mark.parametrize("sig, xi, expected", [
    (Signature(1, 1), (1, 1), 0.0),
    (Signature(1, 1), (2, 1), 3.0),
    (Signature(2, 1), (1, 1, 1), 1.0),
])
def test_eval_Q(sig, xi, expected):
    assert eval_Q(sig, np.array(xi, dtype=float)) == expected


def test_eval_Q_length_mismatch():
    with pytest.raises(DomainError):
        eval_Q(Signature(1, 1), np.zeros(3))
