"""
test_poly.py — Unit tests for polynomials and permutation oracles
=================================================================
Text format, arithmetic, reduction modulo x^{q^2} - x, function tables,
and the brute-force permutation checks.
"""

import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add parent dir to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from field import build_field
from poly import (
    FuncTable, Poly, PolyFormatError, equal_as_functions, evaluate, evaluate_many,
    format_poly, func_table, is_complete_permutation, is_permutation, parse_poly,
    permutes_set, reduce_mod,
)

F4 = build_field(2)
F9 = build_field(3)
F169 = build_field(13)
coeff_lists = st.lists(st.integers(min_value=0, max_value=8), max_size=6)


def test_text_format():
    P = parse_poly(F169, "28:1, 1:1, 0:[3,1]")
    assert P.degree == 28
    assert P.coeff(0) == F169.from_vector([3, 1])
    assert format_poly(P) == "28:1, 1:1, 0:[3,1]"
    assert parse_poly(F169, "5") == Poly.constant(F169, 5)
    assert parse_poly(F169, "1:xi, 1:xi") == Poly.monomial(F169, 1, F169.add(F169.xi, F169.xi))
    zero = parse_poly(F169, "0:0")
    assert zero.is_zero and zero.degree == -1
    assert format_poly(zero) == "0:0"
    print("✅ polynomial text format: PASS")


def test_text_errors():
    for bad in ("a:1", "2:zz", "2:[1,2", "-1:1"):
        with pytest.raises(PolyFormatError):
            parse_poly(F9, bad)
    print("✅ polynomial text errors: PASS")


def test_from_terms_adds_repeats():
    P = Poly.from_terms(F9, [(2, 1), (2, 1), (0, 2)])
    assert P.coeffs == (2, 0, 2)
    assert Poly.from_terms(F9, {3: 1, 3 - 1: 0}).degree == 3
    print("✅ repeated exponents: PASS")


def test_arithmetic():
    x = Poly.x(F9)
    one = Poly.constant(F9, 1)
    assert (x + 1) * (x - 1) == x * x - one
    assert (x + x + x).is_zero                       # characteristic 3
    assert (x * 0).is_zero
    assert Poly.x(F9).compose_power(Poly.x(F9), 2) == Poly.monomial(F9, 2)
    print("✅ polynomial arithmetic: PASS")


def test_reduction():
    q_sq = F9.q_sq
    assert reduce_mod(Poly.monomial(F9, q_sq)) == Poly.x(F9)
    assert reduce_mod(Poly.monomial(F9, q_sq - 1)) == Poly.monomial(F9, q_sq - 1)
    assert Poly.x(F9).pow_mod(q_sq) == Poly.x(F9)
    P = parse_poly(F9, "40:1, 17:xi, 9:2, 0:1")
    R = reduce_mod(P)
    assert R.degree < q_sq
    assert equal_as_functions(P, R)
    print("✅ reduction mod x^(q^2) - x: PASS")


def test_evaluate_matches_evaluate_many():
    P = parse_poly(F169, "30:xi, 13:2, 1:[0,1], 0:5")
    X = F169.elements()
    many = evaluate_many(P, X)
    assert all(many[x] == evaluate(P, int(x)) for x in range(0, 169, 5))
    assert evaluate(Poly.constant(F169, 4), 0) == 4
    print("✅ evaluation: PASS")


def test_func_table():
    T = FuncTable([3, 1, 2], [30, 10, 20])
    assert T(1) == 10
    assert list(T.lookup([2, 3])) == [20, 30]
    assert list(T.lookup([2, 7], default=-1)) == [20, -1]
    assert T.as_dict() == {3: 30, 1: 10, 2: 20}
    with pytest.raises(KeyError):
        T(7)
    with pytest.raises(ValueError):
        FuncTable([1, 1], [2, 3])
    with pytest.raises(ValueError):
        FuncTable([1, 2], [2])
    print("✅ function tables: PASS")


def test_is_permutation():
    assert is_permutation(func_table(Poly.monomial(F9, 3)))     # gcd(3, 8) = 1
    assert is_permutation(func_table(Poly.monomial(F9, 1, F9.xi)))
    assert not is_permutation(func_table(Poly.monomial(F9, 2)))
    assert not is_permutation(func_table(Poly.constant(F9, 1)))
    assert is_permutation(func_table(parse_poly(F9, "3:1, 0:xi")))
    with pytest.raises(ValueError):
        is_permutation(func_table(Poly.x(F9), domain=[0, 1, 2]))
    print("✅ is_permutation: PASS")


def test_permutes_set():
    assert permutes_set(FuncTable([1, 3, 9], [3, 9, 1]))
    assert not permutes_set(FuncTable([1, 3, 9], [3, 3, 1]))
    assert not permutes_set(FuncTable([1, 3, 9], [3, 9, 2]))
    print("✅ permutes_set: PASS")


def test_complete_permutation():
    assert is_complete_permutation(Poly.monomial(F4, 1, F4.xi))       # xi x and (xi + 1) x
    assert not is_complete_permutation(Poly.x(F4))                     # x + x = 0
    assert not is_complete_permutation(Poly.monomial(F4, 2))
    print("✅ complete permutations: PASS")


@settings(max_examples=150, deadline=None)
@given(coeff_lists, coeff_lists)
def test_product_evaluates_pointwise(left, right):
    P, Q = Poly(F9, tuple(left)), Poly(F9, tuple(right))
    X = F9.elements()
    assert np.array_equal(evaluate_many(P * Q, X), F9.vmul(evaluate_many(P, X), evaluate_many(Q, X)))
    assert np.array_equal(evaluate_many(P + Q, X), F9.vadd(evaluate_many(P, X), evaluate_many(Q, X)))


@settings(max_examples=50, deadline=None)
@given(coeff_lists, st.integers(min_value=0, max_value=200))
def test_pow_mod_evaluates_pointwise(coeffs, e):
    P = Poly(F9, tuple(coeffs))
    X = F9.elements()
    assert np.array_equal(evaluate_many(P.pow_mod(e), X), F9.vpow(evaluate_many(P, X), e))


if __name__ == "__main__":
    print("=" * 50)
    print("Polynomial Unit Tests")
    print("=" * 50 + "\n")

    test_text_format()
    test_text_errors()
    test_from_terms_adds_repeats()
    test_arithmetic()
    test_reduction()
    test_evaluate_matches_evaluate_many()
    test_func_table()
    test_is_permutation()
    test_permutes_set()
    test_complete_permutation()
    test_product_evaluates_pointwise()
    print("✅ products pointwise: PASS")
    test_pow_mod_evaluates_pointwise()
    print("✅ pow_mod pointwise: PASS")

    print("\n" + "=" * 50)
    print("ALL TESTS PASSED ✅")
    print("=" * 50)
