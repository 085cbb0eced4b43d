import random
from fractions import Fraction
from math import comb, isfinite

import pytest
from hypothesis import given, settings

from transq.errors import (
    EmptyAllocation,
    IndexOutOfRange,
    PoleAtArgument,
    RequiresProportionalMode,
    SingularMatrix,
)
from transq.exact import (
    TriangularMatrix,
    a_inverse_explicit,
    b_coefficient,
    b_coefficient_binomial,
    busy_dist_explicit,
    busy_dist_matrix,
    busy_dist_recursion,
    busy_dist_recursion_binomial,
    cancellation_report,
    explicit_terms,
    gf_coefficients,
    gf_evaluate,
    invert_lower_triangular,
    joint_busy_dist,
    matrix_A,
    vector_b,
)
from transq.model import model_from_rate, model_from_sequence
from transq.oracle import busy_dist_bruteforce, hitting_table
from transq.paths import enumerate_feasible

from conftest import models, random_model, random_models

F = Fraction

# Frozen from the lattice DP in oracle.py (independent of the formulas here).
N8_UNIT = (F(1, 8), F(1, 56), F(13, 2016), F(967, 252000), F(2797, 768000),
           F(2660117, 435456000), F(6194269, 248832000), F(5821943, 7168000))


ROUTES = [busy_dist_recursion, busy_dist_matrix, busy_dist_explicit]


@pytest.mark.parametrize("route", ROUTES + [busy_dist_recursion_binomial])
def test_small_cases(route, m2, m3):
    assert route(m2).s == (F(1, 2), F(1, 2))
    assert route(m3).s == (F(1, 3), F(1, 6), F(1, 2))
    assert route(model_from_rate(1, 7, 3)).s == (1,)
    assert route(model_from_rate(8, 1, 1)).s == N8_UNIT


def test_frozen_n8_matches_oracle():
    assert busy_dist_bruteforce(model_from_rate(8, 1, 1)).s == N8_UNIT


def test_binomial_requires_proportional():
    with pytest.raises(RequiresProportionalMode):
        busy_dist_recursion_binomial(model_from_sequence([3, 1, 0], 1))


@pytest.mark.parametrize("n", range(1, 13))
@pytest.mark.parametrize("lam, mu", [(1, 1), (1, 3), ("2/5", "7/3")])
def test_binomial_equals_general(n, lam, mu):
    m = model_from_rate(n, lam, mu)
    assert busy_dist_recursion_binomial(m).s == busy_dist_recursion(m).s


def test_matrix_entries(m3):
    a = matrix_A(m3)
    assert a[2, 2] == 4
    assert a[2, 1] == 4
    assert a[1, 1] == 1 / m3.rhos[0]
    assert a[1, 3] == 0
    for n in range(1, 4):
        assert a[n, n] == 1 / m3.rhos[n - 1] ** n


def test_vector_b(m3):
    assert vector_b(m3) == [1, 2, 1]
    for n in range(1, 9):
        m = model_from_rate(n, "3/2", 5)
        assert vector_b(m) == [comb(n - 1, k - 1) for k in range(1, n + 1)]
    assert vector_b(model_from_sequence(["5/2", 1, "1/3", 0], 2))[0] == 1


def test_invert_identity():
    eye = TriangularMatrix.identity(5)
    assert invert_lower_triangular(eye) == eye


def test_invert_singular():
    with pytest.raises(SingularMatrix):
        invert_lower_triangular(TriangularMatrix([[1], [2, 0]]))


def test_inverse_diagonal(m3):
    inv = invert_lower_triangular(matrix_A(m3))
    assert inv[2, 2] == F(1, 4)
    assert inv.diagonal() == (F(1, 3), F(1, 4), 1)


@pytest.mark.parametrize("n", range(1, 11))
def test_inverse_is_two_sided(n):
    m = random_model(random.Random(n), n)
    a = matrix_A(m)
    inv = invert_lower_triangular(a)
    eye = TriangularMatrix.identity(n)
    assert a @ inv == eye
    assert inv @ a == eye


def test_b_coefficient_examples(m3):
    assert b_coefficient(m3, (0, 2)) == 2
    assert b_coefficient(m3, (1, 1)) == -2
    assert b_coefficient(m3, (1,)) == 1
    for i in range(1, 7):
        m = model_from_rate(6, 1, 1)
        u = (0,) * (i - 1) + (i,)
        assert b_coefficient(m, u) == comb(5, i - 1)


def test_b_coefficient_errors(m3):
    with pytest.raises(EmptyAllocation):
        b_coefficient(m3, ())
    with pytest.raises(EmptyAllocation):
        b_coefficient(m3, (0, 0))
    with pytest.raises(IndexOutOfRange):
        b_coefficient(m3, (1, 1, 1), start=2)


@pytest.mark.parametrize("n", range(1, 11))
def test_b_general_equals_binomial(n):
    m = model_from_rate(10, "2/3", 5)
    for u in enumerate_feasible(n):
        assert b_coefficient(m, u) == b_coefficient_binomial(m, u)
        # as placed inside the inverse-matrix sums
        if n < 10:
            e = (10 - n, *u)
            assert b_coefficient(m, e, 10 - n) == b_coefficient_binomial(m, e, 10 - n)


@given(models(max_n=8))
def test_b_sign_structure(m):
    for n in range(1, m.N + 1):
        for u in enumerate_feasible(n):
            M = sum(1 for x in u if x)
            b = b_coefficient(m, u)
            assert b != 0
            assert (b > 0) == (M % 2 == 1)


def test_explicit_terms_match_b_coefficient():
    for m in random_models(7, 3, seed=11):
        for i in range(1, 8):
            terms = list(explicit_terms(m, i))
            assert [u for u, _ in terms] == list(enumerate_feasible(i))
            for u, t in terms:
                w = F(1)
                for j, x in enumerate(u, start=1):
                    w *= m.rhos[j - 1] ** x
                assert t == b_coefficient(m, u) * w


def test_explicit_hand_terms(m3):
    terms = dict(explicit_terms(m3, 2))
    assert terms == {(0, 2): F(1, 2), (1, 1): F(-1, 3)}


def test_a_inverse_explicit(m3):
    inv = invert_lower_triangular(matrix_A(m3))
    assert a_inverse_explicit(m3, 2, 1) == inv[2, 1]
    for i in range(1, 4):
        assert a_inverse_explicit(m3, i, 0) == m3.rhos[i - 1] ** i
    with pytest.raises(IndexOutOfRange):
        a_inverse_explicit(m3, 2, 2)


@pytest.mark.parametrize("N", range(1, 11))
def test_a_inverse_explicit_full_matrix(N):
    for m in [model_from_rate(N, 1, 1), *random_models(N, 2, seed=5)]:
        inv = invert_lower_triangular(matrix_A(m))
        for i in range(1, N + 1):
            for n in range(0, i):
                assert a_inverse_explicit(m, i, n) == inv[i, i - n]


@settings(max_examples=40, deadline=None)
@given(models(max_n=8))
def test_routes_agree_with_oracle(m):
    ref = busy_dist_bruteforce(m).s
    for route in ROUTES:
        d = route(m)
        assert d.s == ref
        assert d.total == 1
        assert d.s[0] == m.rhos[0]
        assert all(0 <= x <= 1 for x in d.s)


def test_explicit_workers_are_bit_identical():
    m = random_model(random.Random(3), 9)
    assert busy_dist_explicit(m, workers=2).s == busy_dist_explicit(m).s


def test_float_mode_close():
    m = model_from_rate(9, 1, 2)
    exact = busy_dist_recursion(m).s
    for route in ROUTES:
        approx = route(m, mode="float").s
        assert all(isinstance(x, float) for x in approx)
        assert max(abs(a - float(e)) for a, e in zip(approx, exact)) < 1e-9


# generating functions

def test_gf_trivial_phases(m3):
    assert gf_evaluate(m3, 1, F(5, 7)).value == 1
    for z in (F(0), F(1, 2), F(-3, 4), F(2), F(7, 5)):
        assert gf_evaluate(m3, 2, z).value == 1 - m3.rhos[0]


def test_gf_pole(m3):
    with pytest.raises(PoleAtArgument):
        gf_evaluate(m3, 3, 3)  # 1/rho_1


def test_gf_n3_at_one(m3):
    assert m3.rhos[2] ** 3 * gf_evaluate(m3, 3, 1 / m3.rhos[2]).value == F(1, 2)


@pytest.mark.parametrize("N", range(2, 11))
def test_gf_identities(N):
    for m in [model_from_rate(N, 1, 1), *random_models(N, 2, seed=9)]:
        s = busy_dist_recursion(m).s
        table = hitting_table(m)
        for n in range(2, N + 1):
            r = m.rhos[n - 1]
            assert r ** n * gf_evaluate(m, n, 1 / r).value == s[n - 1]
            assert gf_coefficients(m, n) == table[n - 1][: n - 1]


# joint distribution

def test_joint_n2(m2):
    j = joint_busy_dist(m2)
    assert j.probs == {(1, 1): F(1, 2), (2,): F(1, 2)}
    assert j.remainder == 0


@pytest.mark.parametrize("N", range(1, 8))
def test_joint_normalised_and_marginal(N):
    m = random_model(random.Random(40 + N), N)
    j = joint_busy_dist(m)
    assert j.total == 1
    assert len(j.probs) == 2 ** (N - 1)
    assert all(sum(k) == N for k in j.probs)
    s = busy_dist_recursion(m).s
    for i in range(1, N + 1):
        assert sum(p for k, p in j.probs.items() if k[0] == i) == s[i - 1]


def test_joint_truncation():
    m = model_from_rate(5, 1, 1)
    full = joint_busy_dist(m)
    cut = joint_busy_dist(m, max_periods=2)
    assert cut.total == 1
    assert all(len(k) <= 2 for k in cut.probs)
    assert cut.remainder == sum(p for k, p in full.probs.items() if len(k) > 2)


def test_cancellation_report():
    rep = cancellation_report(model_from_rate(12, 1, 1))
    assert rep.n == 12
    assert isfinite(rep.max_abs_deviation)
    assert all(m >= abs(float(e)) for m, e in zip(rep.term_mass, rep.exact))
