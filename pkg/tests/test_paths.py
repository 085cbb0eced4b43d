import itertools
import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from transq.errors import NotFeasible, OrderMismatch
from transq.model import model_from_rate, model_from_sequence
from transq.paths import (
    enumerate_dyck,
    enumerate_feasible,
    excursion_decomposition,
    excursions,
    first_return,
    hits_diagonal_after_jumps,
    is_dyck,
    is_feasible,
    path_weight,
    satisfies_allocation_rules,
)

from conftest import models, random_model


def catalan(n):
    return comb(2 * n, n) // (n + 1)


def brute_dyck(n):
    """Filter the whole box {0..n}^n; independent of the successor walk."""
    out = []
    for u in itertools.product(range(n + 1), repeat=n):
        sums = list(itertools.accumulate(u))
        if sums[-1] == n and all(sums[k - 1] <= k for k in range(1, n)):
            out.append(u)
    return out


def chain_probability(model, u):
    """Walk the lattice following ``u`` and multiply transition probabilities."""
    N = model.N
    i = j = 0
    prob = Fraction(1)
    moves = []
    for phase in range(1, N + 1):
        moves.append("up")
        moves += ["right"] * u[phase - 1]
    for move in moves:
        if move == "up":
            if i < j:
                prob *= 1 - model.mu / (model.mu + model.lambda_seq[j - 1])
            j += 1
        else:
            assert i < j
            prob *= model.mu / (model.mu + model.lambda_seq[j - 1])
            i += 1
    assert (i, j) == (N, N)
    return prob


def test_enumerate_dyck_small():
    assert list(enumerate_dyck(1)) == [(1,)]
    assert list(enumerate_dyck(0)) == [()]
    assert len(list(enumerate_dyck(3))) == 5
    four = list(enumerate_dyck(4))
    assert len(four) == 14
    assert (1, 1, 0, 2) in four and (1, 0, 1, 2) in four


@pytest.mark.parametrize("n", range(1, 7))
def test_enumerate_dyck_matches_brute_force_in_lex_order(n):
    assert list(enumerate_dyck(n)) == brute_dyck(n)


@pytest.mark.parametrize("n", range(0, 15))
def test_dyck_counts_are_catalan(n):
    assert sum(1 for _ in enumerate_dyck(n)) == catalan(n)


@pytest.mark.parametrize("u, expected", [
    ((1, 1, 0, 2), True), ((0, 0, 3, 1), True), ((0, 2, 0, 2), True), ((0, 0, 0, 4), True),
    ((1, 0, 1, 2), False), ((1, 0, 0, 2), False), ((0, 0, 2, 2), False),
])
def test_is_feasible_examples(u, expected):
    assert is_feasible(u) is expected
    assert satisfies_allocation_rules(u) is expected


@pytest.mark.parametrize("n", range(1, 13))
def test_feasibility_definitions_agree_on_all_dyck_paths(n):
    for u in enumerate_dyck(n):
        assert satisfies_allocation_rules(u) == hits_diagonal_after_jumps(u), u


@given(st.lists(st.integers(0, 6), min_size=1, max_size=8))
def test_feasibility_definitions_agree_on_arbitrary_vectors(u):
    assert satisfies_allocation_rules(u) == hits_diagonal_after_jumps(u)


def test_empty_path_is_not_feasible():
    assert not is_feasible(())
    assert list(enumerate_feasible(0)) == []


def test_enumerate_feasible_examples():
    assert list(enumerate_feasible(1)) == [(1,)]
    four = list(enumerate_feasible(4))
    assert len(four) == 8
    for u in [(1, 1, 0, 2), (0, 0, 3, 1), (0, 2, 0, 2), (0, 0, 0, 4)]:
        assert u in four
    assert four == sorted(four)
    assert len(list(enumerate_feasible(10))) == 512


@pytest.mark.parametrize("n", range(1, 21))
def test_feasible_count(n):
    seen = set(enumerate_feasible(n))
    assert len(seen) == 2 ** (n - 1)


@pytest.mark.parametrize("n", range(1, 11))
def test_feasible_subset_of_dyck_and_complete(n):
    feas = set(enumerate_feasible(n))
    assert feas == {u for u in enumerate_dyck(n) if is_feasible(u)}
    assert all(u[-1] != 0 for u in feas)


def test_path_weight_n2(m2):
    # rho = (1/2, 1): a right-jump in the last phase is certain
    assert path_weight(m2, (1, 1)) == Fraction(1, 2)
    assert path_weight(m2, (0, 2)) == Fraction(1, 2)


def test_path_weight_order_mismatch(m3):
    with pytest.raises(OrderMismatch):
        path_weight(m3, (1, 1))
    with pytest.raises(ValueError):
        path_weight(m3, (2, 0, 1))


@pytest.mark.parametrize("n", range(1, 7))
def test_path_weight_matches_chain_walk(n):
    m = random_model(random.Random(n), n)
    for u in enumerate_dyck(n):
        assert path_weight(m, u) == chain_probability(m, u)


@pytest.mark.parametrize("n", range(1, 13))
def test_path_weight_normalised(n):
    m = model_from_rate(n, 1, 2) if n > 10 else random_model(random.Random(100 + n), n)
    assert sum(path_weight(m, u) for u in enumerate_dyck(n)) == 1


@given(models(max_n=7))
def test_feasible_weight_factorises(m):
    n = m.N
    for u in enumerate_feasible(n):
        jumps = [j for j in range(1, n + 1) if u[j - 1]]
        idle = [k for k in range(1, n + 1) if not u[k - 1]]
        expected = Fraction(1)
        for j in jumps:
            expected *= m.rhos[j - 1] ** u[j - 1]
        for k in idle:
            expected *= 1 - m.rhos[k - 1]
        assert path_weight(m, u) == expected


@pytest.mark.parametrize("u, k", [((1, 1, 0, 2), 1), ((0, 2, 0, 2), 2), ((0, 0, 0, 4), 4), ((1,), 1)])
def test_first_return(u, k):
    assert first_return(u) == k


def test_excursions():
    assert excursions((1, 1, 0, 2)) == (1, 1, 2)
    assert excursions((0, 0, 0, 4)) == (4,)
    for u in enumerate_dyck(6):
        parts = excursions(u)
        assert sum(parts) == 6 and parts[0] == first_return(u)


@pytest.mark.parametrize("u, M, ks", [
    ((1, 1, 0, 2), 3, (1, 1, 2, 4, 4)),
    ((0, 0, 0, 4), 1, (1, 4, 4)),
    ((1,), 1, (1, 1, 1)),
])
def test_excursion_decomposition(u, M, ks):
    assert excursion_decomposition(u) == (M, ks)


def test_excursion_decomposition_rejects_infeasible():
    with pytest.raises(NotFeasible):
        excursion_decomposition((1, 0, 1, 2))


def test_is_dyck():
    assert is_dyck((0, 2, 1))
    assert not is_dyck((2, 0, 1))
    assert not is_dyck((0, 1, 1))
    assert not is_dyck((1, -1, 3))
