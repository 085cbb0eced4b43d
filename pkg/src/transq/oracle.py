"""Brute-force ground truth on the state lattice.

A state is ``(i, j)``: ``i`` services completed, ``j`` customers arrived,
``0 <= i <= j <= N``.  From ``(i, j)`` with ``i < j`` the embedded chain
moves right to ``(i+1, j)`` with probability ``mu / (mu + lambda_j)`` and
up to ``(i, j+1)`` otherwise; from a diagonal state it moves up with
probability one.

Nothing here touches the analytic formulas or the path weights; the DP
is written directly against that transition law.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from functools import lru_cache

from .distribution import BusyPeriodDistribution, Method
from .errors import CapExceeded, IndexOutOfRange
from .model import Model
from .paths import enumerate_dyck, first_return, path_weight

DEFAULT_CAP = 16
ENUMERATION_CAP = 14


def _service_prob(model: Model, j: int) -> Fraction:
    mu = model.mu
    return mu / (mu + model.lambda_seq[j - 1])


def _sweep(model: Model):
    """Push probability mass from ``(0, 0)`` until every path is absorbed.

    Returns ``(absorbed, entries, trace)``: ``absorbed[k]`` is the mass
    first touching the diagonal at ``(k, k)``; ``entries[n][i]`` the mass
    first entering phase ``n`` at ``(i, n)`` before touching the diagonal;
    ``trace`` the total live mass after each step (for conservation checks).
    """
    N = model.n_customers
    absorbed = defaultdict(Fraction)
    entries = defaultdict(lambda: defaultdict(Fraction))
    frontier = {(0, 1): Fraction(1)}  # (0,0) steps up with certainty
    entries[1][0] = Fraction(1)
    trace = []
    while frontier:
        nxt = defaultdict(Fraction)
        for (i, j), mass in frontier.items():
            p = _service_prob(model, j)
            if p:
                right = (i + 1, j)
                if right[0] == right[1]:
                    absorbed[right[0]] += mass * p
                else:
                    nxt[right] += mass * p
            if p != 1 and j < N:
                entries[j + 1][i] += mass * (1 - p)
                nxt[(i, j + 1)] += mass * (1 - p)
        frontier = dict(nxt)
        trace.append(sum(frontier.values(), Fraction(0)) + sum(absorbed.values(), Fraction(0)))
    return absorbed, entries, trace


@lru_cache(maxsize=64)
def _cached_sweep(model: Model):
    absorbed, entries, trace = _sweep(model)
    return (dict(absorbed), {n: dict(row) for n, row in entries.items()}, tuple(trace))


def busy_dist_bruteforce(model: Model, cap: int = DEFAULT_CAP) -> BusyPeriodDistribution:
    N = model.n_customers
    if N > cap:
        raise CapExceeded(f"N = {N} exceeds oracle cap {cap}")
    absorbed, _, _ = _cached_sweep(model)
    s = tuple(absorbed.get(k, Fraction(0)) for k in range(1, N + 1))
    return BusyPeriodDistribution(s, Method.ORACLE, model.digest)


def busy_dist_enumeration(model: Model, cap: int = ENUMERATION_CAP) -> BusyPeriodDistribution:
    """Sum path weights over all Dyck paths of order ``N``, grouped by first return."""
    N = model.n_customers
    if N > cap:
        raise CapExceeded(f"N = {N} exceeds enumeration cap {cap}")
    s = [Fraction(0)] * N
    for u in enumerate_dyck(N):
        s[first_return(u) - 1] += path_weight(model, u)
    return BusyPeriodDistribution(tuple(s), Method.ENUMERATION, model.digest)


def p_n_i_bruteforce(model: Model, n: int, i: int) -> Fraction:
    """Probability that phase ``n`` is first entered at ``(i, n)`` with the queue never empty."""
    N = model.n_customers
    if not 1 <= n <= N or not 0 <= i <= n:
        raise IndexOutOfRange(f"(n={n}, i={i}) needs 1 <= n <= {N}, 0 <= i <= n")
    _, entries, _ = _cached_sweep(model)
    return entries.get(n, {}).get(i, Fraction(0))


def hitting_table(model: Model) -> list[list[Fraction]]:
    """``table[n-1][i] = p_n(i)`` for ``0 <= i <= n``."""
    N = model.n_customers
    return [[p_n_i_bruteforce(model, n, i) for i in range(n + 1)] for n in range(1, N + 1)]


def conservation_trace(model: Model) -> tuple[Fraction, ...]:
    """Live plus absorbed mass after every step of the sweep; all entries should be 1."""
    return _cached_sweep(model)[2]
