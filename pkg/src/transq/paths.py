"""Dyck paths and feasible allocations.

A path of order ``n`` is stored as the tuple ``(u_1, ..., u_n)`` of
right-jumps (completed services) made while in phase ``j``.  Valid paths
satisfy ``u_1 + ... + u_k <= k`` for ``k < n`` and sum to ``n``.

A feasible allocation is a path that lands exactly on the diagonal at the
end of every run of right-jumps.  There are ``2**(n-1)`` of them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import accumulate
from typing import Iterator, Sequence

from .errors import NotFeasible, OrderMismatch
from .model import Model

DyckPath = tuple  # tuple[int, ...]


def is_dyck(u: Sequence[int]) -> bool:
    n = len(u)
    total = 0
    for k, x in enumerate(u, start=1):
        if x < 0:
            return False
        total += x
        if k < n and total > k:
            return False
    return total == n


def check_dyck(u: Sequence[int]) -> tuple[int, ...]:
    u = tuple(int(x) for x in u)
    if not is_dyck(u):
        raise ValueError(f"{u} is not a Dyck path")
    return u


def enumerate_dyck(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every Dyck path of order ``n`` in lexicographic order.

    Iterative successor walk, so memory stays O(n) however many paths
    there are.
    """
    if n < 0:
        raise ValueError("order must be nonnegative")
    if n == 0:
        yield ()
        return
    u = [0] * (n - 1) + [n]
    prefix = [0] * n  # prefix[k-1] = u_1 + ... + u_k
    while True:
        yield tuple(u)
        # rightmost k < n whose entry can still grow
        k = n - 1
        while k >= 1 and prefix[k - 1] >= k:
            k -= 1
        if k == 0:
            return
        u[k - 1] += 1
        prefix[k - 1] += 1
        base = prefix[k - 1]
        for j in range(k, n - 1):
            u[j] = 0
            prefix[j] = base
        u[n - 1] = n - base
        prefix[n - 1] = n


def hits_diagonal_after_jumps(u: Sequence[int]) -> bool:
    """Prefix-sum test: every nonzero ``u_j`` brings the total to exactly ``j``."""
    if not u or sum(u) != len(u) or any(x < 0 for x in u):
        return False
    total = 0
    for j, x in enumerate(u, start=1):
        total += x
        if x and total != j:
            return False
    return True


def satisfies_allocation_rules(u: Sequence[int]) -> bool:
    """The recursive construction rule for feasible allocations.

    ``u_1`` is 0 or 1; after a nonzero entry the next is 0 or 1; after
    ``k - 1`` consecutive zeros the next entry is 0 or ``k``; and the
    entries add up to ``n``.
    """
    if not u:
        return False
    last_nonzero = 0
    for i, x in enumerate(u, start=1):
        if x not in (0, i - last_nonzero):
            return False
        if x:
            last_nonzero = i
    return sum(u) == len(u)


def is_feasible(u: Sequence[int]) -> bool:
    return hits_diagonal_after_jumps(u)


def _feasible_tails(start: int, n: int) -> Iterator[tuple[int, ...]]:
    # Larger next hit first gives lexicographic order.
    for hit in range(n, start, -1):
        head = (0,) * (hit - start - 1) + (hit - start,)
        if hit == n:
            yield head
        else:
            for tail in _feasible_tails(hit, n):
                yield head + tail


def enumerate_feasible(n: int) -> Iterator[tuple[int, ...]]:
    """Yield the ``2**(n-1)`` feasible allocations of order ``n``, lexicographically."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    if n == 0:
        return
    yield from _feasible_tails(0, n)


def path_weight(model: Model, u: Sequence[int], mode: str = "exact"):
    """Probability of the trajectory ``u`` under the embedded chain."""
    u = check_dyck(u)
    if len(u) != model.n_customers:
        raise OrderMismatch(f"path of order {len(u)} for model with N = {model.n_customers}")
    _, rhos = model.rates(mode)
    w = Fraction(1) if mode == "exact" else 1.0
    total = 0
    for j, (x, r) in enumerate(zip(u, rhos), start=1):
        total += x
        if x:
            w *= r ** x
        if total < j:
            w *= 1 - r
    return w


def first_return(u: Sequence[int]) -> int:
    """Smallest ``k >= 1`` with ``u_1 + ... + u_k == k``."""
    for k, total in enumerate(accumulate(u), start=1):
        if total == k:
            return k
    raise ValueError(f"{tuple(u)} never returns to the diagonal")


def diagonal_hits(u: Sequence[int]) -> list[int]:
    return [k for k, total in enumerate(accumulate(u), start=1) if total == k]


def excursions(u: Sequence[int]) -> tuple[int, ...]:
    """Sizes of successive busy periods, i.e. gaps between diagonal hits."""
    hits = diagonal_hits(u)
    return tuple(b - a for a, b in zip([0] + hits, hits))


def run_indices(exponents: Sequence[int], start: int = 1) -> tuple[int, tuple[int, ...]]:
    """``(M, (k_0, k_1, ..., k_M, k_{M+1}))`` for an exponent vector.

    Entries are indexed ``start, start+1, ...``.  ``k_1..k_M`` are the
    indices of nonzero exponents; ``k_0`` and ``k_{M+1}`` are the first and
    last index of the vector.
    """
    if not exponents:
        return 0, ()
    last = start + len(exponents) - 1
    marked = [start + p for p, x in enumerate(exponents) if x != 0]
    return len(marked), (start, *marked, last)


def excursion_decomposition(u: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    if not is_feasible(u):
        raise NotFeasible(f"{tuple(u)} is not a feasible allocation")
    return run_indices(u, 1)
