"""Analytic routes to the busy-period distribution.

Three independent algebraic routes produce ``(s_1, ..., s_N)``:

* a forward recursion in ``n`` (general rates, plus a binomial variant for
  ``lambda_j = lambda (N - j)``),
* the lower-triangular system ``A s = b`` solved by explicit inversion,
* a signed sum over feasible allocations.

Every function takes ``mode="exact"`` (Fractions, the default) or
``mode="float"``; float mode only exists to measure round-off and is never
used to decide correctness.

Throughout, ``ratio(a, c)`` denotes
``prod_{k=a}^{c-1} lambda_k / (lambda_k - lambda_c)``, which is also
``prod_k G_{rho_k}(1/rho_c)`` for the geometric pgf ``G_p``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence

from .distribution import BusyPeriodDistribution, Method
from .errors import (
    DegenerateRates,
    EmptyAllocation,
    IndexOutOfRange,
    PhaseOutOfRange,
    PoleAtArgument,
    RequiresProportionalMode,
    SingularMatrix,
)
from .model import Model
from .paths import enumerate_feasible, run_indices


def _one(mode: str):
    return Fraction(1) if mode == "exact" else 1.0


def _zero(mode: str):
    return Fraction(0) if mode == "exact" else 0.0


def ratio(lams: Sequence, a: int, c: int):
    """``prod_{k=a}^{c-1} lambda_k / (lambda_k - lambda_c)`` with 1-based phases."""
    lc = lams[c - 1]
    out = 1
    for k in range(a, c):
        lk = lams[k - 1]
        if lk == lc:
            raise DegenerateRates(f"lambda_{k} == lambda_{c} = {lc}")
        out = out * lk / (lk - lc)
    return out


def _ratio_table(lams: Sequence) -> list[list]:
    """``table[a][c] = ratio(a, c)`` for ``1 <= a <= c <= N``, built by extending ``a`` downward."""
    n = len(lams)
    table = [[None] * (n + 1) for _ in range(n + 1)]
    for c in range(1, n + 1):
        lc = lams[c - 1]
        acc = 1.0 if isinstance(lc, float) else Fraction(1)
        table[c][c] = acc
        for a in range(c - 1, 0, -1):
            la = lams[a - 1]
            if la == lc:
                raise DegenerateRates(f"lambda_{a} == lambda_{c} = {lc}")
            acc = acc * la / (la - lc)
            table[a][c] = acc
    return table


def _dist(model: Model, s, method: Method, mode: str) -> BusyPeriodDistribution:
    return BusyPeriodDistribution(tuple(s), method, model.digest, mode)


# -- recursion ---------------------------------------------------------------

def busy_dist_recursion(model: Model, mode: str = "exact") -> BusyPeriodDistribution:
    """``s_1 = rho_1`` and, for ``n >= 2``,
    ``s_n = rho_n^n ratio(1, n) - sum_{i<n} s_i rho_n^(n-i) ratio(i, n)``.
    """
    lams, rhos = model.rates(mode)
    s = []
    for n in range(1, model.n_customers + 1):
        rn = rhos[n - 1]
        val = rn ** n * ratio(lams, 1, n)
        for i in range(1, n):
            val -= s[i - 1] * rn ** (n - i) * ratio(lams, i, n)
        s.append(val)
    return _dist(model, s, Method.RECURSION, mode)


def busy_dist_recursion_binomial(model: Model, mode: str = "exact") -> BusyPeriodDistribution:
    """Same recursion with ``ratio(i, n) = C(N - i, n - i)``.

    Only valid when the rates are proportional to ``N - j``.
    """
    if model.proportional_rate is None:
        raise RequiresProportionalMode("binomial recursion needs lambda_j = lambda * (N - j)")
    N = model.n_customers
    _, rhos = model.rates(mode)
    s = []
    for n in range(1, N + 1):
        rn = rhos[n - 1]
        val = rn ** n * comb(N - 1, n - 1)
        for i in range(1, n):
            val -= s[i - 1] * rn ** (n - i) * comb(N - i, n - i)
        s.append(val)
    return _dist(model, s, Method.RECURSION_BINOMIAL, mode)


# -- linear system -----------------------------------------------------------

class TriangularMatrix:
    """Dense lower-triangular matrix with 1-based ``(row, col)`` access.

    Row ``i`` stores columns ``1..i``; entries above the diagonal read as zero.
    """

    def __init__(self, rows: Sequence[Sequence]):
        rows = [tuple(r) for r in rows]
        for i, r in enumerate(rows, start=1):
            if len(r) != i:
                raise ValueError(f"row {i} has {len(r)} entries, expected {i}")
        self._rows = tuple(rows)

    @classmethod
    def identity(cls, n: int, mode: str = "exact") -> "TriangularMatrix":
        one, zero = _one(mode), _zero(mode)
        return cls([[one if j == i else zero for j in range(1, i + 1)] for i in range(1, n + 1)])

    @property
    def dim(self) -> int:
        return len(self._rows)

    def __getitem__(self, idx):
        i, j = idx
        if not (1 <= i <= self.dim and 1 <= j <= self.dim):
            raise IndexOutOfRange(f"({i}, {j}) outside a {self.dim}x{self.dim} matrix")
        if j > i:
            return 0 * self._rows[0][0]
        return self._rows[i - 1][j - 1]

    def rows(self) -> tuple[tuple, ...]:
        return self._rows

    def dense(self) -> list[list]:
        n = self.dim
        return [[self[i, j] for j in range(1, n + 1)] for i in range(1, n + 1)]

    def diagonal(self) -> tuple:
        return tuple(r[-1] for r in self._rows)

    def __matmul__(self, other: "TriangularMatrix") -> "TriangularMatrix":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        n = self.dim
        out = []
        for i in range(1, n + 1):
            row = []
            for j in range(1, i + 1):
                acc = 0 * self._rows[0][0]
                for k in range(j, i + 1):
                    acc += self[i, k] * other[k, j]
                row.append(acc)
            out.append(row)
        return TriangularMatrix(out)

    def apply(self, vec: Sequence) -> list:
        return [sum((self._rows[i][j] * vec[j] for j in range(i + 1)), 0 * vec[0])
                for i in range(self.dim)]

    def __eq__(self, other):
        return isinstance(other, TriangularMatrix) and self._rows == other._rows

    def __repr__(self):
        return f"TriangularMatrix({[list(r) for r in self._rows]!r})"


def matrix_A(model: Model, mode: str = "exact") -> TriangularMatrix:
    """``A[n, i] = ratio(i, n) / rho_n^i`` for ``1 <= i <= n <= N``."""
    lams, rhos = model.rates(mode)
    table = _ratio_table(lams)
    N = model.n_customers
    return TriangularMatrix([[table[i][n] / rhos[n - 1] ** i for i in range(1, n + 1)]
                             for n in range(1, N + 1)])


def vector_b(model: Model, mode: str = "exact") -> list:
    """``b_n = ratio(1, n)``; ``b_1 = 1``."""
    lams, _ = model.rates(mode)
    table = _ratio_table(lams)
    return [table[1][n] for n in range(1, model.n_customers + 1)]


def invert_lower_triangular(a: TriangularMatrix) -> TriangularMatrix:
    """Exact inverse, filled one subdiagonal at a time.

    The diagonal first, then every ``(n, n-1)``, then ``(n, n-2)`` and so on
    down to ``(N, 1)``, using
    ``X[n, i] = -X[i, i] * sum_{k=i+1}^{n} X[n, k] A[k, i]``.
    """
    n = a.dim
    inv = [[None] * (i + 1) for i in range(n + 1)]
    for i in range(1, n + 1):
        d = a[i, i]
        if d == 0:
            raise SingularMatrix(f"zero diagonal entry at ({i}, {i})")
        inv[i][i] = 1 / d
    for offset in range(1, n):
        for row in range(offset + 1, n + 1):
            col = row - offset
            acc = 0 * inv[col][col]
            for k in range(col + 1, row + 1):
                acc += inv[row][k] * a[k, col]
            inv[row][col] = -inv[col][col] * acc
    return TriangularMatrix([inv[i][1:i + 1] for i in range(1, n + 1)])


def busy_dist_matrix(model: Model, mode: str = "exact") -> BusyPeriodDistribution:
    inv = invert_lower_triangular(matrix_A(model, mode))
    return _dist(model, inv.apply(vector_b(model, mode)), Method.MATRIX_INVERSE, mode)


# -- explicit signed sum -----------------------------------------------------

def b_coefficient(model: Model, exponents: Sequence[int], start: int = 1, mode: str = "exact"):
    """Signed weight of an exponent vector whose entries sit on phases ``start, start+1, ...``.

    With ``k_0 < k_1 < ... < k_M <= k_{M+1}`` from :func:`paths.run_indices`
    (``M`` counts nonzero exponents),
    ``b = (-1)^(M-1) prod_{m=0}^{M} ratio(k_m, k_{m+1})``.
    """
    if not exponents:
        raise EmptyAllocation("exponent vector is empty")
    end = start + len(exponents) - 1
    if start < 1 or end > model.n_customers:
        raise IndexOutOfRange(f"phases {start}..{end} outside 1..{model.n_customers}")
    M, ks = run_indices(exponents, start)
    if M == 0:
        raise EmptyAllocation("exponent vector has no nonzero entry")
    lams, _ = model.rates(mode)
    val = _one(mode)
    for a, c in zip(ks, ks[1:]):
        val *= ratio(lams, a, c)
    return val if M % 2 == 1 else -val


def b_coefficient_binomial(model: Model, exponents: Sequence[int], start: int = 1) -> int:
    """Proportional-rate form: ``(-1)^(M-1) prod_m C(N - k_m, k_{m+1} - k_m)``."""
    if model.proportional_rate is None:
        raise RequiresProportionalMode("binomial b needs lambda_j = lambda * (N - j)")
    if not exponents:
        raise EmptyAllocation("exponent vector is empty")
    M, ks = run_indices(exponents, start)
    if M == 0:
        raise EmptyAllocation("exponent vector has no nonzero entry")
    N = model.n_customers
    val = 1
    for a, c in zip(ks, ks[1:]):
        val *= comb(N - a, c - a)
    return val if M % 2 == 1 else -val


def _rho_power_product(rhos, exponents, start, mode):
    w = _one(mode)
    for p, x in enumerate(exponents):
        if x:
            w *= rhos[start + p - 1] ** x
    return w


def a_inverse_explicit(model: Model, i: int, n: int, mode: str = "exact"):
    """Entry ``(i, i-n)`` of ``A^{-1}`` as a signed sum over feasible allocations of order ``n``.

    Each allocation ``u`` contributes ``b(e) * prod rho^e`` for the exponent
    vector ``e = (i-n, u_1, ..., u_n)`` placed on phases ``i-n .. i``.
    """
    N = model.n_customers
    if not 1 <= i <= N or not 0 <= n <= i - 1:
        raise IndexOutOfRange(f"(i={i}, n={n}) needs 1 <= i <= {N} and 0 <= n < i")
    _, rhos = model.rates(mode)
    first = i - n
    if n == 0:
        return rhos[i - 1] ** i
    total = _zero(mode)
    for u in enumerate_feasible(n):
        e = (first, *u)
        total += b_coefficient(model, e, first, mode) * _rho_power_product(rhos, e, first, mode)
    return total


def _explicit_terms(lams, rhos, i: int, table) -> Iterator[tuple[tuple[int, ...], object]]:
    # Depth-first over diagonal hits h_1 < ... < h_M = i, largest next hit
    # first so the order matches paths.enumerate_feasible.  Each step
    # multiplies the parent's partial product by -ratio(g, h) rho_h^(h-g).
    def walk(g, acc, hits):
        if g == i:
            yield hits, acc
            return
        for h in range(i, g, -1):
            step = table[g][h] * rhos[h - 1] ** (h - g)
            yield from walk(h, -acc * step, hits + (h,))

    for h in range(i, 0, -1):
        yield from walk(h, table[1][h] * rhos[h - 1] ** h, (h,))


def explicit_terms(model: Model, i: int, mode: str = "exact") -> Iterator[tuple[tuple[int, ...], object]]:
    """Yield ``(u, b(u) * prod_j rho_j^u_j)`` for every feasible allocation ``u`` of order ``i``."""
    if not 1 <= i <= model.n_customers:
        raise PhaseOutOfRange(f"busy-period size {i} outside 1..{model.n_customers}")
    lams, rhos = model.rates(mode)
    table = _ratio_table(lams)
    for hits, term in _explicit_terms(lams, rhos, i, table):
        u = [0] * i
        prev = 0
        for h in hits:
            u[h - 1] = h - prev
            prev = h
        yield tuple(u), term


def _explicit_entry(model: Model, i: int, mode: str):
    lams, rhos = model.rates(mode)
    table = _ratio_table(lams)
    total = _zero(mode)
    for _, term in _explicit_terms(lams, rhos, i, table):
        total += term
    return total


def busy_dist_explicit(model: Model, mode: str = "exact", workers: int = 1) -> BusyPeriodDistribution:
    """``s_i`` as the signed sum over all ``2**(i-1)`` feasible allocations of order ``i``.

    With ``workers > 1`` the entries are spread over processes; each entry is
    still summed by one worker in a fixed order, so results do not depend
    on the worker count.
    """
    N = model.n_customers
    if workers > 1 and N > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            s = list(pool.map(_explicit_entry, [model] * N, range(1, N + 1), [mode] * N))
    else:
        s = [_explicit_entry(model, i, mode) for i in range(1, N + 1)]
    return _dist(model, s, Method.EXPLICIT_FORMULA, mode)


# -- generating functions ----------------------------------------------------

@dataclass(frozen=True)
class GeneratingFunctionValue:
    phase: int
    z: Fraction
    value: Fraction


def geometric_pgf(p, z):
    """``(1 - p) / (1 - p z)``."""
    den = 1 - p * z
    if den == 0:
        raise PoleAtArgument(f"G_p has a pole at z = 1/p = {z}")
    return (1 - p) / den


def gf_evaluate(model: Model, n: int, z, s: Sequence | None = None,
                mode: str = "exact") -> GeneratingFunctionValue:
    """``P_n(z)``, the generating function of first-entry positions into phase ``n``.

    Uses ``P_n(z) = prod_{i<n} G_i(z) - sum_{i<n} s_i z^i prod_{j=i}^{n-1} G_j(z)``
    with ``G_j = G_{rho_j}``.  ``s`` defaults to the recursion output.
    The identity is between rational functions, so any ``z`` that is not a
    pole ``1/rho_j`` (``j < n``) is accepted.
    """
    N = model.n_customers
    if not 1 <= n <= N:
        raise PhaseOutOfRange(f"phase {n} outside 1..{N}")
    if mode == "exact":
        z = Fraction(z)
    if n == 1:
        return GeneratingFunctionValue(1, z, _one(mode))
    _, rhos = model.rates(mode)
    if s is None:
        s = busy_dist_recursion(model, mode).s
    g = []
    for j in range(1, n):
        if 1 - rhos[j - 1] * z == 0:
            raise PoleAtArgument(f"z = {z} equals 1/rho_{j}")
        g.append(geometric_pgf(rhos[j - 1], z))
    # suffix[i-1] = prod_{j=i}^{n-1} G_j(z)
    suffix = [None] * (n - 1)
    acc = _one(mode)
    for j in range(n - 1, 0, -1):
        acc *= g[j - 1]
        suffix[j - 1] = acc
    value = suffix[0]
    for i in range(1, n):
        value -= s[i - 1] * z ** i * suffix[i - 1]
    return GeneratingFunctionValue(n, z, value)


def _interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list[Fraction]:
    """Monomial coefficients of the unique polynomial through ``(xs, ys)``."""
    m = len(xs)
    coef = list(ys)
    # Newton divided differences
    for j in range(1, m):
        for i in range(m - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * m
    poly[0] = coef[m - 1]
    deg = 0
    for k in range(m - 2, -1, -1):
        # poly = poly * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * m
        for d in range(deg + 1):
            new[d + 1] += poly[d]
            new[d] -= poly[d] * xs[k]
        new[0] += coef[k]
        poly = new
        deg += 1
    return poly


def gf_coefficients(model: Model, n: int) -> list[Fraction]:
    """Recover ``p_n(0), ..., p_n(n-2)`` by evaluating ``P_n`` at ``n - 1`` points in ``[0, 1)``.

    Those points lie inside every radius ``1/rho_j`` (``j < N``), so no pole
    is hit.  ``n = 1`` gives ``[1]``.
    """
    if n == 1:
        return [Fraction(1)]
    s = busy_dist_recursion(model).s
    xs = [Fraction(k, n) for k in range(n - 1)]
    ys = [gf_evaluate(model, n, x, s).value for x in xs]
    return _interpolate(xs, ys)


# -- joint distribution over all busy periods ---------------------------------

@dataclass
class JointDistribution:
    """Probabilities of full busy-period size sequences ``(n_1, n_2, ...)`` summing to ``N``.

    Sequences with more than ``max_periods`` parts are pooled in ``remainder``.
    """

    n: int
    probs: dict[tuple[int, ...], Fraction] = field(default_factory=dict)
    remainder: Fraction = Fraction(0)
    max_periods: int | None = None

    @property
    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0)) + self.remainder


def joint_busy_dist(model: Model, max_periods: int | None = None) -> JointDistribution:
    """Joint law of all busy-period sizes.

    After a first busy period of size ``k`` the queue restarts empty with
    the last ``N - k`` rates (see :meth:`Model.residual`), so
    ``P(n_1, n_2, ...) = s_{n_1}^{(N)} s_{n_2}^{(N - n_1)} ...``.
    """
    N = model.n_customers
    if max_periods is None:
        max_periods = N
    if max_periods < 1:
        raise ValueError("max_periods must be >= 1")
    residual = {m: busy_dist_recursion(model.residual(m)).s for m in range(1, N + 1)}
    out = JointDistribution(N, max_periods=max_periods)

    def walk(left, prob, parts):
        if left == 0:
            out.probs[parts] = prob
            return
        if len(parts) == max_periods:
            out.remainder += prob
            return
        s = residual[left]
        for k in range(1, left + 1):
            walk(left - k, prob * s[k - 1], parts + (k,))

    walk(N, Fraction(1), ())
    return out


# -- round-off measurement ---------------------------------------------------

@dataclass(frozen=True)
class CancellationReport:
    """Float64 evaluation of the signed sum against the exact value."""

    n: int
    exact: tuple
    approx: tuple
    abs_deviation: tuple
    # sum of |terms| per entry; large ratios to s_i signal cancellation
    term_mass: tuple

    @property
    def max_abs_deviation(self) -> float:
        return max(self.abs_deviation)

    def to_json(self) -> dict:
        from .distribution import decimal17
        from .model import format_rational
        return {
            "n": self.n,
            "max_abs_deviation": self.max_abs_deviation,
            "entries": [
                {"i": i, "exact": format_rational(e), "float": a, "abs_deviation": d, "term_mass": m}
                for i, (e, a, d, m) in enumerate(
                    zip(self.exact, self.approx, self.abs_deviation, self.term_mass), start=1)
            ],
        }


def cancellation_report(model: Model) -> CancellationReport:
    exact = busy_dist_explicit(model).s
    approx = busy_dist_explicit(model, mode="float").s
    lams, rhos = model.rates("float")
    table = _ratio_table(lams)
    mass = tuple(sum(abs(t) for _, t in _explicit_terms(lams, rhos, i, table))
                 for i in range(1, model.n_customers + 1))
    dev = tuple(abs(float(Fraction(a) - e)) for a, e in zip(approx, exact))
    return CancellationReport(model.n_customers, tuple(exact), tuple(approx), dev, mass)
