"""Queue parameters for the finite-pool exponential queue.

A model holds the pool size ``N``, the per-phase arrival rates
``lambda_1 > ... > lambda_N = 0`` and the service rate ``mu``.  Phase ``j``
means that ``j`` customers have arrived so far; phases run ``1..N``.
All rates are kept as :class:`fractions.Fraction` so every downstream
computation stays exact.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from pathlib import Path
from typing import Iterable, Union

from .errors import (
    LastRateNonzero,
    NonPositiveParameter,
    NotStrictlyDecreasing,
    PhaseOutOfRange,
)

RationalLike = Union[int, str, Fraction]


class Source(enum.Enum):
    PROPORTIONAL = "proportional"
    EXPLICIT_SEQUENCE = "explicit_sequence"


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``value`` exactly.

    Accepts ints, Fractions, and strings such as ``"3/4"``, ``"7"`` or
    ``"0.125"``.  Binary floats are rejected because they are not exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rates")
    if isinstance(value, float):
        raise TypeError(f"refusing binary float {value!r}; pass 'p/q' or a decimal string")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational {value!r}") from exc
    raise TypeError(f"unsupported rational type {type(value).__name__}")


def format_rational(x: Fraction) -> str:
    """Render as ``"p/q"``, or ``"p"`` when the denominator is one."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Model:
    n_customers: int
    lambda_seq: tuple[Fraction, ...]
    mu: Fraction
    source: Source = Source.EXPLICIT_SEQUENCE
    # base rate when built with model_from_rate
    base_rate: Fraction | None = None

    def __post_init__(self):
        _validate(self.lambda_seq, self.mu)
        if self.n_customers != len(self.lambda_seq):
            raise ValueError("n_customers does not match the rate sequence length")

    # Equality and hashing ignore how the model was built.
    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return self.lambda_seq == other.lambda_seq and self.mu == other.mu

    def __hash__(self):
        return hash((self.lambda_seq, self.mu))

    @property
    def N(self) -> int:
        return self.n_customers

    def lam(self, j: int) -> Fraction:
        """Arrival rate in phase ``j`` (1-based)."""
        _check_phase(j, self.n_customers)
        return self.lambda_seq[j - 1]

    @cached_property
    def rhos(self) -> tuple[Fraction, ...]:
        return tuple(self.mu / (self.mu + lam) for lam in self.lambda_seq)

    def rates(self, mode: str = "exact"):
        """Return ``(lambdas, rhos)`` as Fractions or, for ``mode="float"``, floats."""
        if mode == "exact":
            return self.lambda_seq, self.rhos
        if mode == "float":
            return tuple(map(float, self.lambda_seq)), tuple(map(float, self.rhos))
        raise ValueError(f"unknown mode {mode!r}")

    @cached_property
    def proportional_rate(self) -> Fraction | None:
        """``lambda`` if the rates satisfy ``lambda_j = lambda * (N - j)``, else None.

        Decided from the numbers, not from :attr:`source`, so a sequence
        typed in by hand behaves exactly like one built by
        :func:`model_from_rate`.  For ``N = 1`` any base rate fits; the
        stored one (or 1) is returned.
        """
        n = self.n_customers
        if n == 1:
            return self.base_rate if self.base_rate is not None else Fraction(1)
        lam = self.lambda_seq[0] / (n - 1)
        if all(x == lam * (n - j) for j, x in enumerate(self.lambda_seq, start=1)):
            return lam
        return None

    def residual(self, m: int) -> "Model":
        """Model for the customers left after ``N - m`` have been served.

        The rates are the last ``m`` entries of the sequence, re-indexed
        from 1.  In proportional form this is pool size ``m`` with the same
        base rate.
        """
        if not 1 <= m <= self.n_customers:
            raise PhaseOutOfRange(f"residual size {m} outside 1..{self.n_customers}")
        tail = self.lambda_seq[self.n_customers - m:]
        return Model(m, tail, self.mu, self.source, self.base_rate)

    @cached_property
    def digest(self) -> str:
        payload = json.dumps(
            {"lambda_seq": [format_rational(x) for x in self.lambda_seq],
             "mu": format_rational(self.mu)},
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_json(self) -> dict:
        if self.source is Source.PROPORTIONAL:
            return {"n": self.n_customers, "lambda": format_rational(self.base_rate),
                    "mu": format_rational(self.mu)}
        return {"lambda_seq": [format_rational(x) for x in self.lambda_seq],
                "mu": format_rational(self.mu)}


def _check_phase(j: int, n: int) -> None:
    if not 1 <= j <= n:
        raise PhaseOutOfRange(f"phase {j} outside 1..{n}")


def _validate(lambda_seq: tuple[Fraction, ...], mu: Fraction) -> None:
    if not lambda_seq:
        raise NonPositiveParameter("rate sequence must be nonempty (N >= 1)")
    if mu <= 0:
        raise NonPositiveParameter(f"service rate mu must be positive, got {mu}")
    for j, lam in enumerate(lambda_seq, start=1):
        if lam < 0:
            raise NonPositiveParameter(f"arrival rate lambda_{j} = {lam} is negative")
    for j in range(1, len(lambda_seq)):
        if lambda_seq[j - 1] <= lambda_seq[j]:
            raise NotStrictlyDecreasing(
                f"rates must be strictly decreasing: lambda_{j} = {lambda_seq[j - 1]}"
                f" <= lambda_{j + 1} = {lambda_seq[j]}")
    if lambda_seq[-1] != 0:
        raise LastRateNonzero(f"last rate lambda_N must be 0, got {lambda_seq[-1]}")


def model_from_rate(n: int, lam: RationalLike, mu: RationalLike) -> Model:
    """Proportional model: ``lambda_j = lam * (n - j)`` for ``j = 1..n``."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise NonPositiveParameter(f"pool size n must be a positive integer, got {n!r}")
    lam = parse_rational(lam)
    mu = parse_rational(mu)
    if lam <= 0:
        raise NonPositiveParameter(f"arrival rate lambda must be positive, got {lam}")
    if mu <= 0:
        raise NonPositiveParameter(f"service rate mu must be positive, got {mu}")
    seq = tuple(lam * (n - j) for j in range(1, n + 1))
    return Model(n, seq, mu, Source.PROPORTIONAL, lam)


def model_from_sequence(lambda_seq: Iterable[RationalLike], mu: RationalLike) -> Model:
    seq = tuple(parse_rational(x) for x in lambda_seq)
    return Model(len(seq), seq, parse_rational(mu), Source.EXPLICIT_SEQUENCE)


def rho(model: Model, j: int) -> Fraction:
    """Probability that a service beats the next arrival in phase ``j``."""
    _check_phase(j, model.n_customers)
    return model.rhos[j - 1]


def model_from_config(data: dict) -> Model:
    """Build a model from the JSON config schema.

    Either ``{"n": int, "lambda": "p/q", "mu": "p/q"}`` or
    ``{"lambda_seq": ["p/q", ...], "mu": "p/q"}``.
    """
    if "mu" not in data:
        raise ValueError("config is missing 'mu'")
    has_rate = "n" in data or "lambda" in data
    has_seq = "lambda_seq" in data
    if has_rate == has_seq:
        raise ValueError("config needs exactly one of {'n','lambda'} or 'lambda_seq'")
    if has_seq:
        return model_from_sequence(data["lambda_seq"], data["mu"])
    if "n" not in data or "lambda" not in data:
        raise ValueError("proportional config needs both 'n' and 'lambda'")
    return model_from_rate(data["n"], data["lambda"], data["mu"])


def load_model(path: str | Path) -> Model:
    with open(path) as fh:
        return model_from_config(json.load(fh))
