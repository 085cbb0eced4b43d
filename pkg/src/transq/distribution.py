"""Result container shared by every route that produces busy-period probabilities."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

from .model import format_rational


class Method(enum.Enum):
    RECURSION = "recursion"
    RECURSION_BINOMIAL = "binomial"
    MATRIX_INVERSE = "matrix"
    EXPLICIT_FORMULA = "explicit"
    ORACLE = "oracle"
    ENUMERATION = "enumeration"
    MONTE_CARLO = "montecarlo"


def decimal17(x) -> str:
    """17 significant digits; exact inputs are rounded once, never via float."""
    if isinstance(x, float):
        return format(x, ".17g")
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 17
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d, "g") if d else "0"


@dataclass(frozen=True)
class BusyPeriodDistribution:
    """``s[i-1]`` is the probability that the first busy period serves ``i`` customers."""

    s: tuple
    method: Method
    model_digest: str
    mode: str = "exact"

    @property
    def n(self) -> int:
        return len(self.s)

    def prob(self, i: int):
        if not 1 <= i <= len(self.s):
            raise IndexError(f"busy-period size {i} outside 1..{len(self.s)}")
        return self.s[i - 1]

    @property
    def total(self):
        return sum(self.s, Fraction(0) if self.mode == "exact" else 0.0)

    def same_values(self, other: "BusyPeriodDistribution") -> bool:
        return tuple(self.s) == tuple(other.s)

    def to_json(self) -> dict:
        exact = self.mode == "exact"
        return {
            "n": self.n,
            "method": self.method.value,
            "s": [{"i": i, "exact": format_rational(x) if exact else None, "decimal": decimal17(x)}
                  for i, x in enumerate(self.s, start=1)],
            "sum_check": format_rational(self.total) if exact else decimal17(self.total),
        }
