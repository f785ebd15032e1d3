"""p 冪位数（無限フラグ付き）."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union


@dataclass(frozen=True)
class GroupOrder:
    """位数 p^exponent. exponent が None なら無限."""

    p: int
    exponent: Optional[int]

    @classmethod
    def infinite(cls, p: int) -> "GroupOrder":
        return cls(p, None)

    @classmethod
    def trivial(cls, p: int) -> "GroupOrder":
        return cls(p, 0)

    @property
    def is_finite(self) -> bool:
        return self.exponent is not None

    @property
    def value(self) -> Optional[int]:
        return None if self.exponent is None else self.p**self.exponent

    def __mul__(self, other: "GroupOrder") -> "GroupOrder":
        if self.exponent is None or other.exponent is None:
            return GroupOrder.infinite(self.p)
        return GroupOrder(self.p, self.exponent + other.exponent)

    def to_json(self) -> Union[int, str]:
        return "infinite" if self.exponent is None else self.exponent

    def __str__(self) -> str:
        return "infinite" if self.exponent is None else f"{self.p}^{self.exponent}"


def ratio(numerator: GroupOrder, denominator: GroupOrder) -> Fraction:
    """♯A/♯B を有理数で返す. どちらかが無限なら ValueError."""
    if not (numerator.is_finite and denominator.is_finite):
        raise ValueError("ratio of infinite orders")
    return Fraction(numerator.p) ** (numerator.exponent - denominator.exponent)
