"""Problem instances and the closed-form constants W(d, s) and C(d)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import UnsupportedInstanceError
from .specfun import sphere_surface

__all__ = ["ProblemInstance", "constant_W", "constant_C", "SHARP_INSTANCES"]


@dataclass(frozen=True)
class ProblemInstance:
    """A Sobolev-Strichartz instance (d, s) with exponent p = 2(d+1)/(d-2s)."""

    d: int
    s: Fraction

    def __post_init__(self):
        s = Fraction(self.s).limit_denominator(10_000) if isinstance(self.s, float) \
            else Fraction(self.s)
        object.__setattr__(self, "s", s)
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"d must be an integer >= 2, got {self.d}")
        if not Fraction(1, 2) <= s < Fraction(self.d, 2):
            raise ValueError(f"s must lie in [1/2, d/2), got {s}")

    @property
    def p(self) -> Fraction:
        return Fraction(2 * (self.d + 1)) / (self.d - 2 * self.s)

    @property
    def key(self) -> tuple:
        return (int(self.d), self.s)


SHARP_INSTANCES = {
    (4, Fraction(3, 4)): lambda: (4.0 / (15.0 * math.pi ** 2)) ** 0.25,
    (5, Fraction(1)): lambda: (1.0 / (24.0 * math.pi ** 2)) ** 0.25,
}


def constant_W(inst: ProblemInstance) -> float:
    """Sharp constant for the two instances where it is known in closed form."""
    try:
        return SHARP_INSTANCES[inst.key]()
    except KeyError:
        raise UnsupportedInstanceError(
            f"no closed-form sharp constant for (d, s) = ({inst.d}, {inst.s})") from None


def constant_C(d: int) -> float:
    """C(d) = 2^{-(d-1)/2} (2 pi)^{-3d+1} |S^{d-1}|."""
    if int(d) != d or d < 3:
        raise ValueError(f"constant_C needs an integer d >= 3, got {d}")
    return 2.0 ** (-(d - 1) / 2) * (2.0 * math.pi) ** (-3 * d + 1) * sphere_surface(d)
