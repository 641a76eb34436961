"""Complex values carrying an absolute error budget.

Every analytic routine in the package returns a ``ComplexApprox``.  Two
approximations are considered equal at tolerance ``tol`` when

    |a - b| <= a.abs_err + b.abs_err + tol
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

# Per-operation rounding budget used when accumulating roots of unity.
TERM_EPS = 1e-14


@dataclass(frozen=True)
class ComplexApprox:
    re: float
    im: float
    abs_err: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.abs_err) or self.abs_err < 0:
            raise ValueError(f"abs_err must be finite and nonnegative, got {self.abs_err}")

    @classmethod
    def of(cls, z: complex | float | int, abs_err: float = 0.0) -> ComplexApprox:
        z = complex(z)
        return cls(z.real, z.imag, abs_err)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return self.value

    def __abs__(self) -> float:
        return abs(self.value)

    def __neg__(self) -> ComplexApprox:
        return ComplexApprox(-self.re, -self.im, self.abs_err)

    def __add__(self, other: ComplexApprox | complex | float) -> ComplexApprox:
        o = _lift(other)
        return ComplexApprox.of(self.value + o.value, self.abs_err + o.abs_err)

    __radd__ = __add__

    def __sub__(self, other: ComplexApprox | complex | float) -> ComplexApprox:
        return self + (-_lift(other))

    def __mul__(self, other: ComplexApprox | complex | float) -> ComplexApprox:
        o = _lift(other)
        # first-order propagation plus the cross term
        err = abs(self.value) * o.abs_err + abs(o.value) * self.abs_err + self.abs_err * o.abs_err
        return ComplexApprox.of(self.value * o.value, err)

    __rmul__ = __mul__

    def distance(self, other: ComplexApprox | complex | float) -> float:
        return abs(self.value - _lift(other).value)

    def close_to(self, other: ComplexApprox | complex | float, tol: float) -> bool:
        o = _lift(other)
        return self.distance(o) <= self.abs_err + o.abs_err + tol

    def conj(self) -> ComplexApprox:
        return ComplexApprox(self.re, -self.im, self.abs_err)

    def __str__(self) -> str:
        return f"{self.re:.15g}{self.im:+.15g}i (+/-{self.abs_err:.2g})"


def _lift(x: ComplexApprox | complex | float | int) -> ComplexApprox:
    if isinstance(x, ComplexApprox):
        return x
    return ComplexApprox.of(x)


def e(x: float) -> complex:
    """The additive character e(x) = exp(2 pi i x)."""
    return cmath.exp(2j * math.pi * x)


def e_ratio(num: int, den: int) -> complex:
    """e(num/den), reducing the numerator first so large arguments stay accurate."""
    return cmath.exp(2j * math.pi * ((num % den) / den))
