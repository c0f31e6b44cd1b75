"""Value types of the comparison kernel.

Nothing here is persisted; the Django model machinery is only used for the
``TextChoices`` enumerations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from numbers import Real

from django.db import models

from common.exceptions import DomainError


class BallConditionCase(models.TextChoices):
    POSITIVE_KAPPA = 'positive_kappa', 'κ > 0'
    ZERO_KAPPA_POSITIVE_LAMBDA = 'zero_kappa_positive_lambda', 'κ = 0 and λ > 0'
    NEGATIVE_KAPPA_LARGE_LAMBDA = 'negative_kappa_large_lambda', 'κ < 0 and λ > √|κ|'
    FAILS = 'fails', 'no positive zero'


@total_ordering
@dataclass(frozen=True, eq=False)
class ExtendedReal:
    """
    A real number or one of ±∞.

    ``sign`` is 0 for finite values and ±1 for the infinities; ``value`` is
    ignored when ``sign`` is nonzero. Products and powers follow the
    conventions ``0·∞ = 0`` and ``∞^0 = 1``.
    """

    value: float = 0.0
    sign: int = 0

    @classmethod
    def of(cls, value) -> 'ExtendedReal':
        if isinstance(value, ExtendedReal):
            return value
        value = float(value)
        if math.isnan(value):
            raise DomainError('NaN is not an extended real.')
        if math.isinf(value):
            return cls(0.0, 1 if value > 0 else -1)
        return cls(value, 0)

    @classmethod
    def infinity(cls) -> 'ExtendedReal':
        return cls(0.0, 1)

    @classmethod
    def negative_infinity(cls) -> 'ExtendedReal':
        return cls(0.0, -1)

    @property
    def is_finite(self) -> bool:
        return self.sign == 0

    @property
    def is_positive_infinity(self) -> bool:
        return self.sign == 1

    @property
    def is_negative_infinity(self) -> bool:
        return self.sign == -1

    def _key(self):
        return (self.sign, self.value if self.sign == 0 else 0.0)

    @staticmethod
    def _coerce(other):
        if isinstance(other, ExtendedReal):
            return other
        if isinstance(other, Real):
            return ExtendedReal.of(other)
        return NotImplemented

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __float__(self):
        if self.sign == 0:
            return float(self.value)
        return math.inf if self.sign > 0 else -math.inf

    def __neg__(self):
        return ExtendedReal(-self.value, -self.sign) if self.sign == 0 else ExtendedReal(0.0, -self.sign)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.sign and other.sign and self.sign != other.sign:
            raise DomainError('∞ − ∞ is undefined.')
        if self.sign or other.sign:
            return ExtendedReal(0.0, self.sign or other.sign)
        return ExtendedReal(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def multiply(self, other) -> 'ExtendedReal':
        """Product with the convention 0·∞ = 0."""
        other = self._coerce(other)
        if (self.sign == 0 and self.value == 0.0) or (other.sign == 0 and other.value == 0.0):
            return ExtendedReal(0.0)
        if self.sign == 0 and other.sign == 0:
            return ExtendedReal(self.value * other.value)
        left = self.sign or (1 if self.value > 0 else -1)
        right = other.sign or (1 if other.value > 0 else -1)
        return ExtendedReal(0.0, left * right)

    def power(self, exponent: float) -> 'ExtendedReal':
        """Power of a nonnegative extended real with the convention ∞^0 = 1."""
        if self < 0:
            raise DomainError('Powers are only defined for nonnegative extended reals.')
        if exponent == 0:
            return ExtendedReal(1.0)
        if self.sign == 1:
            return ExtendedReal.infinity() if exponent > 0 else ExtendedReal(0.0)
        if self.value == 0.0 and exponent < 0:
            return ExtendedReal.infinity()
        return ExtendedReal(self.value ** exponent)

    def to_json(self):
        if self.sign == 0:
            return float(self.value)
        return '+inf' if self.sign > 0 else '-inf'

    def __repr__(self):
        return f'ExtendedReal({self})'

    def __str__(self):
        if self.sign == 0:
            return repr(float(self.value))
        return '+inf' if self.sign > 0 else '-inf'


@dataclass(frozen=True)
class ComparisonTriple:
    """Curvature K, mean-curvature bound H and dimension N > 1."""

    K: float
    H: float
    N: float

    def __post_init__(self):
        for name in ('K', 'H', 'N'):
            value = getattr(self, name)
            if not isinstance(value, Real) or not math.isfinite(value):
                raise DomainError('%(name)s must be a finite real, got %(value)s.',
                                  params={'name': name, 'value': value})
        if self.N <= 1:
            raise DomainError('N must exceed 1, got %(N)s.', params={'N': self.N})

    @property
    def kappa(self) -> float:
        return self.K / (self.N - 1)

    @property
    def lam(self) -> float:
        return self.H / (self.N - 1)

    def perturbed(self, delta: float) -> 'ComparisonTriple':
        return ComparisonTriple(self.K - delta, self.H - delta, self.N + delta)

    def to_json(self):
        return {'K': self.K, 'H': self.H, 'N': self.N}
