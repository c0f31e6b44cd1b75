from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from django.db import models

from common.exceptions import DomainError
from comparison_kernel.models import ExtendedReal
from discrete_needles.models import DiscreteMMS


class ModelKind(models.TextChoices):
    EUCLIDEAN_CONE = 'euclidean_cone', 'Euclidean cone, t^N dt'
    HYPERBOLIC_CONE = 'hyperbolic_cone', 'Hyperbolic cone, sinh^N t dt'
    SPHERICAL_SUSPENSION = 'spherical_suspension', 'Spherical suspension, sin^N t dt'


class BuiltinBase(models.TextChoices):
    CIRCLE = 'circle', 'Equally spaced points on a circle'
    SPHERE = 'sphere', 'Fibonacci points on the round 2-sphere'
    POINT = 'point', 'A single point'


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """
    A cone or suspension over a finite base.

    Base distances enter the cone formulas through min(d, π); ``N_exp`` is the
    exponent of the radial density.
    """

    kind: str
    N_exp: float
    base: DiscreteMMS

    def __post_init__(self):
        if self.kind not in ModelKind.values:
            raise DomainError('Unknown model kind %(kind)s.', params={'kind': self.kind})
        if not (math.isfinite(self.N_exp) and self.N_exp >= 0):
            raise DomainError('The radial exponent must be finite and nonnegative.')

    @property
    def radial_max(self) -> ExtendedReal:
        if self.kind == ModelKind.SPHERICAL_SUSPENSION:
            return ExtendedReal(math.pi)
        return ExtendedReal.infinity()

    @property
    def base_diameter(self) -> float:
        return float(min(self.base.dense_metric().max(), math.pi))

    def to_json(self):
        return {'kind': self.kind, 'N_exp': self.N_exp, 'base_size': self.base.n,
                'base_diameter': self.base_diameter}


@dataclass(frozen=True)
class ConePoint:
    """A point (t, x) with x an index into the base; all points with t = 0 are the tip."""

    t: float
    x: Optional[int] = 0

    @property
    def is_tip(self) -> bool:
        return self.t == 0

    def to_json(self):
        return {'t': self.t, 'x': self.x}


@dataclass(frozen=True, eq=False)
class SharpnessWitness:
    """A truncated model space whose inradius equals the comparison radius."""

    space: ModelSpace
    K: float
    H: float
    N: float
    R: float

    @property
    def achieved_inradius(self) -> float:
        return self.R

    def to_json(self):
        return {'space': self.space, 'K': self.K, 'H': self.H, 'N': self.N, 'R': self.R,
                'achieved_inradius': self.achieved_inradius}
