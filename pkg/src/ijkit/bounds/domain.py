"""
The parameter region over which the bound's suprema are estimated.

A domain is the ball of radius r around θ̂₁. Its sample is the center plus
θ̂₁ + ρ·u for every direction u of a fixed set and every rung ρ = 2^k of a
power-of-two ladder between MIN_RADIUS and r. The directions are the 2D
axis directions ±e_j (when 2D ≤ n_samples) topped up with antithetic
pairs ±u of seeded uniform directions. The radius is rounded down to its
rung, so the sample for a smaller radius is a subset of the sample for a
larger one and every sampled supremum is nondecreasing in r.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
from pydantic import Field

from ijkit.core import Parameter, as_parameter
from ijkit.errors import InputError
from ijkit.utils import make_rng
from ijkit.utils.config import BaseConfig

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

# Smallest ladder rung, 2**MIN_RUNG.
MIN_RUNG = -20
MIN_RADIUS = math.ldexp(1.0, MIN_RUNG)


class DomainConfig(BaseConfig):
    """How the certificate domain is chosen and sampled."""

    radius: float | None = Field(
        default=None,
        ge=MIN_RADIUS,
        description="Ball radius, rounded down to a power of two (null: automatic)",
    )

    n_samples: int = Field(
        default=64,
        ge=2,
        alias="n-samples",
        description="Sampled directions per radius rung",
    )

    min_radius: float = Field(
        default=1e-6,
        ge=MIN_RADIUS,
        alias="min-radius",
        description="Floor of the automatic radius",
    )


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """
    Ball {θ : ‖θ − center‖₂ ≤ radius} and how to sample it.

    The radius is rounded down to its power of two on construction.
    """

    center: Parameter
    radius: float
    n_samples: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.radius) and self.radius >= MIN_RADIUS):
            raise InputError(
                f"Domain radius must be >= {MIN_RADIUS:.3g}, got {self.radius}"
            )
        if self.n_samples < 2:
            raise InputError(
                f"Domain needs n_samples >= 2, got {self.n_samples}"
            )
        center = as_parameter(self.center)
        center.flags.writeable = False
        object.__setattr__(self, "center", center)

        _, exponent = math.frexp(self.radius)
        rung = math.ldexp(1.0, exponent - 1)
        if rung != self.radius:
            logger.debug(
                "Domain radius %.6g rounded down to %.6g", self.radius, rung
            )
        object.__setattr__(self, "radius", rung)

    @property
    def dim(self) -> int:
        return int(self.center.shape[0])

    @cached_property
    def directions(self) -> Array:
        """Unit directions, shape (n_samples, D); identical for every radius."""
        dim = self.dim
        directions: list[Array] = []
        if 2 * dim <= self.n_samples:
            eye = np.eye(dim)
            for j in range(dim):
                directions.extend([eye[j], -eye[j]])

        rng = make_rng(self.seed)
        while len(directions) < self.n_samples:
            u = rng.standard_normal(dim)
            u /= np.linalg.norm(u)
            directions.append(u)
            if len(directions) < self.n_samples:
                directions.append(-u)
        return np.array(directions)

    @cached_property
    def rungs(self) -> Array:
        """Ladder radii 2^MIN_RUNG, ..., radius in increasing order."""
        top = math.frexp(self.radius)[1] - 1
        return np.ldexp(1.0, np.arange(MIN_RUNG, top + 1))

    @property
    def n_points(self) -> int:
        return 1 + self.n_samples * len(self.rungs)

    def sample_points(self) -> list[Parameter]:
        """Center first, then every direction at every rung, innermost first."""
        points = [np.array(self.center)]
        for rung in self.rungs:
            points.extend(self.center + rung * u for u in self.directions)
        return points
