"""Reference limit laws: Gaussian tail and the minimum of L independent
standard normals, whose survival function is Q(t)^L. Moments come from
adaptive quadrature on [-12, 12]; the tail mass outside is below 1e-30.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure, TooFewSamples

_QUAD_BOUND = 12.0
_QUAD_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gauss_q(t):
    """Gaussian tail Q(t) = P[N(0,1) >= t], absolute error far below 1e-12."""
    if np.ndim(t) == 0:
        return 0.5 * math.erfc(float(t) / _SQRT2)
    from scipy.special import erfc

    return 0.5 * erfc(np.asarray(t, dtype=np.float64) / _SQRT2)


def _phi(t):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(t))


def min_gauss_cdf(L: int, t):
    """CDF of min of L independent standard normals: 1 - Q(t)^L."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return 1.0 - gauss_q(t) ** L


def min_gauss_pdf(L: int, t):
    """Density L phi(t) Q(t)^(L-1) of the minimum of L standard normals."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return L * _phi(t) * gauss_q(t) ** (L - 1)


def min_gauss_moments(L: int) -> tuple[float, float]:
    """(mean, variance) of min of L standard normals by quadrature.

    The integration domain is split around the bulk of the minimum
    (near -sqrt(2 ln L)) so the reported quadrature error stays honest.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if L == 1:
        return 0.0, 1.0
    c = -math.sqrt(2.0 * math.log(L))
    points = sorted(
        {-_QUAD_BOUND, _QUAD_BOUND}
        | {min(_QUAD_BOUND, max(-_QUAD_BOUND, c + o)) for o in (-4, -2, -1, 0, 1, 2, 4)}
    )

    def moment(power: int) -> tuple[float, float]:
        total, err = 0.0, 0.0
        for a, b in zip(points[:-1], points[1:]):
            v, e = integrate.quad(
                lambda t: t**power * min_gauss_pdf(L, t), a, b,
                epsabs=1e-13, limit=200,
            )
            total += v
            err += e
        return total, err

    m1, err1 = moment(1)
    m2, err2 = moment(2)
    if max(err1, err2) > _QUAD_TOL:
        raise QuadratureFailure(
            f"quadrature error {max(err1, err2):.2e} above {_QUAD_TOL}"
        )
    return m1, m2 - m1 * m1


@dataclass(frozen=True)
class ReferenceDistribution:
    """One of the limit laws a simulation histogram is compared against."""

    kind: str  # "gaussian" | "min_gauss" | "normalized_min_gauss"
    L: int = 1
    mean: float = 0.0
    variance: float = 1.0

    @classmethod
    def standard_gaussian(cls) -> "ReferenceDistribution":
        return cls("gaussian")

    @classmethod
    def min_of_gaussians(cls, L: int) -> "ReferenceDistribution":
        m, v = min_gauss_moments(L)
        return cls("min_gauss", L, m, v)

    @classmethod
    def normalized_min_of_gaussians(cls, L: int) -> "ReferenceDistribution":
        """Min of L standard normals, shifted and scaled to mean 0, var 1."""
        m, v = min_gauss_moments(L)
        return cls("normalized_min_gauss", L, m, v)

    def cdf(self, t):
        if self.kind == "gaussian":
            return 1.0 - gauss_q(t)
        if self.kind == "min_gauss":
            return min_gauss_cdf(self.L, t)
        sigma = math.sqrt(self.variance)
        return min_gauss_cdf(self.L, self.mean + sigma * np.asarray(t))

    def pdf(self, t):
        if self.kind == "gaussian":
            return _phi(t)
        if self.kind == "min_gauss":
            return min_gauss_pdf(self.L, t)
        sigma = math.sqrt(self.variance)
        return sigma * min_gauss_pdf(self.L, self.mean + sigma * np.asarray(t))


def kolmogorov_distance(samples, ref: ReferenceDistribution) -> float:
    """sup |empirical CDF - reference CDF|, both one-sided jumps checked."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    m = s.size
    if m < 2:
        raise TooFewSamples(f"{m} samples, need >= 2")
    f = np.asarray(ref.cdf(s), dtype=np.float64)
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))
