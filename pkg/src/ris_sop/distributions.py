"""Distribution parameters and evaluators for the link SNRs.

For large surfaces the aligned legitimate sum's components are
asymptotically Gaussian: ``X`` (the cosine side) with mean ``m1`` and
variance ``sigma1_sq``, ``Y`` (the sine side) zero-mean with variance
``sigma2_sq``.  The destination SNR then splits as
``gamma_d = gamma_d1 + gamma_d2`` with ``gamma_d1 = gamma_srd_bar*X**2``
(noncentral) and ``gamma_d2 = gamma_srd_bar*Y**2`` (a Gamma(1/2)
variate).  The eavesdropper's SNR is asymptotically exponential with
rate ``epsilon = 1/(N*gamma_sre_bar + gamma_se_bar)``: phase alignment
at the surface does not favour the eavesdropper, so its bounce behaves
as an unaligned sum plus the direct path.

With continuous phase control the sine side vanishes (``sigma2_sq = 0``)
and ``gamma_d2`` is degenerate at zero; its rate parameter is the typed
marker `DEGENERATE` rather than infinity, forcing callers to branch.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Tuple, Union

from .channel import CONTINUOUS, SystemConfig
from .numerics import (
    QuadratureResult,
    erfc,
    gamma_function,
    integrate_adaptive,
    sinc_normalized,
)


class _DegenerateType:
    """Singleton marking a distribution collapsed to a point mass at 0."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Degenerate"

    def __reduce__(self):
        return (_DegenerateType, ())


#: Rate value of ``gamma_d2`` under continuous phase control.
DEGENERATE = _DegenerateType()


class DegenerateDistributionError(ValueError):
    """Raised when a density is requested from a point-mass distribution."""


@dataclasses.dataclass(frozen=True)
class LegitSnrStats:
    """Moments and derived parameters of the legitimate-link SNR.

    ``m1``, ``sigma1_sq``, ``sigma2_sq`` are the mean of X and the
    variances of X and Y.  ``alpha = m1*sqrt(gamma_srd_bar)`` and
    ``beta = sqrt(2*sigma1_sq*gamma_srd_bar)`` parameterize gamma_d1's
    CDF; ``lam = 1/(2*sigma2_sq*gamma_srd_bar)`` (or `DEGENERATE`) and
    ``mu = 1/2`` are gamma_d2's Gamma rate and shape.
    """

    m1: float
    sigma1_sq: float
    sigma2_sq: float
    alpha: float
    beta: float
    lam: Union[float, _DegenerateType]
    mu: float

    def __post_init__(self) -> None:
        if not self.m1 > 0.0:
            raise ValueError(f"m1 must be positive, got {self.m1}")
        if not self.sigma1_sq > 0.0:
            raise ValueError(f"sigma1_sq must be positive, got {self.sigma1_sq}")
        if not self.sigma2_sq >= 0.0:
            raise ValueError(f"sigma2_sq must be >= 0, got {self.sigma2_sq}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.lam is not DEGENERATE:
            if not (isinstance(self.lam, float) and self.lam > 0.0):
                raise ValueError(f"lam must be positive or DEGENERATE, got {self.lam}")
            if self.sigma2_sq == 0.0:
                raise ValueError("sigma2_sq == 0 requires a DEGENERATE rate")
        elif self.sigma2_sq != 0.0:
            raise ValueError("DEGENERATE rate requires sigma2_sq == 0")
        if self.mu != 0.5:
            raise ValueError(f"mu must equal 1/2, got {self.mu}")

    @property
    def is_degenerate(self) -> bool:
        """True when the sine side carries no mass (continuous control)."""
        return self.lam is DEGENERATE


@dataclasses.dataclass(frozen=True)
class EveSnrStats:
    """Exponential-law parameter of the eavesdropper's SNR."""

    epsilon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def component_moments(
    n_elements: int, quant_bits
) -> Tuple[float, float, float]:
    """SNR-free moments (m1, sigma1_sq, sigma2_sq) of the aligned sum.

    With per-element quantization error uniform on
    ``[-pi/2**b, pi/2**b]`` and independent unit-variance cascade
    magnitudes, direct integration gives, writing ``x = 2**-b``
    (``x = 0`` for continuous control)::

        m1        = (N*pi/4) * sinc(x)
        sigma1_sq = (N/2) * (1 + sinc(2x)) - (N*pi**2/16) * sinc(x)**2
        sigma2_sq = (N/2) * (1 - sinc(2x))

    where ``sinc`` is the normalized sine cardinal.
    """
    n = float(n_elements)
    x = 0.0 if quant_bits is CONTINUOUS else 2.0 ** -quant_bits
    s1 = sinc_normalized(x)
    s2 = sinc_normalized(2.0 * x)
    m1 = n * math.pi / 4.0 * s1
    sigma1_sq = n / 2.0 * (1.0 + s2) - n * math.pi**2 / 16.0 * s1 * s1
    sigma2_sq = n / 2.0 * (1.0 - s2)
    return m1, sigma1_sq, sigma2_sq


def legit_stats(cfg: SystemConfig) -> LegitSnrStats:
    """Legitimate-link statistics for a scenario."""
    m1, sigma1_sq, sigma2_sq = component_moments(cfg.n_elements, cfg.quant_bits)
    root_snr = math.sqrt(cfg.gamma_srd_bar)
    alpha = m1 * root_snr
    beta = math.sqrt(2.0 * sigma1_sq * cfg.gamma_srd_bar)
    if cfg.quant_bits is CONTINUOUS:
        lam: Union[float, _DegenerateType] = DEGENERATE
        sigma2_sq = 0.0
    else:
        lam = 1.0 / (2.0 * sigma2_sq * cfg.gamma_srd_bar)
    return LegitSnrStats(
        m1=m1,
        sigma1_sq=sigma1_sq,
        sigma2_sq=sigma2_sq,
        alpha=alpha,
        beta=beta,
        lam=lam,
        mu=0.5,
    )


def eve_stats(cfg: SystemConfig) -> EveSnrStats:
    """Eavesdropper-link statistics for a scenario."""
    return EveSnrStats(
        epsilon=1.0 / (cfg.n_elements * cfg.gamma_sre_bar + cfg.gamma_se_bar)
    )


def _clamp_unit(value: float) -> float:
    return 0.0 if value < 0.0 else (1.0 if value > 1.0 else value)


def cdf_gamma_d1(x: float, stats: LegitSnrStats) -> float:
    """CDF of the cosine-side SNR ``gamma_d1`` at ``x >= 0``.

    ``gamma_d1`` is the square of a Gaussian with mean ``alpha`` and
    standard deviation ``beta/sqrt(2)``, so
    ``F(x) = 1 - erfc((alpha + sqrt(x))/beta)/2 - erfc((sqrt(x) - alpha)/beta)/2``,
    clamped to [0, 1] against floating-point dust.
    """
    if x < 0.0:
        raise ValueError(f"gamma_d1 support is [0, inf), got {x}")
    root = math.sqrt(x)
    value = (
        1.0
        - 0.5 * erfc((stats.alpha + root) / stats.beta)
        - 0.5 * erfc((root - stats.alpha) / stats.beta)
    )
    return _clamp_unit(value)


def pdf_gamma_d2(y: float, stats: LegitSnrStats) -> float:
    """Density of the sine-side SNR ``gamma_d2`` at ``y > 0``.

    A Gamma(shape 1/2, rate ``lam``) law.  Raises
    `DegenerateDistributionError` under continuous control, where
    ``gamma_d2`` is a point mass at zero and has no density.
    """
    if stats.lam is DEGENERATE:
        raise DegenerateDistributionError(
            "gamma_d2 is a point mass at 0 under continuous phase control"
        )
    if y <= 0.0:
        raise ValueError(f"gamma_d2 density is defined on (0, inf), got {y}")
    lam = stats.lam
    return (
        lam**stats.mu
        * y ** (stats.mu - 1.0)
        * math.exp(-lam * y)
        / gamma_function(stats.mu)
    )


def cdf_gamma_d_exact(z: float, stats: LegitSnrStats) -> float:
    """CDF of the full legitimate SNR ``gamma_d = gamma_d1 + gamma_d2``.

    Evaluates ``integral_0^z pdf_gamma_d2(y) * cdf_gamma_d1(z - y) dy``
    by adaptive quadrature under the substitution ``y = u**2``, which
    removes the inverse-square-root endpoint singularity:
    the integrand becomes ``2*sqrt(lam/pi) * exp(-lam*u**2) *
    cdf_gamma_d1(z - u**2)`` on ``[0, sqrt(z)]``.  Under continuous
    control ``gamma_d2 = 0`` and the result is ``cdf_gamma_d1(z)``.
    """
    if z < 0.0:
        raise ValueError(f"gamma_d support is [0, inf), got {z}")
    if stats.lam is DEGENERATE:
        return cdf_gamma_d1(z, stats)
    if z == 0.0:
        return 0.0
    lam = stats.lam
    scale = 2.0 * math.sqrt(lam / math.pi)

    def integrand(u: float) -> float:
        rest = z - u * u
        if rest < 0.0:  # endpoint round-off
            rest = 0.0
        return scale * math.exp(-lam * u * u) * cdf_gamma_d1(rest, stats)

    result: QuadratureResult = integrate_adaptive(
        integrand, 0.0, math.sqrt(z), rel_tol=1e-10, abs_tol=1e-16
    )
    return _clamp_unit(result.value)


def pdf_gamma_e(x: float, stats: EveSnrStats) -> float:
    """Density of the eavesdropper SNR: ``epsilon * exp(-epsilon*x)``."""
    if x < 0.0:
        raise ValueError(f"gamma_e support is [0, inf), got {x}")
    return stats.epsilon * math.exp(-stats.epsilon * x)


def cdf_gamma_e(x: float, stats: EveSnrStats) -> float:
    """CDF of the eavesdropper SNR: ``1 - exp(-epsilon*x)``."""
    if x < 0.0:
        raise ValueError(f"gamma_e support is [0, inf), got {x}")
    return -math.expm1(-stats.epsilon * x)
