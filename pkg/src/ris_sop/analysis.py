"""Secrecy-outage probability: bound, exact numeric value, asymptotics.

A secrecy outage occurs when the instantaneous secrecy capacity
``ln(1 + gamma_d) - ln(1 + gamma_e)`` falls below the target rate
``c_th``.  Writing ``varphi = exp(c_th)``, that event is
``gamma_d < (1 + gamma_e)*varphi - 1``, so the outage probability is
the expectation of the destination SNR's CDF over the eavesdropper's
exponential law.

Three evaluation routes are provided:

* `sop_bound_closed_form` — replaces the destination SNR by its
  dominant (cosine-side) part, which yields a closed-form upper bound
  built from complementary error functions; products of exponentials
  and erfc terms are combined through the scaled function erfcx so the
  expression stays finite at large surface sizes and SNRs.
* `sop_exact_numeric` — nested adaptive quadrature of the defining
  integral using the full destination-SNR CDF.
* `sop_asymptotic` — the small-rate, high-SNR exponential decay law in
  the number of elements, with closed-form special cases for binary
  and continuous phase control.

Design helpers quantify the cost of coarse phase lattices
(`taylor_quantization_loss`), size a binary-controlled surface to match
a continuous one (`equivalent_elements_binary`), bound the tightness of
the cosine-side approximation (`remark1_tightness_bound`), and expose
the SNR-ratio factor ``k`` that a surface placement controls
(`k_factor`).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Optional, Tuple, Union

from .channel import CONTINUOUS, GeometryConfig, SystemConfig
from .distributions import (
    EveSnrStats,
    LegitSnrStats,
    cdf_gamma_d_exact,
    eve_stats,
    legit_stats,
)
from .numerics import erf, erfc, erfcx, integrate_adaptive, sinc_normalized


class SopMethod(enum.Enum):
    """How a secrecy-outage probability value was produced."""

    CLOSED_FORM_BOUND = "ClosedFormBound"
    EXACT_NUMERIC = "ExactNumeric"
    ASYMPTOTIC_GENERAL = "AsymptoticGeneral"
    ASYMPTOTIC_CONTINUOUS = "AsymptoticContinuous"
    ASYMPTOTIC_BINARY = "AsymptoticBinary"
    MONTE_CARLO = "MonteCarlo"


@dataclasses.dataclass(frozen=True)
class SopEstimate:
    """A secrecy-outage probability with its provenance.

    ``uncertainty`` is a confidence-interval half-width (Monte-Carlo) or
    an absolute quadrature error estimate (numeric integration); None
    for closed forms.
    """

    value: float
    method: SopMethod
    uncertainty: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"probability must lie in [0, 1], got {self.value}")
        if not isinstance(self.method, SopMethod):
            raise TypeError(f"method must be a SopMethod, got {self.method!r}")
        if self.uncertainty is not None and not self.uncertainty >= 0.0:
            raise ValueError(f"uncertainty must be >= 0, got {self.uncertainty}")


@dataclasses.dataclass(frozen=True)
class BoundIntermediates:
    """Constants of the closed-form bound's quadratic completion.

    ``varphi = exp(c_th)``;
    ``A = beta**2 * varphi / (4*(beta**2*epsilon + varphi))``;
    ``B = 2*alpha / beta**2``.
    """

    varphi: float
    A: float
    B: float

    def __post_init__(self) -> None:
        if not self.varphi >= 1.0:
            raise ValueError(f"varphi must be >= 1, got {self.varphi}")
        for name in ("A", "B"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {v}")


@dataclasses.dataclass(frozen=True)
class AsymptoticTerms:
    """Ingredients of the high-SNR expansion around continuous control.

    ``x = 2**-b`` is the lattice half-step over pi; ``k`` the SNR ratio
    advantage of the legitimate link; the asymptotic outage is
    ``c1*exp(-c3*N) + c2*exp(-c3*N)*x**2 + O(x**4)``.
    """

    x: float
    k: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self) -> None:
        if not 0.0 < self.x <= 0.5:
            raise ValueError(f"x must lie in (0, 1/2], got {self.x}")
        for name in ("k", "c1", "c2", "c3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {v}")


def _clamp_unit(value: float) -> float:
    return 0.0 if value < 0.0 else (1.0 if value > 1.0 else value)


def bound_intermediates(
    stats: LegitSnrStats, eve: EveSnrStats, c_th: float
) -> BoundIntermediates:
    """Quadratic-completion constants of the closed-form bound."""
    if not c_th >= 0.0:
        raise ValueError(f"c_th must be >= 0, got {c_th}")
    varphi = math.exp(c_th)
    beta_sq = stats.beta * stats.beta
    a = beta_sq * varphi / (4.0 * (beta_sq * eve.epsilon + varphi))
    b = 2.0 * stats.alpha / beta_sq
    return BoundIntermediates(varphi=varphi, A=a, B=b)


def _bound_pieces(stats: LegitSnrStats, eve: EveSnrStats, c_th: float):
    """Shared evaluation of the bound's stable building blocks.

    Returns ``(E, t1, t2, u_plus, u_minus, inter)`` where the bound is
    ``(E + t1 + t2)/2`` and the two averaged erfc integrals are
    ``i1 = erfc(u_plus) - t1`` and ``i2 = erfc(u_minus) - t2``.

    The literal expressions multiply ``exp(a*b**2 + ...)`` by
    ``1 - erf(...)`` factors that underflow; completing the square turns
    each product into ``erfcx(w)*exp(-u**2)`` with moderate arguments:

    * ``exp(g)*erfc(b*sqrt(a) + c) = erfcx(b*sqrt(a) + c)*exp(-u_plus**2)``
    * ``exp(g)*erfc(c - b*sqrt(a)) = erfcx(c - b*sqrt(a))*exp(-u_minus**2)``

    with ``c = sqrt(varphi-1)/(2*sqrt(a))`` and the shared exponent
    ``g = a*b**2 + (varphi-1)*epsilon/varphi - alpha**2/beta**2``.  The
    second identity is used only while ``c >= b*sqrt(a)``; otherwise the
    erfc factor lies in (1, 2) and ``exp(g)`` itself is safe because
    ``a*b**2 - alpha**2/beta**2 = -alpha**2*epsilon/(beta**2*epsilon + varphi)``
    is never positive.
    """
    inter = bound_intermediates(stats, eve, c_th)
    alpha, beta, eps = stats.alpha, stats.beta, eve.epsilon
    varphi = inter.varphi
    s = math.sqrt(varphi - 1.0)
    root_a = math.sqrt(inter.A)
    u_plus = (s + alpha) / beta
    u_minus = (s - alpha) / beta
    c = s / (2.0 * root_a)
    w1 = inter.B * root_a + c
    w2 = c - inter.B * root_a
    front = 2.0 * root_a / beta

    t1 = front * erfcx(w1) * math.exp(-u_plus * u_plus)
    if w2 >= 0.0:
        t2 = front * erfcx(w2) * math.exp(-u_minus * u_minus)
    else:
        beta_sq = beta * beta
        g = (varphi - 1.0) * eps / varphi - alpha * alpha * eps / (
            beta_sq * eps + varphi
        )
        t2 = front * math.exp(g) * erfc(w2)

    if u_minus < 0.0:
        # erf(u_plus) + erf(u_minus) by complements: the difference of
        # two small erfc values, avoiding 1 - 1 cancellation
        e_sum = erfc(-u_minus) - erfc(u_plus)
    else:
        e_sum = erf(u_plus) + erf(u_minus)
    return e_sum, t1, t2, u_plus, u_minus, inter


def bound_integral_terms(cfg: SystemConfig) -> Tuple[float, float]:
    """The bound's two averaged erfc integrals ``(i1, i2)``.

    ``i1`` and ``i2`` average ``erfc((sqrt((1+x)*varphi - 1) +/- alpha)/beta)``
    over the eavesdropper's exponential law; the closed-form bound is
    ``1 - (i1 + i2)/2``.
    """
    stats = legit_stats(cfg)
    eve = eve_stats(cfg)
    e_sum, t1, t2, u_plus, u_minus, _ = _bound_pieces(stats, eve, cfg.c_th)
    return erfc(u_plus) - t1, erfc(u_minus) - t2


def sop_bound_closed_form(cfg: SystemConfig) -> SopEstimate:
    """Closed-form upper bound on the secrecy outage probability.

    Ignores the sine-side SNR component, which is pessimistic (the
    destination only gains from it), and averages the cosine-side CDF
    over the eavesdropper law in closed form.
    """
    stats = legit_stats(cfg)
    eve = eve_stats(cfg)
    e_sum, t1, t2, _, _, _ = _bound_pieces(stats, eve, cfg.c_th)
    value = 0.5 * e_sum + 0.5 * (t1 + t2)
    return SopEstimate(value=_clamp_unit(value), method=SopMethod.CLOSED_FORM_BOUND)


def sop_exact_numeric(
    cfg: SystemConfig, rel_tol: float = 1e-8, abs_tol: float = 1e-12
) -> SopEstimate:
    """Secrecy outage probability by direct numeric integration.

    Integrates the full destination-SNR CDF at the outage threshold
    ``(1 + gamma_e)*varphi - 1`` against the eavesdropper's exponential
    density, substituting ``t = epsilon*gamma_e`` so the outer decay
    scale is unity.  The estimate's ``uncertainty`` is the outer
    quadrature's absolute error bound.
    """
    stats = legit_stats(cfg)
    eve = eve_stats(cfg)
    varphi = math.exp(cfg.c_th)
    eps = eve.epsilon

    def integrand(t: float) -> float:
        threshold = (1.0 + t / eps) * varphi - 1.0
        return cdf_gamma_d_exact(threshold, stats) * math.exp(-t)

    result = integrate_adaptive(integrand, 0.0, math.inf, rel_tol=rel_tol, abs_tol=abs_tol)
    return SopEstimate(
        value=_clamp_unit(result.value),
        method=SopMethod.EXACT_NUMERIC,
        uncertainty=result.abs_error_estimate,
    )


def k_factor(
    source: Union[SystemConfig, GeometryConfig], n_elements: Optional[int] = None
) -> float:
    """SNR-advantage ratio ``k`` of the legitimate link.

    From a scenario: ``gamma_srd_bar / (gamma_sre_bar + gamma_se_bar/N)``.
    From geometry (requires ``n_elements``): the equivalent distance form
    ``d_rd**-u / (d_re**-u + (d_se/d_sr)**-u / N)``; the transmit power
    and both common factors cancel.
    """
    if isinstance(source, SystemConfig):
        return source.gamma_srd_bar / (
            source.gamma_sre_bar + source.gamma_se_bar / source.n_elements
        )
    if isinstance(source, GeometryConfig):
        if n_elements is None:
            raise TypeError("k_factor from geometry requires n_elements")
        u = source.upsilon
        return source.d_rd**-u / (
            source.d_re**-u + (source.d_se / source.d_sr) ** -u / n_elements
        )
    raise TypeError(f"expected SystemConfig or GeometryConfig, got {source!r}")


def _general_asymptote(n: float, k: float, x: float) -> float:
    s1 = sinc_normalized(x)
    s2 = sinc_normalized(2.0 * x)
    prefactor = math.sqrt(1.0 / (k * (1.0 + s2 - math.pi**2 / 8.0 * s1 * s1)))
    decay = 16.0 * (1.0 + s2) / (math.pi**2 * s1 * s1) - 2.0
    return prefactor * math.exp(-n / decay)


def continuous_asymptote(n: float, k: float) -> float:
    """High-SNR outage decay with continuous phase control (raw value)."""
    return math.sqrt(8.0 / (k * (16.0 - math.pi**2))) * math.exp(
        -math.pi**2 * n / (32.0 - 2.0 * math.pi**2)
    )


def binary_asymptote(n: float, k: float) -> float:
    """High-SNR outage decay with one-bit phase control (raw value)."""
    return math.sqrt(2.0 / k) * math.exp(-n / 2.0)


def sop_asymptotic(cfg: SystemConfig) -> SopEstimate:
    """Small-rate, high-SNR outage approximation, clamped to [0, 1].

    The formula assumes the legitimate mean SNR dominates both
    eavesdropper SNRs and the target rate is small; it is evaluated
    regardless, with applicability left to the caller.  The method tag
    records which closed form applied: the one-bit and continuous
    special cases, or the general lattice expression.
    """
    n = float(cfg.n_elements)
    k = k_factor(cfg)
    if cfg.quant_bits is CONTINUOUS:
        return SopEstimate(
            value=_clamp_unit(continuous_asymptote(n, k)),
            method=SopMethod.ASYMPTOTIC_CONTINUOUS,
        )
    if cfg.quant_bits == 1:
        return SopEstimate(
            value=_clamp_unit(binary_asymptote(n, k)),
            method=SopMethod.ASYMPTOTIC_BINARY,
        )
    return SopEstimate(
        value=_clamp_unit(_general_asymptote(n, k, 2.0**-cfg.quant_bits)),
        method=SopMethod.ASYMPTOTIC_GENERAL,
    )


def asymptotic_terms(cfg: SystemConfig) -> AsymptoticTerms:
    """Expansion of the asymptotic outage around continuous control.

    Requires a finite lattice (``x = 2**-b > 0``); the expansion reads
    ``c1*exp(-c3*N) + c2*exp(-c3*N)*x**2 + O(x**4)``.
    """
    if cfg.quant_bits is CONTINUOUS:
        raise ValueError("the quantization-loss expansion needs finite quant_bits")
    k = k_factor(cfg)
    c1 = math.sqrt(8.0 / (k * (16.0 - math.pi**2)))
    c2 = math.pi**2 / 6.0 * c1
    c3 = math.pi**2 / (32.0 - 2.0 * math.pi**2)
    return AsymptoticTerms(x=2.0**-cfg.quant_bits, k=k, c1=c1, c2=c2, c3=c3)


def taylor_quantization_loss(cfg: SystemConfig) -> Tuple[float, float, float]:
    """Quantization cost in the asymptotic regime.

    Returns ``(dominant, loss, ratio)``: the continuous-control decay
    term ``c1*exp(-c3*N)``, the lattice penalty ``c2*exp(-c3*N)*x**2``,
    and their ratio ``(pi**2/6)*x**2``, which is below 1/10 exactly when
    the lattice has at least three bits.
    """
    terms = asymptotic_terms(cfg)
    scale = math.exp(-terms.c3 * cfg.n_elements)
    dominant = terms.c1 * scale
    loss = terms.c2 * scale * terms.x * terms.x
    return dominant, loss, loss / dominant


def equivalent_elements_binary(n_continuous: int) -> int:
    """Smallest one-bit surface matching a continuous surface's decay.

    Equating the asymptotic exponents and prefactors gives
    ``N2 >= pi**2/(16 - pi**2) * N1 - ln(4/(16 - pi**2))``; the ceiling
    guarantees the inequality direction.
    """
    if n_continuous < 1:
        raise ValueError(f"n_continuous must be >= 1, got {n_continuous}")
    pi_sq = math.pi**2
    raw = pi_sq / (16.0 - pi_sq) * n_continuous - math.log(4.0 / (16.0 - pi_sq))
    return math.ceil(raw)


def remark1_tightness_bound(n: int, b) -> Tuple[float, float]:
    """How dominant the cosine-side SNR is at surface size ``n``.

    Returns ``(prob_lower_bound, moment_ratio)``: a lower bound
    ``max(0, 1 - 20/(n+1))`` on the probability that the sine-side SNR
    is below a tenth of the cosine side, and the ratio of their mean
    values ``E[gamma_d2]/E[gamma_d1]``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if b is not CONTINUOUS and (not isinstance(b, int) or b < 1):
        raise ValueError(f"b must be a positive int or CONTINUOUS, got {b!r}")
    prob_lower_bound = max(0.0, 1.0 - 20.0 / (n + 1.0))
    x = 0.0 if b is CONTINUOUS else 2.0**-b
    s1 = sinc_normalized(x)
    s2 = sinc_normalized(2.0 * x)
    moment_ratio = (
        8.0 * (1.0 - s2) / ((n - 1.0) * math.pi**2 * s1 * s1 + 8.0 * (1.0 + s2))
    )
    return prob_lower_bound, moment_ratio
