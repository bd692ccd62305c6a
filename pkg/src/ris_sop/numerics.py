"""Special functions and adaptive quadrature used by the analytical layer.

Everything here is a pure function; the module keeps no state beyond the
fixed Gauss-Legendre node tables built at import.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureResult",
    "QuadratureError",
    "erf",
    "erfc",
    "erfcx",
    "sinc_normalized",
    "gamma_function",
    "integrate_adaptive",
]


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a definite integral with an error estimate.

    abs_error_estimate is the accumulated difference between the two
    embedded quadrature rules; evaluations counts integrand calls.
    """

    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be >= 0")
        if self.evaluations < 1:
            raise ValueError("evaluations must be >= 1")


class QuadratureError(RuntimeError):
    """Raised when refinement stalls; carries the best estimate so far."""

    def __init__(self, message: str, best: QuadratureResult):
        super().__init__(message)
        self.best = best


def erf(x: float) -> float:
    """Error function."""
    return math.erf(x)


def erfc(x: float) -> float:
    """Complementary error function.

    Delegates to the C library routine, which switches to a dedicated
    continued-fraction evaluation for large arguments instead of
    computing 1 - erf(x); the far tail therefore keeps full relative
    accuracy (erfc(10) ~ 2e-45 is representable, 1 - erf(10) is not).
    """
    return math.erfc(x)


# Coefficients of the erfcx asymptotic series are (2k-1)!!; the series is
# truncated where its terms stop improving the sum for x >= _ERFCX_SWITCH.
_ERFCX_SWITCH = 25.0
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


def erfcx(x: float) -> float:
    """Scaled complementary error function exp(x^2) * erfc(x).

    Stays O(1/x) for large positive x where erfc underflows and exp
    overflows separately. For x below about -26.6 the true value
    exceeds the double range and the result overflows to inf.
    """
    if x < _ERFCX_SWITCH:
        return math.exp(x * x) * math.erfc(x)
    # Asymptotic expansion: 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k
    z = 1.0 / (2.0 * x * x)
    total = 1.0
    term = 1.0
    for k in range(1, 30):
        term *= -(2 * k - 1) * z
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total * _INV_SQRT_PI / x


def sinc_normalized(x: float) -> float:
    """sin(pi x)/(pi x) with the removable singularity filled: value 1 at 0."""
    if x == 0.0:
        return 1.0
    px = math.pi * x
    return math.sin(px) / px


def gamma_function(x: float) -> float:
    """Gamma function on the positive reals."""
    if not (x > 0.0):
        raise ValueError(f"gamma_function requires x > 0, got {x!r}")
    return math.gamma(x)


# Non-nested Gauss-Legendre pair: the 7-point rule is the error probe for
# the 15-point value. Nodes on [-1, 1].
_GL7_X, _GL7_W = (a.tolist() for a in np.polynomial.legendre.leggauss(7))
_GL15_X, _GL15_W = (a.tolist() for a in np.polynomial.legendre.leggauss(15))


def _panel(f, a: float, b: float) -> tuple[float, float, int]:
    """15-point value, |15-point - 7-point| error estimate, eval count."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    i15 = 0.0
    for x, w in zip(_GL15_X, _GL15_W):
        i15 += w * f(mid + half * x)
    i7 = 0.0
    for x, w in zip(_GL7_X, _GL7_W):
        i7 += w * f(mid + half * x)
    i15 *= half
    i7 *= half
    return i15, abs(i15 - i7), 22


def integrate_adaptive(
    f,
    a: float,
    b: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
    max_evals: int = 500_000,
) -> QuadratureResult:
    """Globally adaptive quadrature of f over [a, b], b possibly +inf.

    The interval with the largest error estimate is bisected until the
    summed estimate drops below max(abs_tol, rel_tol * |integral|).
    A semi-infinite range is first mapped onto [0, 1) with
    t = a + u/(1-u); node placement never touches interval endpoints,
    so integrable endpoint singularities are tolerated.

    Raises QuadratureError (carrying the best estimate) if the budget
    of max_evals integrand calls is exhausted first.
    """
    if not (rel_tol > 0.0 and abs_tol > 0.0):
        raise ValueError("rel_tol and abs_tol must be positive")
    if math.isinf(b):
        if b < 0:
            raise ValueError("lower-unbounded ranges are not supported")
        g = f
        offset = a

        def f(u, _g=g, _o=offset):  # noqa: F811 - deliberate rebinding
            s = 1.0 - u
            return _g(_o + u / s) / (s * s)

        a, b = 0.0, 1.0
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)

    value, err, evals = _panel(f, a, b)
    heap = [(-err, a, b, value, err)]
    while True:
        total_err = sum(item[4] for item in heap)
        total_val = sum(item[3] for item in heap)
        if total_err <= max(abs_tol, rel_tol * abs(total_val)):
            return QuadratureResult(total_val, total_err, evals)
        if evals + 44 > max_evals:
            best = QuadratureResult(total_val, total_err, evals)
            raise QuadratureError(
                f"quadrature did not converge within {max_evals} evaluations "
                f"(error estimate {total_err:.3e})",
                best,
            )
        _, lo, hi, _, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1, n1 = _panel(f, lo, mid)
        v2, e2, n2 = _panel(f, mid, hi)
        evals += n1 + n2
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
