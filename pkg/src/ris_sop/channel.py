"""Scenario configuration, fading-channel sampling, and link SNRs.

The system: a source S reaches destination D only through a reflecting
surface of ``n_elements`` phase-controlled elements; an eavesdropper E
hears the surface and a direct S-E path.  All links are Rayleigh: each
coefficient is an independent circularly-symmetric complex Gaussian
with zero mean and unit variance.

Each surface element applies a phase from the lattice
``{0, 2*pi/2**b, ..., (2**b - 1) * 2*pi / 2**b}`` when ``quant_bits`` is
a finite ``b``, or any phase when ``quant_bits`` is `CONTINUOUS`.  The
controller aims each element's phase at ``phi_opt = -angle(h*g)`` so
the legitimate terms add coherently; with finite lattices a wrapped
quantization error ``theta = phi_sub - phi_opt`` in
``[-pi/2**b, pi/2**b]`` remains per element.

Link SNRs may be given directly (linear scale) or derived from
geometry; decibel inputs convert as ``linear = 10**(dB/10)``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Sequence, Tuple, Union

import numpy as np

from . import _kernels_py

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi


class _ContinuousType:
    """Singleton marking continuous (unquantized) phase control."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Continuous"

    def __reduce__(self):
        return (_ContinuousType, ())


#: Distinguished ``quant_bits`` value: phases may take any value in
#: ``[0, 2*pi)`` and the quantization error is identically zero.
CONTINUOUS = _ContinuousType()

QuantBits = Union[int, _ContinuousType]


def db_to_linear(db: float) -> float:
    """Convert a decibel value to linear scale: ``10**(db/10)``."""
    return 10.0 ** (float(db) / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a positive linear value to decibels."""
    if not x > 0.0:
        raise ValueError("linear value must be positive to express in dB")
    return 10.0 * math.log10(x)


def is_continuous(b: QuantBits) -> bool:
    """True when ``b`` is the `CONTINUOUS` marker."""
    return b is CONTINUOUS


def _validate_quant_bits(b: QuantBits) -> None:
    if b is CONTINUOUS:
        return
    if isinstance(b, bool) or not isinstance(b, int):
        raise TypeError(f"quant_bits must be an int >= 1 or CONTINUOUS, got {b!r}")
    if b < 1:
        raise ValueError(f"quant_bits must be >= 1 when finite, got {b}")


def n_phase_levels(b: QuantBits) -> int:
    """Number of lattice phases (``2**b``), or 0 for `CONTINUOUS`."""
    _validate_quant_bits(b)
    return 0 if b is CONTINUOUS else 2**b


def _require_positive_finite(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be strictly positive and finite, got {value}")
    return value


@dataclasses.dataclass(frozen=True)
class SystemConfig:
    """Static scenario parameters.

    ``gamma_*_bar`` are mean link SNRs on a linear scale:
    ``gamma_srd_bar`` for the surface-assisted S-D path,
    ``gamma_sre_bar`` for the surface-bounced S-E path, and
    ``gamma_se_bar`` for the direct S-E path.  ``c_th`` is the target
    secrecy rate in nats per channel use.
    """

    n_elements: int
    quant_bits: QuantBits
    gamma_srd_bar: float
    gamma_sre_bar: float
    gamma_se_bar: float
    c_th: float

    def __post_init__(self) -> None:
        if isinstance(self.n_elements, bool) or not isinstance(self.n_elements, int):
            raise TypeError(f"n_elements must be an int, got {self.n_elements!r}")
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        _validate_quant_bits(self.quant_bits)
        for name in ("gamma_srd_bar", "gamma_sre_bar", "gamma_se_bar"):
            object.__setattr__(
                self, name, _require_positive_finite(name, getattr(self, name))
            )
        c_th = float(self.c_th)
        if not (math.isfinite(c_th) and c_th >= 0.0):
            raise ValueError(f"c_th must be finite and >= 0, got {c_th}")
        object.__setattr__(self, "c_th", c_th)

    @property
    def n_phases(self) -> int:
        """Lattice size ``2**b``, or 0 when phases are continuous."""
        return n_phase_levels(self.quant_bits)


@dataclasses.dataclass(frozen=True)
class GeometryConfig:
    """Physical layout from which mean link SNRs are derived.

    Distances are in meters: ``d_sr`` source-to-surface, ``d_rd``
    surface-to-destination, ``d_re`` surface-to-eavesdropper, ``d_se``
    source-to-eavesdropper.  ``upsilon`` is the path-loss exponent,
    ``eta`` in (0, 1] the surface amplitude reflection coefficient, and
    ``tx_snr`` the transmit SNR P/N0 on a linear scale.
    """

    d_sr: float
    d_rd: float
    d_re: float
    d_se: float
    upsilon: float
    eta: float
    tx_snr: float

    def __post_init__(self) -> None:
        for name in ("d_sr", "d_rd", "d_re", "d_se", "upsilon", "tx_snr"):
            object.__setattr__(
                self, name, _require_positive_finite(name, getattr(self, name))
            )
        eta = float(self.eta)
        if not (0.0 < eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {eta}")
        object.__setattr__(self, "eta", eta)


def snrs_from_geometry(geo: GeometryConfig) -> Tuple[float, float, float]:
    """Mean link SNRs (gamma_srd_bar, gamma_sre_bar, gamma_se_bar).

    Path loss follows a power law with exponent ``upsilon``; both
    surface hops attenuate, and the surface reflection scales power by
    ``eta**2`` (the direct-path expression keeps the same constant).
    """
    common = geo.eta**2 * geo.tx_snr
    gamma_srd = common * geo.d_sr**-geo.upsilon * geo.d_rd**-geo.upsilon
    gamma_sre = common * geo.d_sr**-geo.upsilon * geo.d_re**-geo.upsilon
    gamma_se = common * geo.d_se**-geo.upsilon
    return gamma_srd, gamma_sre, gamma_se


def _finite_complex_tuple(name: str, values: Sequence[complex]) -> Tuple[complex, ...]:
    out = tuple(complex(v) for v in values)
    for v in out:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"{name} contains a non-finite coefficient: {v!r}")
    return out


@dataclasses.dataclass(frozen=True)
class ChannelRealization:
    """One draw of all fading coefficients.

    ``h``: source-to-surface, ``g``: surface-to-destination,
    ``p``: surface-to-eavesdropper (each of length ``n_elements``);
    ``h_se``: the direct source-to-eavesdropper coefficient.
    """

    h: Tuple[complex, ...]
    g: Tuple[complex, ...]
    p: Tuple[complex, ...]
    h_se: complex

    def __post_init__(self) -> None:
        for name in ("h", "g", "p"):
            object.__setattr__(
                self, name, _finite_complex_tuple(name, getattr(self, name))
            )
        if not (len(self.h) == len(self.g) == len(self.p)):
            raise ValueError("h, g, p must have equal length")
        if len(self.h) < 1:
            raise ValueError("a realization needs at least one element")
        h_se = complex(self.h_se)
        if not (math.isfinite(h_se.real) and math.isfinite(h_se.imag)):
            raise ValueError(f"h_se must be finite, got {h_se!r}")
        object.__setattr__(self, "h_se", h_se)

    @property
    def n_elements(self) -> int:
        return len(self.h)


@dataclasses.dataclass(frozen=True)
class PhaseVector:
    """Configured surface phases and their wrapped quantization errors.

    ``phases[i]`` is the applied phase in ``[0, 2*pi)``;
    ``quant_errors[i]`` is the wrapped difference
    ``phases[i] - phi_opt[i]`` and lies in ``[-pi/2**b, pi/2**b]`` for
    finite ``b`` (identically zero for continuous control).
    """

    phases: Tuple[float, ...]
    quant_errors: Tuple[float, ...]

    def __post_init__(self) -> None:
        phases = tuple(float(v) for v in self.phases)
        errors = tuple(float(v) for v in self.quant_errors)
        if len(phases) != len(errors):
            raise ValueError("phases and quant_errors must have equal length")
        for v in phases:
            if not (0.0 <= v < _TWO_PI):
                raise ValueError(f"phase {v} outside [0, 2*pi)")
        for e in errors:
            if not (math.isfinite(e) and abs(e) <= math.pi):
                raise ValueError(f"quantization error {e} outside [-pi, pi]")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "quant_errors", errors)


class ChannelStream:
    """Deterministic stream of channel realizations.

    Realization ``t`` depends only on ``(master_seed, t)``, never on
    how many draws preceded it, so independent workers may consume
    disjoint trial-index ranges of the same stream and reproduce a
    single-worker run exactly.
    """

    def __init__(self, master_seed: int, first_trial: int = 0):
        if isinstance(master_seed, bool) or not isinstance(master_seed, int):
            raise TypeError("master_seed must be an int")
        if not 0 <= master_seed < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit word")
        if isinstance(first_trial, bool) or not isinstance(first_trial, int):
            raise TypeError("first_trial must be an int")
        if first_trial < 0:
            raise ValueError("first_trial must be >= 0")
        self.master_seed = master_seed
        self.next_trial = first_trial

    def take_coefficients(self, n_elements: int):
        """Raw coefficient arrays for the next trial, advancing the stream."""
        h, g, p, h_se = _kernels_py.trial_coefficients(
            self.master_seed, self.next_trial, n_elements
        )
        self.next_trial += 1
        return h, g, p, h_se


def sample_channels(cfg: SystemConfig, stream: ChannelStream) -> ChannelRealization:
    """Draw one independent realization of all fading coefficients."""
    h, g, p, h_se = stream.take_coefficients(cfg.n_elements)
    return ChannelRealization(
        h=tuple(complex(v) for v in h),
        g=tuple(complex(v) for v in g),
        p=tuple(complex(v) for v in p),
        h_se=h_se,
    )


def _optimal_phases(ch: ChannelRealization) -> np.ndarray:
    hg = np.asarray(ch.h, dtype=np.complex128) * np.asarray(ch.g, dtype=np.complex128)
    return -np.angle(hg)


def quantize_phases(ch: ChannelRealization, b: QuantBits) -> PhaseVector:
    """Aim each element at ``phi_opt = -angle(h*g)`` on the phase lattice.

    For finite ``b`` each applied phase is the lattice member nearest to
    ``phi_opt`` in circular distance; when ``phi_opt`` falls exactly
    midway between two members the numerically smaller phase wins.  For
    `CONTINUOUS`, the applied phase is ``phi_opt`` itself (wrapped to
    ``[0, 2*pi)``) and every error is zero.
    """
    _validate_quant_bits(b)
    phi_opt = _optimal_phases(ch)
    if b is CONTINUOUS:
        phases = np.mod(phi_opt, _TWO_PI)
        # a tiny negative angle can round up to exactly 2*pi; keep [0, 2*pi)
        phases[phases >= _TWO_PI] = 0.0
        return PhaseVector(
            phases=tuple(phases.tolist()),
            quant_errors=(0.0,) * ch.n_elements,
        )
    levels = 2**b
    step = _TWO_PI / levels
    t = phi_opt / step
    k0 = np.floor(t)
    frac = t - k0
    k = np.where(frac > 0.5, k0 + 1.0, k0)
    # exact midpoint: of the two nearest lattice phases, take the smaller
    # value; the upper neighbour wins only when it wraps around to zero
    tie = frac == 0.5
    if np.any(tie):
        upper = np.mod(k0 + 1.0, levels)
        k = np.where(tie & (upper == 0.0), k0 + 1.0, k)
    k = np.mod(k, levels)
    phases = k * step
    errors = np.remainder(phases - phi_opt + math.pi, _TWO_PI) - math.pi
    half_width = math.pi / levels
    if float(np.max(np.abs(errors))) > half_width * (1.0 + 1e-9) + 1e-15:
        raise RuntimeError("quantization error exceeded its half-width bound")
    # round-off in the wrap can overshoot the boundary by an ulp
    np.clip(errors, -half_width, half_width, out=errors)
    return PhaseVector(
        phases=tuple(phases.tolist()),
        quant_errors=tuple(errors.tolist()),
    )


def _phase_factors(pv: PhaseVector) -> np.ndarray:
    return np.exp(1j * np.asarray(pv.phases, dtype=np.float64))


def snr_legitimate(
    ch: ChannelRealization, pv: PhaseVector, cfg: SystemConfig
) -> float:
    """Instantaneous destination SNR ``gamma_srd_bar * |sum h*g*e^{j*phi}|**2``."""
    hg = np.asarray(ch.h, dtype=np.complex128) * np.asarray(ch.g, dtype=np.complex128)
    s = complex(np.sum(hg * _phase_factors(pv)))
    return cfg.gamma_srd_bar * (s.real * s.real + s.imag * s.imag)


def legit_components(ch: ChannelRealization, pv: PhaseVector) -> Tuple[float, float]:
    """Error-side decomposition (X, Y) of the aligned legitimate sum.

    ``X = sum |h||g| cos(theta)`` and ``Y = sum |h||g| sin(theta)`` over
    the per-element quantization errors theta, so the destination SNR
    equals ``gamma_srd_bar * (X**2 + Y**2)``.
    """
    mag = np.abs(
        np.asarray(ch.h, dtype=np.complex128) * np.asarray(ch.g, dtype=np.complex128)
    )
    theta = np.asarray(pv.quant_errors, dtype=np.float64)
    x = float(np.sum(mag * np.cos(theta)))
    y = float(np.sum(mag * np.sin(theta)))
    return x, y


def snr_eavesdropper(
    ch: ChannelRealization, pv: PhaseVector, cfg: SystemConfig
) -> float:
    """Instantaneous eavesdropper SNR.

    The eavesdropper hears the surface bounce (through the same applied
    phases, which are not aligned for it) plus the direct path:
    ``|sqrt(gamma_sre_bar) * sum h*p*e^{j*phi} + sqrt(gamma_se_bar) * h_se|**2``.
    """
    hp = np.asarray(ch.h, dtype=np.complex128) * np.asarray(ch.p, dtype=np.complex128)
    bounced = complex(np.sum(hp * _phase_factors(pv)))
    z = math.sqrt(cfg.gamma_sre_bar) * bounced + math.sqrt(cfg.gamma_se_bar) * complex(
        ch.h_se
    )
    return z.real * z.real + z.imag * z.imag


# --- scenario files -------------------------------------------------------

#: Keys accepted in scenario files.  Mean link SNRs may be given
#: directly (the three gamma_*_db keys) or via the geometry block; if
#: both complete sets appear, the direct SNRs win and a warning is
#: logged.
CONFIG_KEYS = (
    "n_elements",
    "quant_bits",
    "gamma_srd_db",
    "gamma_sre_db",
    "gamma_se_db",
    "c_th_nats",
    "d_sr",
    "d_rd",
    "d_re",
    "d_se",
    "upsilon",
    "eta",
    "tx_snr_db",
)

_SNR_KEYS = ("gamma_srd_db", "gamma_sre_db", "gamma_se_db")
_GEOMETRY_KEYS = ("d_sr", "d_rd", "d_re", "d_se", "upsilon", "eta", "tx_snr_db")


def parse_quant_bits(text: str) -> QuantBits:
    """Parse a ``quant_bits`` value: an integer or ``continuous``."""
    word = text.strip()
    if word.lower() == "continuous":
        return CONTINUOUS
    try:
        value = int(word)
    except ValueError:
        raise ValueError(
            f"quant_bits must be an integer or 'continuous', got {word!r}"
        ) from None
    _validate_quant_bits(value)
    return value


def parse_config_text(text: str) -> SystemConfig:
    """Build a `SystemConfig` from ``key = value`` scenario text.

    Blank lines and ``#`` comments (full-line or trailing) are ignored.
    Unknown or repeated keys raise ValueError.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ValueError(f"line {lineno}: repeated key {key!r}")
        if not value:
            raise ValueError(f"line {lineno}: empty value for {key!r}")
        raw[key] = value

    for key in ("n_elements", "quant_bits", "c_th_nats"):
        if key not in raw:
            raise ValueError(f"missing required key {key!r}")

    n_elements = int(raw["n_elements"])
    quant_bits = parse_quant_bits(raw["quant_bits"])
    c_th = float(raw["c_th_nats"])

    have_snrs = all(k in raw for k in _SNR_KEYS)
    have_geometry = all(k in raw for k in _GEOMETRY_KEYS)
    if have_snrs:
        if any(k in raw for k in _GEOMETRY_KEYS):
            logger.warning(
                "scenario supplies both direct SNRs and geometry; "
                "using the direct SNRs"
            )
        gamma_srd = db_to_linear(float(raw["gamma_srd_db"]))
        gamma_sre = db_to_linear(float(raw["gamma_sre_db"]))
        gamma_se = db_to_linear(float(raw["gamma_se_db"]))
    elif have_geometry:
        if any(k in raw for k in _SNR_KEYS):
            missing = [k for k in _SNR_KEYS if k not in raw]
            raise ValueError(
                f"incomplete direct-SNR block: missing {missing}; "
                "supply all three gamma_*_db keys or none"
            )
        geo = GeometryConfig(
            d_sr=float(raw["d_sr"]),
            d_rd=float(raw["d_rd"]),
            d_re=float(raw["d_re"]),
            d_se=float(raw["d_se"]),
            upsilon=float(raw["upsilon"]),
            eta=float(raw["eta"]),
            tx_snr=db_to_linear(float(raw["tx_snr_db"])),
        )
        gamma_srd, gamma_sre, gamma_se = snrs_from_geometry(geo)
    else:
        raise ValueError(
            "scenario must supply either all of gamma_srd_db/gamma_sre_db/"
            "gamma_se_db or the full geometry block "
            "(d_sr, d_rd, d_re, d_se, upsilon, eta, tx_snr_db)"
        )

    return SystemConfig(
        n_elements=n_elements,
        quant_bits=quant_bits,
        gamma_srd_bar=gamma_srd,
        gamma_sre_bar=gamma_sre,
        gamma_se_bar=gamma_se,
        c_th=c_th,
    )


def load_config(path) -> SystemConfig:
    """Read a scenario file (see `parse_config_text` for the format)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
