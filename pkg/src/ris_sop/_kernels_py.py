"""NumPy implementation of the per-trial simulation kernel.

Random-number contract (shared with the compiled kernel):

* Philox4x64-10 counter-based generator. Trial t, block j uses counter
  words (j+1, t, 0, 0) and key (master_seed, 0), so every trial owns an
  independent substream addressed purely by its index. Nothing here
  depends on batch boundaries or worker scheduling.
* Each 4-word block yields 4 uniforms u = (word >> 11) * 2**-53.
* Uniform pairs map to normal pairs via Box-Muller:
  r = sqrt(-2 ln(1 - u_even)), angle = 2 pi u_odd,
  z_even = r cos(angle), z_odd = r sin(angle).
* A trial consumes 6N + 2 normals, in order: interleaved re/im of the
  N source-to-surface coefficients, then the N surface-to-receiver
  coefficients, then the N surface-to-eavesdropper coefficients, then
  the direct-link coefficient. Complex coefficient = (re + j im)/sqrt(2).

Trial outputs are intentionally SNR-free: scaling by the average link
SNRs and the outage decision happen in the caller, so one simulated
batch can serve any SNR point.
"""

from __future__ import annotations

import math

import numpy as np

_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B
_U32 = 0xFFFFFFFF
_TWO_M53 = 2.0**-53

BACKEND_NAME = "numpy"


def _mulhilo(a: int, b):
    """128-bit product of a scalar constant and a uint64 array: (hi, lo)."""
    a = np.uint64(a)
    b = np.asarray(b, dtype=np.uint64)
    lo = a * b  # wraps mod 2**64 by design
    ah = a >> np.uint64(32)
    al = a & np.uint64(_U32)
    bh = b >> np.uint64(32)
    bl = b & np.uint64(_U32)
    t = al * bl
    t = ah * bl + (t >> np.uint64(32))
    w1 = t & np.uint64(_U32)
    w2 = t >> np.uint64(32)
    t2 = al * bh + w1
    hi = ah * bh + w2 + (t2 >> np.uint64(32))
    return hi, lo


def _round_keys(seed: int):
    mask = 0xFFFFFFFFFFFFFFFF
    seed &= mask
    return [
        (np.uint64((seed + r * _W0) & mask), np.uint64((r * _W1) & mask))
        for r in range(10)
    ]


def _philox_block(c0, c1, c2, c3, round_keys):
    """Ten Philox4x64 rounds; returns the four output words."""
    for k0, k1 in round_keys:
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    return c0, c1, c2, c3


def words_per_trial(n_elements: int) -> int:
    return 6 * n_elements + 2


def _batch_uniforms(seed: int, start_trial: int, n_trials: int, n_words: int):
    """Uniforms for trials [start_trial, start_trial + n_trials), shape
    (n_trials, n_blocks*4)."""
    n_blocks = (n_words + 3) // 4
    keys = _round_keys(seed)
    t = np.arange(start_trial, start_trial + n_trials, dtype=np.uint64)
    zero = np.zeros(n_trials, dtype=np.uint64)
    out = np.empty((n_blocks * 4, n_trials), dtype=np.uint64)
    for j in range(n_blocks):
        c0 = np.full(n_trials, j + 1, dtype=np.uint64)
        r0, r1, r2, r3 = _philox_block(c0, t, zero, zero, keys)
        out[4 * j] = r0
        out[4 * j + 1] = r1
        out[4 * j + 2] = r2
        out[4 * j + 3] = r3
    u = (out >> np.uint64(11)).astype(np.float64) * _TWO_M53
    return u.T.copy()


def _batch_normals(seed: int, start_trial: int, n_trials: int, n_words: int):
    u = _batch_uniforms(seed, start_trial, n_trials, n_words)
    r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0::2]))
    ang = (2.0 * math.pi) * u[:, 1::2]
    z = np.empty_like(u)
    z[:, 0::2] = r * np.cos(ang)
    z[:, 1::2] = r * np.sin(ang)
    return z[:, :n_words]


def _split_coefficients(z: np.ndarray, n: int):
    s = 1.0 / math.sqrt(2.0)
    h = (z[:, 0 : 2 * n : 2] + 1j * z[:, 1 : 2 * n : 2]) * s
    g = (z[:, 2 * n : 4 * n : 2] + 1j * z[:, 2 * n + 1 : 4 * n : 2]) * s
    p = (z[:, 4 * n : 6 * n : 2] + 1j * z[:, 4 * n + 1 : 6 * n : 2]) * s
    h_se = (z[:, 6 * n] + 1j * z[:, 6 * n + 1]) * s
    return h, g, p, h_se


def batch_coefficients(seed: int, start_trial: int, n_trials: int, n_elements: int):
    """Fading coefficients for trials [start_trial, start_trial + n_trials):
    arrays h, g, p of shape (n_trials, n_elements) and h_se of shape
    (n_trials,)."""
    z = _batch_normals(seed, start_trial, n_trials, words_per_trial(n_elements))
    return _split_coefficients(z, n_elements)


def trial_coefficients(seed: int, trial_index: int, n_elements: int):
    """One trial's fading coefficients (h, g, p, h_se); h, g, p have
    shape (n_elements,)."""
    h, g, p, h_se = batch_coefficients(seed, trial_index, 1, n_elements)
    return h[0], g[0], p[0], complex(h_se[0])


def phase_table(n_phases: int):
    """Cos/sin of the n_phases equally spaced candidate phases."""
    step = 2.0 * math.pi / n_phases
    k = np.arange(n_phases, dtype=np.float64)
    return np.cos(step * k), np.sin(step * k)


def simulate_batch(
    seed: int, start_trial: int, n_trials: int, n_elements: int, n_phases: int
):
    """Simulate trials [start_trial, start_trial + n_trials).

    n_phases is 2**b for finite quantization, 0 for continuous phases.
    Returns six float64 arrays of length n_trials:
    x, y               components of the aligned legitimate sum,
    eav_re, eav_im     the surface-bounced eavesdropper sum,
    dir_re, dir_im     the direct source-eavesdropper coefficient.
    """
    z = _batch_normals(seed, start_trial, n_trials, words_per_trial(n_elements))
    h, g, p, h_se = _split_coefficients(z, n_elements)
    hg = h * g
    re = hg.real
    im = hg.imag
    w = h * p
    if n_phases == 0:
        mag = np.sqrt(re * re + im * im)
        x = mag.sum(axis=1)
        y = np.zeros(n_trials)
        # unit rotation aligning each cascade term; accept a zero-magnitude
        # cascade (probability-zero draw) by rotating with 1
        safe = np.where(mag == 0.0, 1.0, mag)
        rot_re = np.where(mag == 0.0, 1.0, re / safe)
        rot_im = np.where(mag == 0.0, 0.0, -im / safe)
    else:
        cos_t, sin_t = phase_table(n_phases)
        best_score = re * cos_t[0] - im * sin_t[0]
        best_k = np.zeros(re.shape, dtype=np.int64)
        for k in range(1, n_phases):
            score = re * cos_t[k] - im * sin_t[k]
            better = score > best_score
            best_score = np.where(better, score, best_score)
            best_k = np.where(better, k, best_k)
        rot_re = cos_t[best_k]
        rot_im = sin_t[best_k]
        x = best_score.sum(axis=1)
        y = (re * rot_im + im * rot_re).sum(axis=1)
    eav_re = (w.real * rot_re - w.imag * rot_im).sum(axis=1)
    eav_im = (w.real * rot_im + w.imag * rot_re).sum(axis=1)
    return x, y, eav_re, eav_im, h_se.real.copy(), h_se.imag.copy()
