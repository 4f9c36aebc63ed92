"""
BPSK over AWGN and the soft demapper that produces code-symbol pmfs.

Symbols of GF(2^m) are sent as m BPSK chips, most significant bit of the
label first, bit 0 -> +1 and bit 1 -> -1.  Each chip carries unit energy.
A q-ary PAM mapping is available for odd characteristic so the decoders can
be exercised over GF(p); it is not used for BER experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonBinaryExtension
from .galois import GaloisField


@dataclass(frozen=True)
class ChannelConfig:
    """Noise level for a terminated frame of L info and N tail symbols.

    The tail costs energy without carrying information, so the effective
    rate is L / (L + N) and sigma^2 = 1 / (2 R 10^(Eb/N0 / 10)).
    """

    ebn0_db: float
    bits_per_symbol: int
    info_len: int
    tail_len: int = 0

    @property
    def rate(self) -> float:
        return self.info_len / (self.info_len + self.tail_len)

    @property
    def sigma(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0)))

    @property
    def ecn0_db(self) -> float:
        """SNR per transmitted chip; lower than Eb/N0 by the tail overhead."""
        return self.ebn0_db + 10.0 * math.log10(self.rate)


@dataclass(frozen=True)
class ReceivedFrame:
    samples: np.ndarray
    sigma: float
    bits_per_symbol: int
    seed: int | None = None
    frame_index: int | None = None

    def __post_init__(self):
        if self.samples.shape[-1] % self.bits_per_symbol:
            raise ValueError("sample count is not a multiple of bits per symbol")


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Independent stream per (master seed, frame index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(frame_index,)))


def _bits(field: GaloisField) -> int:
    if field.p != 2:
        raise NonBinaryExtension(f"BPSK needs q = 2^m, got q = {field.q}")
    return field.m


def chip_table(field: GaloisField) -> np.ndarray:
    """(q, m) array of +-1 chips per symbol, MSB first."""
    m = _bits(field)
    labels = np.arange(field.q)[:, None]
    bits = (labels >> np.arange(m - 1, -1, -1)) & 1
    return 1.0 - 2.0 * bits


def modulate(field: GaloisField, code_syms) -> np.ndarray:
    """Symbols (..., T) -> chips (..., T*m)."""
    syms = np.asarray(code_syms, dtype=np.int64)
    chips = chip_table(field)[syms]
    return chips.reshape(syms.shape[:-1] + (-1,))


def add_noise(samples, sigma: float, rng: np.random.Generator) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return samples.copy()
    return samples + sigma * rng.standard_normal(samples.shape)


def _soft_max(score: np.ndarray) -> np.ndarray:
    score = score - score.max(axis=-1, keepdims=True)
    p = np.exp(score)
    return p / p.sum(axis=-1, keepdims=True)


def _hard(score: np.ndarray) -> np.ndarray:
    # sigma -> 0 limit: all mass on the best-matching symbols
    top = score >= score.max(axis=-1, keepdims=True)
    return top / top.sum(axis=-1, keepdims=True)


def demap(field: GaloisField, samples, sigma: float) -> np.ndarray:
    """Chips (..., T*m) -> symbol pmfs (..., T, q) under a uniform prior.

    log P(w) = sum_i y_i s_i(w) / sigma^2 + const, since every chip has the
    same energy; the max is subtracted before exponentiation.
    """
    m = _bits(field)
    y = np.asarray(samples, dtype=float)
    y = y.reshape(y.shape[:-1] + (-1, m))
    corr = y @ chip_table(field).T
    if sigma == 0:
        return _hard(corr)
    return _soft_max(corr / sigma**2)


def demap_frame(field: GaloisField, frame: ReceivedFrame) -> np.ndarray:
    return demap(field, frame.samples, frame.sigma)


# -- q-ary PAM (test use only) ---------------------------------------------------

def pam_levels(field: GaloisField) -> np.ndarray:
    """Unit average energy amplitudes for the q labels."""
    q = field.q
    levels = 2.0 * np.arange(q) - (q - 1)
    return levels / np.sqrt(np.mean(levels**2))


def pam_modulate(field: GaloisField, code_syms) -> np.ndarray:
    return pam_levels(field)[np.asarray(code_syms, dtype=np.int64)]


def pam_demap(field: GaloisField, samples, sigma: float) -> np.ndarray:
    y = np.asarray(samples, dtype=float)[..., None]
    d2 = (y - pam_levels(field)) ** 2
    if sigma == 0:
        return _hard(-d2)
    return _soft_max(-d2 / (2.0 * sigma**2))
